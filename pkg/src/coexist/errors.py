"""Exception types raised across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


class EmptySequenceError(ValueError):
    """A raw sequence too short to yield a single data point."""


class TraceFormatError(ValueError):
    """Malformed prediction-trace or dataset file."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class IncompleteTraceError(ValueError):
    """A trace that does not cover every data point under evaluation."""

    def __init__(self, missing):
        self.missing = sorted(missing)
        head = ", ".join(str(u) for u in self.missing[:10])
        more = "" if len(self.missing) <= 10 else f", ... ({len(self.missing)} total)"
        super().__init__(f"trace has no prediction for data points: {head}{more}")


class UndefinedMetricError(ValueError):
    """Metric requested over an empty population (e.g. no URLL points)."""
