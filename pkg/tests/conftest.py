import pytest

from coexist.scenario import ScenarioConfig, build_dataset, validation
from coexist.timing import TimingConfig

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log(request):
    """Call with (criterion, passed, detail) to add a line to the summary."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(name, passed, detail):
        lines.append(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")

    return record


@pytest.fixture(scope="session")
def timing():
    return TimingConfig()


@pytest.fixture(scope="session")
def default_dataset(timing):
    return build_dataset(ScenarioConfig(), timing)


@pytest.fixture(scope="session")
def default_val(default_dataset):
    return validation(default_dataset)


@pytest.fixture(scope="session")
def small_config():
    return ScenarioConfig(num_raw_sequences=120, seed=11)


@pytest.fixture(scope="session")
def small_dataset(small_config, timing):
    return build_dataset(small_config, timing)
