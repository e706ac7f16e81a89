import numpy as np
import pytest
from hypothesis import settings

from fblbounds import InputDist, make_channel

settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def bsc():
    return make_channel("bsc", [0.11])


@pytest.fixture(scope="session")
def bec():
    return make_channel("bec", [0.5])


@pytest.fixture(scope="session")
def zch():
    return make_channel("z", [0.5])


@pytest.fixture(scope="session")
def biagc():
    return make_channel("biagc", [0.0])


@pytest.fixture(scope="session")
def uniform2():
    return InputDist.uniform(2)


@pytest.fixture(autouse=True)
def _quiet_numpy():
    with np.errstate(all="ignore"):
        yield


_LINES_KEY = pytest.StashKey[dict]()


@pytest.fixture
def report(request, capsys):
    """Record one PASS/FAIL line for an acceptance criterion and print it."""
    lines = request.config.stash.setdefault(_LINES_KEY, {})

    def emit(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {criterion}  {detail}"
        lines[criterion] = line
        with capsys.disabled():
            print(f"\n{line}")
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines, key=lambda k: (int(k[1:].split(".")[0]), k)):
            terminalreporter.write_line(lines[key])
