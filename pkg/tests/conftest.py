import numpy as np
import pytest

from adaptive_sensing.geometry import Grid, Region


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid():
    return Grid(Region(1000.0, 1000.0), 10.0)


_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one ``PASS``/``FAIL`` line for an acceptance criterion.

    Lines are printed as they happen (visible with ``-s``) and repeated in
    the terminal summary so they always show up in the test log.
    """
    lines = request.config.stash.setdefault(_LINES, [])

    def report(label: str, ok, detail: str = "") -> bool:
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        line = f"[{status}] {label}" + (f": {detail}" if detail else "")
        lines.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
