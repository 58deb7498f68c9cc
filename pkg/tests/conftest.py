import numpy as np
import pytest

from wpencil import GL, SL, InvariantState

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def gl_state(rng):
    return InvariantState.random(3, 4, rng, GL)


@pytest.fixture
def sl_state(rng):
    return InvariantState.random(3, 4, rng, SL)


@pytest.fixture
def acceptance_line(request):
    """Record one summary line; all of them are echoed after the run."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(text: str) -> None:
        lines.append(text)
        print(text)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for text in sorted(lines):
            terminalreporter.write_line(text)
