import numpy as np
import pytest
from hypothesis import settings

from ssa_lab.optimize import OptimizerConfig

settings.register_profile("lab", max_examples=25, deadline=None)
settings.load_profile("lab")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def fast_config():
    return OptimizerConfig(restarts=20, patience=4)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def verdict(request):
    """Record one pass/fail line per acceptance criterion, then assert."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def _verdict(n: int, ok: bool, detail: str, extra=()):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
        print(line)
        lines.append(line)
        lines.extend(f"    {x}" for x in extra)
        assert ok, line

    return _verdict


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
