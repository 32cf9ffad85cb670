import numpy as np
import pytest

from stablediff import SampledSignal, make_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def sample():
    def _sample(n, fn):
        return SampledSignal.from_function(make_grid(n), fn)
    return _sample


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.RESULTS:
        test_acceptance = mod
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.report_lines():
            terminalreporter.write_line(line)
