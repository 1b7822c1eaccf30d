import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from nlpspec.charfn import Controls, ProblemSpec, ReducedProblem, reduce
from nlpspec.funcspace import Grid, GridFunction

settings.register_profile("ci", max_examples=25, deadline=None)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def grid():
    return Grid(1024)


@pytest.fixture(scope="session")
def ktilde(grid):
    return GridFunction.from_callable(lambda t: (1 - 1j) / 2 * (t - np.pi), grid)


@pytest.fixture(scope="session")
def red_tilde(ktilde):
    return ReducedProblem.from_K(ktilde)


@pytest.fixture(scope="session")
def red_zero(grid):
    return ReducedProblem.from_K(GridFunction.constant(0.0, grid))


@pytest.fixture(scope="session")
def red_03(grid):
    return ReducedProblem.from_K(GridFunction.constant(0.3, grid))


@pytest.fixture(scope="session")
def free_spec(grid):
    return ProblemSpec.momentum(GridFunction.constant(0.0, grid))


@pytest.fixture(scope="session")
def damped_spec():
    return ProblemSpec.from_callables(lambda x: 1j + 0 * x, 1.0, lambda x: 0 * x)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num][1])
