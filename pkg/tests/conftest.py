import numpy as np
import pytest

from greedy_ising.core import Graph, IsingModel


def single_edge(theta: float = 0.5, alpha: float | None = None, beta: float | None = None) -> IsingModel:
    a = abs(theta) if alpha is None else alpha
    b = max(abs(theta), a) if beta is None else beta
    return IsingModel(Graph.from_edges(2, [(0, 1)]), {(0, 1): theta}, (0.0, 0.0), alpha=a, beta=b)


def path(p: int, theta: float = 0.8) -> IsingModel:
    return IsingModel.uniform(Graph.from_edges(p, [(k, k + 1) for k in range(p - 1)]), theta)


def cycle(p: int, theta: float = 0.8) -> IsingModel:
    return IsingModel.uniform(Graph.from_edges(p, [(k, (k + 1) % p) for k in range(p)]), theta)


def star(p: int, theta: float = 0.8) -> IsingModel:
    return IsingModel.uniform(Graph.from_edges(p, [(0, k) for k in range(1, p)]), theta)


def brute_joint(model: IsingModel) -> dict[tuple[int, ...], float]:
    """Independent oracle: enumerate configurations with itertools and plain floats."""
    import itertools
    import math

    w = {}
    for x in itertools.product((-1, 1), repeat=model.p):
        e = sum(t * x[i] * x[j] for (i, j), t in model.couplings.items())
        e += sum(f * xi for f, xi in zip(model.fields, x))
        w[x] = math.exp(e)
    z = sum(w.values())
    return {x: v / z for x, v in w.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance lines, filled by test_acceptance.py and printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
