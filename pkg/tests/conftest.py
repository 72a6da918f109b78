import numpy as np
import pytest

from paretobo import gp
from paretobo.benchfns import BoxDomain


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_gp(n=2, k=8, seed=0, fn=None, domain=None):
    """Fit a GP to ``k`` random points of a smooth test function."""
    r = np.random.default_rng(seed)
    dom = domain or BoxDomain.unit(n)
    X = dom.lower + r.random((k, n)) * dom.width
    if fn is None:
        y = np.sin(3 * dom.to_unit(X)).sum(axis=1) + (dom.to_unit(X) ** 2).sum(axis=1)
    else:
        y = np.array([fn(x) for x in X])
    return gp.fit(X, y, dom, seed=seed)


@pytest.fixture
def gp2():
    return make_gp(2, 8, seed=3)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
