import numpy as np
import pytest
from hypothesis import strategies as st

from rsbm.blocks import Partition
from rsbm.graph import from_edges


def random_graph(rng, n, m, loops=True):
    u = rng.integers(n, size=m)
    v = rng.integers(n, size=m)
    if not loops:
        keep = u != v
        u, v = u[keep], v[keep]
    return from_edges(np.column_stack([u, v]), node_count=n)


@st.composite
def graph_and_partition(draw, max_nodes=9, max_edges=20, max_blocks=3, loops=True):
    n = draw(st.integers(2, max_nodes))
    e = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                      min_size=1, max_size=max_edges))
    if not loops:
        e = [x for x in e if x[0] != x[1]] or [(0, 1)]
    B = draw(st.integers(1, max_blocks))
    a = draw(st.lists(st.integers(0, B - 1), min_size=n, max_size=n))
    return from_edges(e, node_count=n), Partition(a, B)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ----------------------------------------------- acceptance report lines

import time as _time

SESSION_START = _time.perf_counter()
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
