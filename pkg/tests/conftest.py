import numpy as np
import pytest
from hypothesis import strategies as st

from critgraphs.exploration import Graph


@st.composite
def small_graphs(draw, max_n=50):
    n = draw(st.integers(1, max_n))
    density = draw(st.floats(0.0, 1.0))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    # skew towards sparse graphs so that many components appear
    p = density**3
    u, v = np.triu_indices(n, 1)
    keep = rng.random(u.size) < p
    return Graph.from_edges(n, u[keep], v[keep])


def union_find_sizes(n, edges):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    counts = {}
    for x in range(n):
        r = find(x)
        counts[r] = counts.get(r, 0) + 1
    return sorted(counts.values(), reverse=True), find


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
