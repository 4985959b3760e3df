import numpy as np
import pytest
from conftest import small_graphs, union_find_sizes
from hypothesis import given, settings

from critgraphs.exploration import (
    Graph,
    component_sizes,
    component_sizes_bfs,
    explore,
    largest_component_size,
)


def naive_explore(adj, start, sweep=False):
    """Set-based restatement of the process, used as a reference."""
    n = len(adj)
    unseen = set(range(n))
    active = set()
    eta, ys, sizes = [], [], []
    if not adj[start]:
        sizes.append(1)
        if not sweep:
            return eta, ys, sizes
        unseen.discard(start)
        y, comp = 0, 0
        ys.append(0)
    else:
        first = min(adj[start])
        active = {start, first}
        unseen -= active
        y, comp = 2, 0
        ys.append(2)
    while unseen or active:
        if active:
            u = min(active)
            active.remove(u)
            new = {w for w in adj[u] if w in unseen}
            unseen -= new
            active |= new
            comp += 1
            y = y + len(new) - 1
            eta.append(len(new))
            ys.append(y)
            continue
        if comp:
            sizes.append(comp)
            comp = 0
        if not sweep:
            return eta, ys, sizes
        u = min(unseen)
        unseen.remove(u)
        if not adj[u]:
            eta.append(0)
            ys.append(0)
            comp = 1
            continue
        v = min(adj[u])
        new = {w for w in adj[u] if w in unseen}
        unseen -= new
        active |= new
        comp += 1
        y = len(new)
        eta.append(len(new))
        ys.append(y)
        assert v in new
    if comp:
        sizes.append(comp)
    return eta, ys, sizes


@settings(max_examples=1000, deadline=None)
@given(small_graphs())
def test_sweep_matches_bfs_and_reference(g):
    sizes_uf, _ = union_find_sizes(g.n, zip(*[x.tolist() for x in g.edges()]))
    assert component_sizes_bfs(g) == sizes_uf
    assert component_sizes(g).tolist() == sizes_uf
    trace = explore(g, 0, sweep=True)
    assert sorted(trace.component_sizes, reverse=True) == sizes_uf
    assert not trace.truncated
    eta, ys, sizes = naive_explore(g.adjacency(), 0, sweep=True)
    assert (trace.eta, trace.active, trace.component_sizes) == (eta, ys, sizes)


@settings(max_examples=300, deadline=None)
@given(small_graphs())
def test_single_component_run(g):
    _, find = union_find_sizes(g.n, zip(*[x.tolist() for x in g.edges()]))
    start = g.n // 2
    trace = explore(g, start)
    own = sum(1 for x in range(g.n) if find(x) == find(start))
    assert trace.start_component_size == own
    assert trace.start_component_exceeds(own - 1) and not trace.start_component_exceeds(own)
    if own == 1:
        assert trace.halted_isolated and trace.steps == 0
    else:
        # one vertex explored per step, Y_t > 0 until the last step
        assert trace.steps == own
        assert all(y > 0 for y in trace.active[:-1]) and trace.active[-1] == 0
    assert (trace.eta, trace.active) == naive_explore(g.adjacency(), start)[:2]


@settings(max_examples=300, deadline=None)
@given(small_graphs())
def test_walk_recursion(g):
    trace = explore(g, 0, sweep=True)
    for t, e in enumerate(trace.eta, 1):
        prev = trace.active[t - 1]
        assert trace.active[t] == (prev + e - 1 if prev > 0 else e)
    assert sum(trace.component_sizes) == g.n


@settings(max_examples=200, deadline=None)
@given(small_graphs(max_n=30))
def test_truncated_run_decides_threshold(g):
    full = explore(g, 0)
    size = full.start_component_size
    for k in (1, 2, 5):
        cut = explore(g, 0, max_steps=k)
        assert cut.start_component_exceeds(k) == (size > k)
        assert cut.eta == full.eta[:k]


def test_triangle():
    g = Graph.from_edges(3, [0, 1, 0], [1, 2, 2])
    tr = explore(g, 0)
    # start and vertex 1 active; exploring 0 adds 2; then nothing new
    assert tr.eta == [1, 0, 0]
    assert tr.active == [2, 2, 1, 0]
    assert tr.component_sizes == [3]


def test_isolated_start_and_sweep():
    g = Graph.from_edges(4, [1], [2])
    tr = explore(g, 0)
    assert tr.halted_isolated and tr.component_sizes == [1] and tr.eta == []
    sw = explore(g, 0, sweep=True)
    assert sw.component_sizes == [1, 2, 1]
    assert sw.active[0] == 0


def test_max_steps_marks_truncation():
    g = Graph.from_edges(5, [0, 1, 2, 3], [1, 2, 3, 4])
    tr = explore(g, 0, max_steps=2)
    assert tr.truncated and tr.steps == 2 and tr.component_sizes == []
    with pytest.raises(ValueError):
        explore(g, 0, max_steps=0)
    with pytest.raises(IndexError):
        explore(g, 5)


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [0], [0])
    with pytest.raises(ValueError):
        Graph.from_edges(3, [0], [3])
    g = Graph.from_edges(3, [0, 1, 1], [1, 0, 2])
    assert g.num_edges == 2
    g.check()
    assert g.adjacency() == [[1], [0, 2], [1]]
    assert Graph.from_adjacency([[1], [0, 2], [1]]).adjacency() == g.adjacency()


def test_scipy_and_bfs_agree_on_large_graph():
    rng = np.random.default_rng(5)
    n = 2000
    u = rng.integers(0, n, 1500)
    v = rng.integers(0, n, 1500)
    keep = u != v
    g = Graph.from_edges(n, u[keep], v[keep])
    assert component_sizes(g).tolist() == component_sizes_bfs(g)
    assert largest_component_size(g) == component_sizes_bfs(g)[0]
    assert component_sizes(Graph.empty(4)).tolist() == [1, 1, 1, 1]
