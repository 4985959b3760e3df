import io
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critgraphs.models import (
    Bipartite,
    ErConfig,
    IntersectionConfig,
    NrConfig,
    RegularPercolationConfig,
    _pair_from_index,
    circulant_base,
    gen_er,
    gen_er_dense,
    gen_intersection,
    gen_nr,
    gen_nr_dense,
    generate,
    model_name,
    nr_edge_probabilities,
    nr_nu,
    nr_weights,
    project_bipartite,
    random_regular_base,
    read_edgelist,
    regular_base,
    write_edgelist,
)


def pair_frequencies(sampler, config, n, reps, seed):
    rng = np.random.default_rng(seed)
    counts = np.zeros((n, n))
    edges = []
    for _ in range(reps):
        g = sampler(config, rng)
        u, v = g.edges()
        counts[u, v] += 1
        edges.append(u.size)
    return counts / reps, np.array(edges)


def assert_marginals(freq, probs, reps, z=5.0):
    n = freq.shape[0]
    for i, j in itertools.combinations(range(n), 2):
        p = probs(i, j)
        se = math.sqrt(max(p * (1 - p), 1e-12) / reps)
        assert abs(freq[i, j] - p) <= z * se + 1e-12, (i, j, freq[i, j], p)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 50, 1001])
def test_pair_index_inversion(n):
    total = n * (n - 1) // 2
    idx = np.arange(total, dtype=np.int64)
    i, j = _pair_from_index(idx, n)
    ref_i, ref_j = np.triu_indices(n, 1)
    assert np.array_equal(i, ref_i) and np.array_equal(j, ref_j)


@pytest.mark.parametrize("sampler", [gen_er, gen_er_dense])
def test_er_pair_marginals(sampler):
    cfg = ErConfig(6, 0.3)
    reps = 20000
    freq, m = pair_frequencies(sampler, cfg, 6, reps, 1)
    assert_marginals(freq, lambda i, j: 0.3, reps)
    mean = 15 * 0.3
    assert abs(m.mean() - mean) <= 5 * math.sqrt(15 * 0.3 * 0.7 / reps)


def test_er_edge_count_large():
    cfg = ErConfig.critical(100_000)
    rng = np.random.default_rng(2)
    counts = [gen_er(cfg, rng).num_edges for _ in range(20)]
    total = 100_000 * 99_999 / 2
    mean = total * cfg.p
    sd = math.sqrt(total * cfg.p * (1 - cfg.p) / 20)
    assert abs(np.mean(counts) - mean) <= 5 * sd


def test_er_extremes():
    rng = np.random.default_rng(0)
    assert gen_er(ErConfig(10, 0.0), rng).num_edges == 0
    assert gen_er(ErConfig(10, 1.0), rng).num_edges == 45
    with pytest.raises(ValueError):
        ErConfig(5, 1.5)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31))
def test_projection_matches_enumeration(n, m, seed):
    rng = np.random.default_rng(seed)
    member = rng.random((m, n)) < 0.4
    aux, vertex = np.nonzero(member)
    u, v = project_bipartite(Bipartite(n, m, aux, vertex))
    got = sorted(zip(np.minimum(u, v).tolist(), np.maximum(u, v).tolist()))
    want = sorted(
        (i, j) for a in range(m) for i, j in itertools.combinations(range(n), 2) if member[a, i] and member[a, j]
    )
    assert got == want


def test_intersection_pair_marginals():
    cfg = IntersectionConfig.explicit(5, 3, 0.4)
    assert cfg.m == 3
    reps = 20000
    freq, _ = pair_frequencies(gen_intersection, cfg, 5, reps, 3)
    p_share = 1 - (1 - 0.4**2) ** 3
    assert_marginals(freq, lambda i, j: p_share, reps)


def test_intersection_config():
    cfg = IntersectionConfig(1000, 1.0, 1.0)
    assert cfg.m == 1000 and cfg.p == pytest.approx(1e-3) and cfg.is_critical
    assert not IntersectionConfig(1000, 2.0, 1.0).is_critical
    for n, m in [(3, 1), (7, 3), (10, 7)]:
        assert IntersectionConfig.explicit(n, m, 0.1).m == m


@pytest.mark.parametrize("d,n", [(2, 5), (3, 8), (4, 9), (5, 12), (6, 13), (4, 1000)])
def test_circulant_is_regular(d, n):
    g = circulant_base(d, n)
    g.check()
    assert np.all(g.degrees() == d)


@pytest.mark.parametrize("d,n", [(3, 10), (4, 1000), (5, 200)])
def test_random_regular_is_simple_and_regular(d, n):
    g = random_regular_base(d, n, np.random.default_rng(9))
    g.check()
    assert np.all(g.degrees() == d)
    assert g.num_edges == d * n // 2


def test_regular_base_reproducible():
    a = RegularPercolationConfig(4, 500, 1.0, base="random-regular", base_seed=3)
    g1 = regular_base(a)
    g2 = random_regular_base(4, 500, np.random.default_rng(np.random.SeedSequence(3, spawn_key=(0xBA5E,))))
    assert all(np.array_equal(x, y) for x, y in zip(g1.edges(), g2.edges()))


def test_percolation_trivial_cases():
    rng = np.random.default_rng(0)
    g = generate(RegularPercolationConfig(2, 5, 1.0), rng)
    assert g.num_edges == 5
    assert generate(RegularPercolationConfig(4, 20, 0.0), rng).num_edges == 0
    k4 = generate(RegularPercolationConfig(3, 4, 1.0, base="complete"), rng)
    assert k4.num_edges == 6
    with pytest.raises(ValueError):
        RegularPercolationConfig(3, 5, 0.5)
    with pytest.raises(ValueError):
        RegularPercolationConfig(3, 6, 0.5, base="complete")


def test_percolation_edge_count():
    cfg = RegularPercolationConfig(4, 10_000, 1 / 3)
    rng = np.random.default_rng(4)
    counts = [generate(cfg, rng).num_edges for _ in range(30)]
    total = 20_000
    assert abs(np.mean(counts) - total / 3) <= 5 * math.sqrt(total * (2 / 9) / 30)


def test_nr_weights():
    cfg = nr_weights(4, 5)
    assert np.allclose(cfg.weights, [0.94280904, 0.79280474, 0.71637995, 0.0])
    big = nr_weights(10_000, 5)
    assert np.all(np.diff(big.weights) <= 0)
    assert big.max_weight == (big.c_f * 10_000) ** 0.25
    for tau in (4.5, 5.0, 6.0):
        assert abs(nr_nu(nr_weights(100, tau)).analytic - 1.0) <= 1e-12
    with pytest.raises(ValueError):
        nr_weights(10, 4.0)


@pytest.mark.parametrize("sampler", [gen_nr, gen_nr_dense])
def test_nr_pair_marginals(sampler):
    cfg = NrConfig(np.array([3.0, 2.0, 1.5, 1.0, 0.5]))
    reps = 20000
    freq, _ = pair_frequencies(sampler, cfg, 5, reps, 6)
    assert_marginals(freq, lambda i, j: float(nr_edge_probabilities(cfg, [i], [j])[0]), reps)


def test_nr_edge_count():
    cfg = nr_weights(50_000, 5)
    rng = np.random.default_rng(8)
    counts = [generate(cfg, rng).num_edges for _ in range(10)]
    # expected number of edges, summed exactly over pairs in blocks
    w = cfg.weights
    expected = 0.0
    for lo in range(0, w.size, 2000):
        block = -np.expm1(-np.outer(w[lo : lo + 2000], w) / cfg.l_n)
        rows = np.arange(lo, min(lo + 2000, w.size))
        block[np.arange(rows.size), rows] = 0.0
        expected += block.sum() / 2
    assert abs(np.mean(counts) - expected) <= 5 * math.sqrt(expected / 10)


@pytest.mark.parametrize(
    "config",
    [
        ErConfig.critical(3000),
        IntersectionConfig(3000, 1.0, 1.0),
        RegularPercolationConfig(4, 3000, 1 / 3, base="random-regular"),
        nr_weights(3000, 5),
    ],
)
def test_determinism_and_simplicity(config):
    g1 = generate(config, np.random.default_rng(11))
    g2 = generate(config, np.random.default_rng(11))
    g1.check()
    assert all(np.array_equal(x, y) for x, y in zip(g1.edges(), g2.edges()))
    assert model_name(config) in ("er", "intersection", "regular", "nr")


def test_edgelist_round_trip():
    g = generate(ErConfig(30, 0.1), np.random.default_rng(1))
    buf = io.StringIO()
    write_edgelist(g, buf)
    text = buf.getvalue()
    assert text.startswith("# n=30\n")
    back = read_edgelist(io.StringIO(text))
    assert back.n == 30
    assert all(np.array_equal(x, y) for x, y in zip(g.edges(), back.edges()))
    with pytest.raises(ValueError):
        read_edgelist(io.StringIO("0 1\n"))
