"""Random graph families: Erdős–Rényi, random intersection, percolated
d-regular, and Norros–Reittu with Pareto-quantile weights.

Every sampler is a pure function of its config and a ``numpy.random.Generator``.
Sparse samplers run in O(n + |E|) expected time; the ``*_dense`` variants do one
Bernoulli draw per vertex pair and serve as small-n correctness oracles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import IO, NamedTuple

import numpy as np

from .alias import AliasTable
from .exploration import Graph

MU_TOLERANCE = 1e-12
DENSE_LIMIT = 1000


# --------------------------------------------------------------------------
# configs


@dataclass(frozen=True)
class ErConfig:
    n: int
    p: float
    lam: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p={self.p} outside [0, 1]")

    @classmethod
    def critical(cls, n: int, lam: float = 0.0) -> "ErConfig":
        """``p = 1/n + lam * n^(-4/3)``, clamped to [0, 1]."""
        p = 1.0 / n + lam * n ** (-4.0 / 3.0)
        return cls(n, min(1.0, max(0.0, p)), lam)


@dataclass(frozen=True)
class IntersectionConfig:
    """Random intersection graph with ``m = floor(beta n)`` auxiliary vertices
    and vertex–auxiliary edge probability ``p = gamma / n`` (the alpha = 1 case)."""

    n: int
    beta: float
    gamma: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.beta <= 0 or self.gamma < 0:
            raise ValueError("beta must be positive and gamma non-negative")
        if self.p > 1:
            raise ValueError("gamma / n exceeds 1")

    @classmethod
    def explicit(cls, n: int, m: int, p: float) -> "IntersectionConfig":
        """Config with a given auxiliary count and edge probability (small tests)."""
        cfg = cls(n, m / n, p * n)
        if cfg.m != m:
            # floor(m/n * n) can round below m
            cfg = cls(n, math.nextafter(m / n, math.inf), p * n)
        return cfg

    @property
    def m(self) -> int:
        return int(math.floor(self.beta * self.n))

    @property
    def p(self) -> float:
        return self.gamma / self.n

    @property
    def mu(self) -> float:
        return self.beta * self.gamma**2

    @property
    def is_critical(self) -> bool:
        return abs(self.mu - 1.0) <= MU_TOLERANCE


BASES = ("circulant", "random-regular", "complete")


@dataclass(frozen=True)
class RegularPercolationConfig:
    """Bond percolation with retention probability ``p`` on a d-regular base.

    ``base_seed`` fixes the random-regular base; circulant and complete bases are
    deterministic.
    """

    d: int
    n: int
    p: float
    base: str = "circulant"
    base_seed: int = 0

    def __post_init__(self):
        if self.base not in BASES:
            raise ValueError(f"unknown base {self.base!r}; expected one of {BASES}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p={self.p} outside [0, 1]")
        _check_regular_feasible(self.d, self.n, self.base)


@dataclass(frozen=True, eq=False)
class NrConfig:
    """Norros–Reittu weights.

    ``weights`` is non-increasing. ``tau``, ``c_f`` and ``scale`` describe the
    Pareto-quantile family the weights came from; they are ``None`` for a
    custom weight vector.
    """

    weights: np.ndarray
    tau: float | None = None
    c_f: float | None = None
    scale: float | None = None
    l_n: float = field(init=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "l_n", float(w.sum()))

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def max_weight(self) -> float:
        return float(self.weights.max())

    @cached_property
    def alias(self) -> AliasTable:
        """Alias table for ``P(M = i) = w_i / l_n``."""
        return AliasTable(self.weights)

    def __eq__(self, other):
        if not isinstance(other, NrConfig):
            return NotImplemented
        return (self.tau, self.c_f, self.scale) == (other.tau, other.c_f, other.scale) and (
            np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        return hash((self.tau, self.c_f, self.scale, self.n, self.l_n))


# --------------------------------------------------------------------------
# shared sparse machinery


def _skip_positions(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted positions in ``range(total)`` kept by independent Bernoulli(p)
    trials, generated by geometric skipping."""
    if total <= 0 or p <= 0.0:
        return np.zeros(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    mean = total * p
    chunk = int(mean + 6.0 * math.sqrt(mean) + 16)
    out = []
    last = -1
    while True:
        gaps = rng.geometric(p, size=chunk)
        pos = last + np.cumsum(gaps)
        if pos[-1] >= total:
            out.append(pos[pos < total])
            break
        out.append(pos)
        last = int(pos[-1])
    return np.concatenate(out) if len(out) > 1 else out[0]


def _pair_from_index(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Invert the row-major enumeration of pairs ``i < j`` of ``range(n)``."""
    if idx.size == 0:
        return idx, idx
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * idx)) / 2).astype(np.int64)
    # the float estimate can be off by one either way
    i -= i * (b - i) // 2 > idx
    i += (i + 1) * (b - i - 1) // 2 <= idx
    offset = i * (b - i) // 2
    j = idx - offset + i + 1
    return i, j


def _all_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = np.triu_indices(n, k=1)
    return i.astype(np.int64), j.astype(np.int64)


# --------------------------------------------------------------------------
# Erdős–Rényi


def gen_er(config: ErConfig, rng: np.random.Generator) -> Graph:
    n = config.n
    total = n * (n - 1) // 2
    u, v = _pair_from_index(_skip_positions(total, config.p, rng), n)
    return Graph.from_edges(n, u, v, coalesce=False)


def gen_er_dense(config: ErConfig, rng: np.random.Generator) -> Graph:
    if config.n > DENSE_LIMIT:
        raise ValueError(f"dense sampler limited to n <= {DENSE_LIMIT}")
    u, v = _all_pairs(config.n)
    keep = rng.random(u.size) < config.p
    return Graph.from_edges(config.n, u[keep], v[keep], coalesce=False)


# --------------------------------------------------------------------------
# random intersection graph


class Bipartite(NamedTuple):
    """Vertex–auxiliary incidences, sorted by auxiliary then vertex."""

    n: int
    m: int
    aux: np.ndarray
    vertex: np.ndarray


def sample_bipartite(config: IntersectionConfig, rng: np.random.Generator) -> Bipartite:
    n, m = config.n, config.m
    pos = _skip_positions(n * m, config.p, rng)
    return Bipartite(n, m, pos // n, pos % n)


def project_bipartite(bip: Bipartite) -> tuple[np.ndarray, np.ndarray]:
    """Edges of the multigraph H: one copy of ``{v_i, v_j}`` per auxiliary
    adjacent to both. Coalescing the copies gives the intersection graph."""
    aux, vertex = bip.aux, bip.vertex
    if aux.size < 2:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    starts = np.flatnonzero(np.r_[True, aux[1:] != aux[:-1]])
    ends = np.r_[starts[1:], aux.size]
    group_end = np.repeat(ends, ends - starts)
    pos = np.arange(aux.size)
    # each incidence pairs with the later incidences of its auxiliary
    later = group_end - pos - 1
    left = np.repeat(pos, later)
    first = np.cumsum(later) - later
    right = left + 1 + np.arange(left.size) - np.repeat(first, later)
    return vertex[left], vertex[right]


def gen_intersection(config: IntersectionConfig, rng: np.random.Generator) -> Graph:
    u, v = project_bipartite(sample_bipartite(config, rng))
    return Graph.from_edges(config.n, u, v, coalesce=True)


# --------------------------------------------------------------------------
# percolation on d-regular graphs


def _check_regular_feasible(d: int, n: int, base: str) -> None:
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    if d >= n:
        raise ValueError(f"a simple {d}-regular graph needs more than {d} vertices (n={n})")
    if (n * d) % 2:
        raise ValueError(f"n * d must be even (n={n}, d={d})")
    if base == "complete" and d != n - 1:
        raise ValueError("complete base requires d = n - 1")


def circulant_base(d: int, n: int) -> Graph:
    """``i ~ i ± s (mod n)`` for ``s <= d // 2``, plus the antipodal chord when d is odd."""
    _check_regular_feasible(d, n, "circulant")
    if d == n - 1:
        return complete_base(n)
    i = np.arange(n, dtype=np.int64)
    us = [i for _ in range(1, d // 2 + 1)]
    vs = [(i + s) % n for s in range(1, d // 2 + 1)]
    if d % 2:
        half = np.arange(n // 2, dtype=np.int64)
        us.append(half)
        vs.append(half + n // 2)
    if not us:
        return Graph.empty(n)
    return Graph.from_edges(n, np.concatenate(us), np.concatenate(vs), coalesce=False)


def complete_base(n: int) -> Graph:
    u, v = _all_pairs(n)
    return Graph.from_edges(n, u, v, coalesce=False)


def random_regular_base(d: int, n: int, rng: np.random.Generator, max_tries: int = 100_000) -> Graph:
    """Uniform simple d-regular graph by configuration-model pairing, rejecting
    the whole pairing whenever it has a loop or a repeated edge."""
    _check_regular_feasible(d, n, "random-regular")
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    if stubs.size == 0:
        return Graph.empty(n)
    for _ in range(max_tries):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        a, b = pairs[:, 0], pairs[:, 1]
        if np.any(a == b):
            continue
        key = np.minimum(a, b) * n + np.maximum(a, b)
        if np.unique(key).size != key.size:
            continue
        return Graph.from_edges(n, a, b, coalesce=False)
    raise RuntimeError(f"no simple pairing found in {max_tries} attempts (d={d}, n={n})")


@lru_cache(maxsize=8)
def regular_base(config: RegularPercolationConfig) -> Graph:
    """The (cached) base graph described by ``config``."""
    if config.base == "complete":
        return complete_base(config.n)
    if config.base == "circulant":
        return circulant_base(config.d, config.n)
    rng = np.random.default_rng(np.random.SeedSequence(config.base_seed, spawn_key=(0xBA5E,)))
    return random_regular_base(config.d, config.n, rng)


def percolate(base: Graph, p: float, rng: np.random.Generator) -> Graph:
    u, v = base.edges()
    keep = rng.random(u.size) < p
    return Graph.from_edges(base.n, u[keep], v[keep], coalesce=False)


@lru_cache(maxsize=8)
def _base_edges(config: RegularPercolationConfig) -> tuple[np.ndarray, np.ndarray]:
    return regular_base(config).edges()


def gen_regular_percolation(config: RegularPercolationConfig, rng: np.random.Generator) -> Graph:
    u, v = _base_edges(config)
    keep = rng.random(u.size) < config.p
    return Graph.from_edges(config.n, u[keep], v[keep], coalesce=False)


# --------------------------------------------------------------------------
# Norros–Reittu


def pareto_scale(tau: float) -> float:
    """Scale ``a`` making the Pareto family critical (``E W^2 / E W = 1``)."""
    return (tau - 3.0) / (tau - 2.0)


def nr_weights(n: int, tau: float, scale: float | None = None) -> NrConfig:
    """Weights ``w_j = [1-F]^{-1}(j/n)`` for ``1 - F(x) = (x/a)^{-(tau-1)}``, x >= a.

    ``w_j = a (n/j)^{1/(tau-1)}`` for ``j < n`` and ``w_n = 0`` (the quantile at 1
    is 0 by convention). The default scale ``a = (tau-3)/(tau-2)`` is the
    critical one; ``c_f = a^(tau-1)`` gives ``1 - F(x) <= c_f x^{-(tau-1)}``.
    """
    if tau <= 4:
        raise ValueError(f"tau must exceed 4, got {tau}")
    if n < 1:
        raise ValueError("n must be positive")
    a = pareto_scale(tau) if scale is None else float(scale)
    if a <= 0:
        raise ValueError("scale must be positive")
    c_f = a ** (tau - 1.0)
    j = np.arange(1, n + 1, dtype=np.float64)
    # a (n/j)^{1/(tau-1)} written so that w_1 is bit-identical to (c_f n)^{1/(tau-1)}
    w = (c_f * n / j) ** (1.0 / (tau - 1.0))
    w[-1] = 0.0
    return NrConfig(w, tau=tau, c_f=c_f, scale=a)


class NuReport(NamedTuple):
    analytic: float | None
    empirical: float


def pareto_nu(tau: float, scale: float) -> float:
    """``E(W^2)/E(W)`` for the Pareto law with index ``tau - 1`` and scale ``a``.

    ``E W = a (tau-1)/(tau-2)`` and ``E W^2 = a^2 (tau-1)/(tau-3)``.
    """
    return scale * (tau - 2.0) / (tau - 3.0)


def nr_nu(config: NrConfig) -> NuReport:
    w = config.weights
    empirical = float(np.dot(w, w) / config.l_n)
    analytic = None
    if config.tau is not None and config.scale is not None:
        analytic = pareto_nu(config.tau, config.scale)
    return NuReport(analytic, empirical)


def nr_edge_probabilities(config: NrConfig, u, v) -> np.ndarray:
    w = config.weights
    return -np.expm1(-w[np.asarray(u)] * w[np.asarray(v)] / config.l_n)


def gen_nr(config: NrConfig, rng: np.random.Generator) -> Graph:
    """Sample NR_n(w) as the simple projection of a Poisson multigraph.

    Drawing ``Poisson(l_n / 2)`` ordered pairs with both ends chosen in
    proportion to weight puts ``Poisson(w_i w_j / l_n)`` copies on each pair
    ``{i, j}``, independently across pairs; the pair is an edge iff at least one
    copy lands, i.e. with probability ``1 - exp(-w_i w_j / l_n)``.
    """
    n = config.n
    if config.l_n <= 0:
        raise ValueError("all weights are zero")
    draws = rng.poisson(config.l_n / 2.0)
    table = config.alias
    u = table.sample(rng, draws)
    v = table.sample(rng, draws)
    keep = u != v
    return Graph.from_edges(n, u[keep], v[keep], coalesce=True)


def gen_nr_dense(config: NrConfig, rng: np.random.Generator) -> Graph:
    if config.n > DENSE_LIMIT:
        raise ValueError(f"dense sampler limited to n <= {DENSE_LIMIT}")
    u, v = _all_pairs(config.n)
    keep = rng.random(u.size) < nr_edge_probabilities(config, u, v)
    return Graph.from_edges(config.n, u[keep], v[keep], coalesce=False)


# --------------------------------------------------------------------------
# dispatch and I/O

ModelConfig = ErConfig | IntersectionConfig | RegularPercolationConfig | NrConfig

MODEL_NAMES = {
    ErConfig: "er",
    IntersectionConfig: "intersection",
    RegularPercolationConfig: "regular",
    NrConfig: "nr",
}


def model_name(config) -> str:
    try:
        return MODEL_NAMES[type(config)]
    except KeyError:
        raise TypeError(f"not a model config: {config!r}") from None


def generate(config, rng: np.random.Generator) -> Graph:
    """Sample one graph for any of the four model configs."""
    if isinstance(config, ErConfig):
        return gen_er(config, rng)
    if isinstance(config, IntersectionConfig):
        return gen_intersection(config, rng)
    if isinstance(config, RegularPercolationConfig):
        return gen_regular_percolation(config, rng)
    if isinstance(config, NrConfig):
        return gen_nr(config, rng)
    raise TypeError(f"not a model config: {config!r}")


def model_params(config) -> dict:
    """Flat parameter dict used in reports and CSV output."""
    if isinstance(config, ErConfig):
        return {"n": config.n, "p": config.p, "lambda": config.lam}
    if isinstance(config, IntersectionConfig):
        return {"n": config.n, "beta": config.beta, "gamma": config.gamma, "m": config.m, "mu": config.mu}
    if isinstance(config, RegularPercolationConfig):
        return {"n": config.n, "d": config.d, "p": config.p, "base": config.base, "base_seed": config.base_seed}
    if isinstance(config, NrConfig):
        return {"n": config.n, "tau": config.tau, "c_f": config.c_f, "scale": config.scale}
    raise TypeError(f"not a model config: {config!r}")


def write_edgelist(graph: Graph, fh: IO[str]) -> None:
    """Write ``# n=<n>`` then one 1-based ``u v`` line per edge."""
    u, v = graph.edges()
    fh.write(f"# n={graph.n}\n")
    for a, b in zip((u + 1).tolist(), (v + 1).tolist()):
        fh.write(f"{a} {b}\n")


def read_edgelist(fh: IO[str], n: int | None = None) -> Graph:
    """Read the format of :func:`write_edgelist`. Without a ``# n=`` header or
    an explicit ``n`` the vertex count is the largest label."""
    us, vs = [], []
    header_n = None
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("n="):
                header_n = int(body[2:])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {line!r}")
        a, b = int(parts[0]), int(parts[1])
        if a < 1 or b < 1:
            raise ValueError(f"line {lineno}: labels are 1-based")
        us.append(a - 1)
        vs.append(b - 1)
    if n is None:
        n = header_n if header_n is not None else (max(max(us), max(vs)) + 1 if us else 1)
    return Graph.from_edges(n, us, vs, coalesce=True)
