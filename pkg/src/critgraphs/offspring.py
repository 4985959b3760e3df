"""Dominating offspring laws for the exploration increments.

Each law exposes exact ``pmf``, log-space ``log_mgf``/``mgf``, and vectorised
``sample``. The model-to-law map is:

* Erdős–Rényi: ``Bin(n-1, p)``
* random intersection: compound binomial, a ``Bin(m, p)`` number of
  independent ``Bin(n-1, p)`` terms (degree law of the multigraph H)
* percolated d-regular: ``Bin(d-1, p)``
* Norros–Reittu: ``Poi(w_M)`` with ``P(M = i) = w_i / l_n``
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.stats import binom

from .alias import AliasTable
from .models import ErConfig, IntersectionConfig, NrConfig, RegularPercolationConfig, nr_weights


class Offspring(ABC):
    """A law on the non-negative integers."""

    @abstractmethod
    def pmf(self, j: int) -> float: ...

    @abstractmethod
    def log_mgf(self, r): ...

    @abstractmethod
    def sample(self, rng: np.random.Generator, size=None): ...

    @property
    @abstractmethod
    def mean(self) -> float: ...

    @property
    @abstractmethod
    def variance(self) -> float: ...

    def mgf(self, r):
        return np.exp(self.log_mgf(r))

    def p3(self) -> float:
        """``P(X = 3)``."""
        return self.pmf(3)

    def pmf_table(self, upto: int) -> np.ndarray:
        return np.array([self.pmf(j) for j in range(upto + 1)])

    def support_bound(self, sds: float = 20.0) -> int:
        """``ceil(mean + sds * sd)``; the mass beyond it is negligible."""
        return int(math.ceil(self.mean + sds * math.sqrt(self.variance)))

    def finite_support(self) -> tuple[list[int], list]:
        """Support points and probabilities, for laws with finite support."""
        raise NotImplementedError(f"{type(self).__name__} has unbounded support")


@dataclass(frozen=True)
class Binomial(Offspring):
    trials: int
    p: float

    def __post_init__(self):
        if self.trials < 0 or not 0.0 <= self.p <= 1.0:
            raise ValueError(f"invalid binomial parameters ({self.trials}, {self.p})")

    def pmf(self, j: int) -> float:
        if j < 0 or j > self.trials:
            return 0.0
        return float(binom.pmf(j, self.trials, self.p))

    def log_mgf(self, r):
        return self.trials * np.log1p(self.p * np.expm1(r))

    def sample(self, rng, size=None):
        return rng.binomial(self.trials, self.p, size=size)

    @property
    def mean(self) -> float:
        return self.trials * self.p

    @property
    def variance(self) -> float:
        return self.trials * self.p * (1.0 - self.p)

    def finite_support(self):
        return list(range(self.trials + 1)), [self.pmf(j) for j in range(self.trials + 1)]


def _poly_mul(a: np.ndarray, b: np.ndarray, degree: int) -> np.ndarray:
    return np.convolve(a, b)[: degree + 1]


def _poly_pow(base: np.ndarray, power: int, degree: int) -> np.ndarray:
    result = np.zeros(degree + 1)
    result[0] = 1.0
    while power:
        if power & 1:
            result = _poly_mul(result, base, degree)
        power >>= 1
        if power:
            base = _poly_mul(base, base, degree)
    return result


@dataclass(frozen=True)
class CompoundBinomial(Offspring):
    """Sum of ``K ~ Bin(m, p)`` independent ``Bin(n-1, p)`` variables.

    Probability generating function ``{1 - p + p (1 - p + p s)^(n-1)}^m``.
    """

    m: int
    p: float
    n: int

    def __post_init__(self):
        if self.m < 0 or self.n < 1 or not 0.0 <= self.p <= 1.0:
            raise ValueError("invalid compound binomial parameters")

    def pmf_table(self, upto: int) -> np.ndarray:
        """Exact ``P(X = j)`` for ``j <= upto`` by truncated power-series
        arithmetic on the generating function."""
        inner = np.zeros(upto + 1)
        inner_law = Binomial(self.n - 1, self.p)
        for j in range(min(upto, self.n - 1) + 1):
            inner[j] = inner_law.pmf(j)
        outer = self.p * inner
        outer[0] += 1.0 - self.p
        return _poly_pow(outer, self.m, upto)

    def pmf(self, j: int) -> float:
        if j < 0:
            return 0.0
        return float(self.pmf_table(j)[j])

    def log_mgf(self, r):
        inner = (self.n - 1) * np.log1p(self.p * np.expm1(r))
        return self.m * np.log1p(self.p * np.expm1(inner))

    def sample(self, rng, size=None):
        k = rng.binomial(self.m, self.p, size=size)
        # a sum of k independent Bin(n-1, p) terms is Bin(k (n-1), p)
        return rng.binomial(k * (self.n - 1), self.p)

    @property
    def mean(self) -> float:
        return self.m * self.p * (self.n - 1) * self.p

    @property
    def variance(self) -> float:
        inner_mean = (self.n - 1) * self.p
        inner_var = inner_mean * (1.0 - self.p)
        k_mean = self.m * self.p
        k_var = k_mean * (1.0 - self.p)
        return k_mean * inner_var + k_var * inner_mean**2


class MixedPoisson(Offspring):
    """``Poi(w_M)`` with ``P(M = i) = w_i / sum(w)``."""

    def __init__(self, weights, alias: AliasTable | None = None):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0 or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be non-negative with positive sum")
        self.weights = w
        self.l_n = float(w.sum())
        pos = w[w > 0]
        self._w = pos
        self._log_mix = np.log(pos) - math.log(self.l_n)
        self._alias = alias if alias is not None else AliasTable(w)

    def __repr__(self):
        return f"MixedPoisson(n={self.weights.size}, l_n={self.l_n:.6g})"

    def pmf(self, j: int) -> float:
        if j < 0:
            return 0.0
        w = self._w
        return float(np.exp(logsumexp(self._log_mix - w + j * np.log(w) - gammaln(j + 1))))

    def log_mgf(self, r):
        mix = np.exp(self._log_mix)

        # log sum_i (w_i/l_n) e^{w_i (e^r - 1)}, kept accurate near r = 0
        def one(x):
            return math.log1p(float(np.dot(mix, np.expm1(self._w * math.expm1(x)))))

        if np.ndim(r) == 0:
            return one(float(r))
        return np.array([one(x) for x in np.asarray(r, dtype=np.float64).ravel()]).reshape(np.shape(r))

    def sample(self, rng, size=None):
        return rng.poisson(self.weights[self._alias.sample(rng, size)])

    @property
    def mean(self) -> float:
        return float(np.dot(self.weights, self.weights) / self.l_n)

    @property
    def variance(self) -> float:
        w = self.weights
        second = float(np.sum(w**3) / self.l_n) + self.mean
        return second - self.mean**2


class Finite(Offspring):
    """Explicit finite law on non-negative integers.

    Probabilities may be ``Fraction`` for exact arithmetic in the walk
    verifiers; sampling and the MGF always use floats.
    """

    def __init__(self, law: Mapping[int, float | Fraction]):
        items = sorted((int(k), v) for k, v in law.items() if v != 0)
        if not items:
            raise ValueError("empty law")
        if items[0][0] < 0:
            raise ValueError("offspring values must be non-negative")
        if any(v < 0 for _, v in items):
            raise ValueError("negative probability")
        total = sum(v for _, v in items)
        exact = all(isinstance(v, (int, Fraction)) for _, v in items)
        if (exact and total != 1) or (not exact and abs(total - 1.0) > 1e-12):
            raise ValueError(f"probabilities sum to {total}, not 1")
        self.values = [k for k, _ in items]
        self.probs = [v for _, v in items]
        self._values = np.array(self.values, dtype=np.float64)
        self._probs = np.array([float(v) for v in self.probs])
        self._cdf = np.cumsum(self._probs)
        self._cdf[-1] = 1.0

    @classmethod
    def from_steps(cls, steps: Mapping[int, float | Fraction]) -> "Finite":
        """Offspring law ``X = W + 1`` for a step law with support ``>= -1``."""
        return cls({w + 1: q for w, q in steps.items()})

    def __repr__(self):
        return f"Finite({dict(zip(self.values, self.probs))})"

    def pmf(self, j: int):
        try:
            return self.probs[self.values.index(j)]
        except ValueError:
            return 0.0

    def log_mgf(self, r):
        r = np.asarray(r, dtype=np.float64)
        shift = self._values.max()
        # factor out the largest exponent so nothing overflows
        return shift * r + np.log(np.sum(self._probs * np.exp(np.multiply.outer(r, self._values - shift)), axis=-1))

    def sample(self, rng, size=None):
        u = rng.random(size)
        return np.asarray(self._values, dtype=np.int64)[np.searchsorted(self._cdf, u, side="right")]

    @property
    def mean(self) -> float:
        return float(np.dot(self._values, self._probs))

    @property
    def variance(self) -> float:
        return float(np.dot(self._values**2, self._probs)) - self.mean**2

    def finite_support(self):
        return list(self.values), list(self.probs)


# --------------------------------------------------------------------------
# model laws


def offspring_for(config) -> Offspring:
    """The dominating law for a model config at its own parameters."""
    if isinstance(config, ErConfig):
        return Binomial(config.n - 1, config.p)
    if isinstance(config, IntersectionConfig):
        return CompoundBinomial(config.m, config.p, config.n)
    if isinstance(config, RegularPercolationConfig):
        return Binomial(config.d - 1, config.p)
    if isinstance(config, NrConfig):
        return MixedPoisson(config.weights, alias=config.alias)
    raise TypeError(f"not a model config: {config!r}")


def regular_p3_closed_form(d: int) -> float:
    """``P(Bin(d-1, 1/(d-1)) = 3) = (d-2)(d-3) / (6 (d-1)^2) * (1 - 1/(d-1))^(d-4)``."""
    if d < 2:
        raise ValueError("d must be at least 2")
    return (d - 2) * (d - 3) / (6.0 * (d - 1) ** 2) * (1.0 - 1.0 / (d - 1)) ** (d - 4)


def nr_p3_proxy(weights) -> float:
    """Half of the finite-n ``P(Poi(W_n*) = 3)``, i.e. ``E(e^{-W*} W*^3) / 12``
    with ``W*`` the size-biased empirical weight."""
    w = np.asarray(weights, dtype=np.float64)
    return float(np.sum(w * np.exp(-w) * w**3) / w.sum() / 12.0)


# --------------------------------------------------------------------------
# size-biased weights


class SizeBiasedView(NamedTuple):
    mean: float
    second_moment: float


def size_biased_moments(weights) -> SizeBiasedView:
    """``E(W_n*) = sum w^2 / sum w`` and ``E(W_n*^2) = sum w^3 / sum w``."""
    w = np.asarray(weights, dtype=np.float64)
    total = w.sum()
    if total <= 0:
        raise ValueError("all weights are zero")
    return SizeBiasedView(float(np.dot(w, w) / total), float(np.sum(w**3) / total))


@dataclass
class WeightSequenceRow:
    n: int
    max_weight: float
    max_weight_bound: float
    max_weight_ok: bool
    mean: float
    second_moment: float
    rate: float  # n^{(tau-3)/(tau-1)} |1 - E(W_n*)|


@dataclass
class WeightSequenceReport:
    tau: float
    c_f: float
    rows: list[WeightSequenceRow]

    @property
    def max_weight_ok(self) -> bool:
        return all(r.max_weight_ok for r in self.rows)

    @property
    def c1_estimate(self) -> float:
        return max(r.second_moment for r in self.rows)

    @property
    def c2_estimate(self) -> float:
        return max(r.rate for r in self.rows)

    def stays_bounded(self, factor: float = 2.0) -> bool:
        """Rate and second moment never exceed ``factor`` times their value at
        the smallest ``n`` of the grid."""
        first = self.rows[0]
        return all(r.rate <= factor * first.rate and r.second_moment <= factor * first.second_moment for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "c_f": self.c_f,
            "max_weight_ok": self.max_weight_ok,
            "stays_bounded": self.stays_bounded(),
            "c1_estimate": self.c1_estimate,
            "c2_estimate": self.c2_estimate,
            "rows": [vars(r) for r in self.rows],
        }


DEFAULT_WEIGHT_GRID = (1_000, 10_000, 100_000, 1_000_000)


def verify_weight_sequence(tau: float, n_grid: Sequence[int] = DEFAULT_WEIGHT_GRID, scale: float | None = None) -> WeightSequenceReport:
    """Measure the weight-sequence constants for the Pareto-quantile family.

    For each ``n`` checks ``max w_i <= (c_F n)^{1/(tau-1)}`` and records
    ``E(W_n*^2)`` and ``n^{(tau-3)/(tau-1)} |1 - E(W_n*)|``; their suprema over
    the grid are finite-n stand-ins for the existence constants. Failures are
    reported in the rows, never raised.
    """
    rows = []
    c_f = None
    for n in sorted(set(int(x) for x in n_grid)):
        cfg = nr_weights(n, tau, scale)
        c_f = cfg.c_f
        bound = (cfg.c_f * n) ** (1.0 / (tau - 1.0))
        sb = size_biased_moments(cfg.weights)
        ok = cfg.max_weight <= bound
        rows.append(
            WeightSequenceRow(
                n=n,
                max_weight=cfg.max_weight,
                max_weight_bound=bound,
                max_weight_ok=bool(ok),
                mean=sb.mean,
                second_moment=sb.second_moment,
                rate=n ** ((tau - 3.0) / (tau - 1.0)) * abs(1.0 - sb.mean),
            )
        )
    return WeightSequenceReport(tau=tau, c_f=c_f, rows=rows)


# name used by the documented interface
verify_lemma2 = verify_weight_sequence
