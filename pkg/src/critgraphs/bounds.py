"""Tail bound for the largest component from a dominating offspring law.

If i.i.d. ``X_i`` dominate the exploration increments, satisfy
``E e^{r X} <= exp(r (1 + eps) + delta r^2)`` for ``r in (0, rho)``, and ``k``
satisfies ``eps sqrt(k) <= c`` and ``rho sqrt(k) >= 1``, then

    P(|C_max| > k) <= C / P(X = 3) * n / k^{3/2},   C = 1 + 3 e^{delta + 2c - 1}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .models import ErConfig, IntersectionConfig, NrConfig, RegularPercolationConfig
from .offspring import Binomial, Offspring, offspring_for, verify_weight_sequence

# relative slack for "p <= 1/(d-1)" when p is typed as a decimal
_P_SLACK = 1e-12


class InadmissibleParameters(ValueError):
    """The model is outside the parameter range where the bound is certified."""


@dataclass(frozen=True)
class BoundParams:
    delta: float
    rho: float
    epsilon: float
    c_precondition: float
    p3: float
    notes: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.delta <= 0 or self.rho <= 0:
            raise ValueError("delta and rho must be positive")
        if self.epsilon < 0 or self.c_precondition < 0:
            raise ValueError("epsilon and c must be non-negative")
        if not 0 < self.p3 <= 1:
            raise ValueError(f"P(X = 3) = {self.p3} is not in (0, 1]")

    @property
    def C(self) -> float:
        return 1.0 + 3.0 * math.exp(self.delta + 2.0 * self.c_precondition - 1.0)

    def with_c(self, c: float) -> "BoundParams":
        return BoundParams(self.delta, self.rho, self.epsilon, c, self.p3, self.notes)

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "rho": self.rho,
            "epsilon": self.epsilon,
            "c": self.c_precondition,
            "p3": self.p3,
            "C": self.C,
            **self.notes,
        }


def _weight_grid(n: int) -> list[int]:
    return sorted({1_000, 10_000, 100_000, 1_000_000, n})


def derive_params(config, c: float | None = None) -> BoundParams:
    """Certified ``(delta, rho, eps)`` and exact ``P(X = 3)`` for a model.

    ``c`` defaults to 0 when ``eps = 0`` and to 1 otherwise.
    """
    if isinstance(config, RegularPercolationConfig):
        d = config.d
        if d <= 3:
            raise InadmissibleParameters(f"d={d}: P(X = 3) vanishes unless d > 3")
        if config.p > (1.0 + _P_SLACK) / (d - 1):
            raise InadmissibleParameters(f"p={config.p} exceeds 1/(d-1)")
        # Bin(d-1, 1/(d-1)) dominates Bin(u, p) for every u <= d-1, p <= 1/(d-1)
        p3 = Binomial(d - 1, 1.0 / (d - 1)).p3()
        return BoundParams(1.0, 1.0, 0.0, c or 0.0, p3)

    if isinstance(config, IntersectionConfig):
        if not config.is_critical:
            raise InadmissibleParameters(f"mu = beta gamma^2 = {config.mu} is not 1")
        g = config.gamma
        p3 = offspring_for(config).p3()
        return BoundParams(1.0 + 4.0 * g, min(1.0, 1.0 / (2.0 * g)), 0.0, c or 0.0, p3)

    if isinstance(config, NrConfig):
        if config.tau is None or config.tau <= 4:
            raise InadmissibleParameters("NR bound needs the Pareto-quantile family with tau > 4")
        report = verify_weight_sequence(config.tau, _weight_grid(config.n), scale=config.scale)
        if not report.max_weight_ok:
            raise InadmissibleParameters("max weight exceeds (c_F n)^{1/(tau-1)}")
        c1, c2 = report.c1_estimate, report.c2_estimate
        eps = c2 * config.n ** (-(config.tau - 3.0) / (config.tau - 1.0))
        rho = min(1.0, 1.0 / (2.0 * config.max_weight))
        p3 = offspring_for(config).p3()
        return BoundParams(
            1.0 + 5.0 * c1, rho, eps, 1.0 if c is None else c, p3, notes={"C1_est": c1, "C2_est": c2}
        )

    if isinstance(config, ErConfig):
        n = config.n
        lam = config.lam if config.lam is not None else (config.p - 1.0 / n) * n ** (4.0 / 3.0)
        eps = max(0.0, lam) * n ** (-1.0 / 3.0)
        law = offspring_for(config)
        p3 = law.p3()
        if p3 <= 0:
            raise InadmissibleParameters("P(X = 3) = 0")
        # (n-1) p <= 1 + eps, so r^2 (1 + eps) absorbs the quadratic term
        return BoundParams(1.0 + eps, 1.0, eps, (0.0 if eps == 0 else 1.0) if c is None else c, p3)

    raise TypeError(f"not a model config: {config!r}")


def dominating_law(config) -> Offspring:
    """The law whose ``P(X = 3)`` enters :func:`derive_params` for ``config``."""
    if isinstance(config, RegularPercolationConfig):
        return Binomial(config.d - 1, 1.0 / (config.d - 1))
    return offspring_for(config)


@dataclass
class MgfReport:
    grid: np.ndarray
    log_mgf: np.ndarray
    log_bound: np.ndarray

    @property
    def margin(self) -> np.ndarray:
        """``log E e^{rX} - (r (1 + eps) + delta r^2)``; non-positive on success."""
        return self.log_mgf - self.log_bound

    @property
    def max_violation(self) -> float:
        return float(self.margin.max())

    def passed(self, tol: float = 1e-12) -> bool:
        return self.max_violation <= tol


def check_mgf_condition(dist: Offspring, params: BoundParams, grid_size: int = 1000) -> MgfReport:
    """Compare the MGF with ``exp(r (1 + eps) + delta r^2)`` on ``grid_size``
    equally spaced points strictly inside ``(0, rho)``; all in log space."""
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    r = params.rho * np.arange(1, grid_size + 1) / (grid_size + 1)
    log_bound = r * (1.0 + params.epsilon) + params.delta * r**2
    return MgfReport(r, np.asarray(dist.log_mgf(r), dtype=np.float64), log_bound)


def ceil_tolerant(x: float, rel: float = 1e-9) -> int:
    """``ceil(x)`` that ignores float noise just above an integer."""
    nearest = round(x)
    if abs(x - nearest) <= rel * max(1.0, abs(x)):
        return int(nearest)
    return math.ceil(x)


def k_from_A(n: int, A: float) -> int:
    """``ceil(A n^{2/3})``."""
    return ceil_tolerant(A * n ** (2.0 / 3.0))


@dataclass(frozen=True)
class TailBound:
    n: int
    k: int
    A: float | None
    value: float
    epsilon_ok: bool
    rho_ok: bool
    params: BoundParams

    @property
    def certified(self) -> bool:
        return self.epsilon_ok and self.rho_ok

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "A": self.A,
            "value": self.value,
            "certified": self.certified,
            "epsilon_ok": self.epsilon_ok,
            "rho_ok": self.rho_ok,
            **self.params.to_dict(),
        }


def tail_bound(n: int, params: BoundParams, k: int | None = None, A: float | None = None) -> TailBound:
    """``C / P(X = 3) * n / k^{3/2}`` with the two preconditions on ``k`` evaluated.

    Give exactly one of ``k`` or ``A`` (then ``k = ceil(A n^{2/3})``, ``A > 1``).
    A failed precondition does not suppress the value; it marks it uncertified.
    """
    if (k is None) == (A is None):
        raise ValueError("give exactly one of k and A")
    if A is not None:
        if A <= 1:
            raise ValueError(f"A must exceed 1, got {A}")
        k = k_from_A(n, A)
    if k <= 0:
        raise ValueError("k must be positive")
    root = math.sqrt(k)
    value = params.C / params.p3 * n / k**1.5
    return TailBound(
        n=n,
        k=k,
        A=A,
        value=value,
        epsilon_ok=params.epsilon * root <= params.c_precondition,
        rho_ok=params.rho * root >= 1.0,
        params=params,
    )


# name used by the documented interface
theorem1_bound = tail_bound
