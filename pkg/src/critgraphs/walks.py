"""Survival of integer random walks and the ballot-type inequality.

A walk starts at ``start`` and takes i.i.d. steps ``W = X - 1`` where ``X`` is an
offspring law; it survives to ``horizon`` if every position up to and including
``horizon`` is positive.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .offspring import Offspring
from .stats import ProportionEstimate

STATE_LIMIT = 10**8


class StateSpaceTooLarge(ValueError):
    pass


class BallotHypothesisError(ValueError):
    pass


@dataclass(frozen=True)
class WalkSpec:
    offspring: Offspring
    start: int
    horizon: int

    def __post_init__(self):
        if self.start < 1:
            raise ValueError("walk must start at a positive position")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")

    def step_law(self) -> dict[int, object]:
        values, probs = self.offspring.finite_support()
        return {x - 1: q for x, q in zip(values, probs) if q}


def _check_states(start: int, horizon: int, steps: Mapping[int, object]) -> int:
    top = start + horizon * max(0, max(steps))
    if top * horizon > STATE_LIMIT:
        raise StateSpaceTooLarge(f"{top} positions x {horizon} steps exceeds {STATE_LIMIT}")
    return top


def killed_walk_law(steps: Mapping[int, object], start: int, horizon: int) -> dict[int, object]:
    """``P(start + S_t > 0 for t <= horizon, start + S_horizon = j)`` for every
    ``j``, by dynamic programming over positions. Exact when the step
    probabilities are ``Fraction``."""
    _check_states(start, horizon, steps)
    law = {start: Fraction(1) if _is_exact(steps) else 1.0}
    items = list(steps.items())
    for _ in range(horizon):
        nxt: dict[int, object] = defaultdict(int)
        for pos, mass in law.items():
            for w, q in items:
                if pos + w > 0:
                    nxt[pos + w] += mass * q
        law = nxt
        if not law:
            break
    return dict(law)


def free_walk_law(steps: Mapping[int, object], length: int) -> dict[int, object]:
    """Law of ``S_length`` started at 0 without killing."""
    law = {0: Fraction(1) if _is_exact(steps) else 1.0}
    items = list(steps.items())
    for _ in range(length):
        nxt: dict[int, object] = defaultdict(int)
        for pos, mass in law.items():
            for w, q in items:
                nxt[pos + w] += mass * q
        law = nxt
    return dict(law)


def _is_exact(steps: Mapping[int, object]) -> bool:
    return all(isinstance(q, (int, Fraction)) for q in steps.values())


def survival_probability_exact(spec: WalkSpec, exact: bool = False):
    """Exact survival probability for an offspring law with finite support.

    Uses float64 vector DP by default; ``exact=True`` runs the same recursion in
    rational arithmetic (the law's probabilities must then be rational).
    """
    steps = spec.step_law()
    if exact:
        steps = {w: Fraction(q) for w, q in steps.items()}
        return sum(killed_walk_law(steps, spec.start, spec.horizon).values(), Fraction(0))
    top = _check_states(spec.start, spec.horizon, steps)
    lo = min(steps)
    kernel = np.zeros(max(steps) - lo + 1)
    for w, q in steps.items():
        kernel[w - lo] = float(q)
    # state[i] is the mass at position i + 1
    state = np.zeros(top)
    state[spec.start - 1] = 1.0
    # conv[c] sits at position c + 1 + lo, i.e. state index c + lo
    target = np.arange(top + kernel.size - 1) + lo
    keep = (target >= 0) & (target < top)
    for _ in range(spec.horizon):
        conv = np.convolve(state, kernel)
        state = np.zeros(top)
        state[target[keep]] = conv[keep]
        if not state.any():
            return 0.0
    return float(state.sum())


def survival_probability_mc(spec: WalkSpec, trials: int, rng: np.random.Generator) -> ProportionEstimate:
    """Monte Carlo survival estimate with a 99% Clopper–Pearson interval.

    Walkers are advanced together and dropped at their first non-positive
    position, so the cost is the total surviving walker-steps.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    pos = np.full(trials, spec.start, dtype=np.int64)
    for _ in range(spec.horizon):
        pos += spec.offspring.sample(rng, pos.size) - 1
        pos = pos[pos > 0]
        if pos.size == 0:
            break
    return ProportionEstimate(int(pos.size), trials)


@dataclass
class BallotRow:
    j: int
    lhs: object
    rhs: object

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs


@dataclass
class BallotReport:
    r: int
    horizon: int
    rows: list[BallotRow] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(row.ok for row in self.rows)

    @property
    def survival(self):
        """Sum of the left-hand sides: the survival probability from ``r``."""
        return sum((row.lhs for row in self.rows), 0)

    def to_rows(self) -> list[tuple]:
        return [(row.j, row.lhs, row.rhs, row.margin) for row in self.rows]


def verify_ballot(steps: Mapping[int, object], r: int, horizon: int) -> BallotReport:
    """Check, for every reachable ``j >= 1``,

        P(r + S_t > 0 for t <= horizon, r + S_horizon = j)
            <= P(W = r)^{-1} * j / (horizon + 1) * P(S_{horizon+1} = j)

    where ``S`` sums i.i.d. steps with law ``steps`` (a mapping from integer
    step to probability). With ``Fraction`` probabilities the comparison is
    exact.
    """
    if r < 1 or horizon < 1:
        raise ValueError("r and horizon must be positive")
    steps = {int(w): q for w, q in steps.items() if q}
    q_r = steps.get(r, 0)
    if not q_r:
        raise BallotHypothesisError(f"P(step = {r}) must be positive")
    exact = _is_exact(steps)
    killed = killed_walk_law(steps, r, horizon)
    free = free_walk_law(steps, horizon + 1)
    report = BallotReport(r, horizon)
    zero = Fraction(0) if exact else 0.0
    for j in sorted(set(killed) | {j for j in free if j >= 1}):
        lhs = killed.get(j, zero)
        rhs = Fraction(j, horizon + 1) * free.get(j, zero) / q_r if exact else j / (horizon + 1) * free.get(j, 0.0) / q_r
        report.rows.append(BallotRow(j, lhs, rhs))
    return report
