"""Binomial proportion estimates with exact (Clopper–Pearson) intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.stats import beta

CONFIDENCE = 0.99


def clopper_pearson(successes: int, trials: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError(f"need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}")
    alpha = 1.0 - confidence
    lo = 0.0 if successes == 0 else float(beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lo, hi


@dataclass(frozen=True)
class ProportionEstimate:
    successes: int
    trials: int
    confidence: float = CONFIDENCE

    @property
    def p_hat(self) -> float:
        return self.successes / self.trials

    @property
    def interval(self) -> tuple[float, float]:
        return clopper_pearson(self.successes, self.trials, self.confidence)

    @property
    def ci_low(self) -> float:
        return self.interval[0]

    @property
    def ci_high(self) -> float:
        return self.interval[1]

    @property
    def standard_error(self) -> float:
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.trials)

    def covers(self, value: float, tol: float = 1e-12) -> bool:
        """Whether ``value`` lies in the interval, allowing ``tol`` for rounding
        in the compared value."""
        lo, hi = self.interval
        return lo - tol <= value <= hi + tol

    def merge(self, other: "ProportionEstimate") -> "ProportionEstimate":
        if other.confidence != self.confidence:
            raise ValueError("cannot merge estimates with different confidence levels")
        return ProportionEstimate(self.successes + other.successes, self.trials + other.trials, self.confidence)
