"""Walker/Vose alias table for O(1) weighted index sampling."""
from __future__ import annotations

import numpy as np


class AliasTable:
    """Sample indices ``i`` with probability ``weights[i] / sum(weights)``.

    Construction is O(n); the table is read-only afterwards, so one instance can
    serve many generators concurrently.
    """

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        total = w.sum()
        if total <= 0:
            raise ValueError("weights sum to zero")
        n = w.size
        scaled = w * (n / total)
        prob = np.ones(n)
        alias = np.arange(n)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        scaled = scaled.tolist()
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] -= 1.0 - scaled[s]
            (small if scaled[g] < 1.0 else large).append(g)
        # leftovers are 1 up to rounding
        for i in small + large:
            prob[i] = 1.0
            alias[i] = i
        # zero-weight entries must never be returned, not even through rounding
        prob[w == 0] = 0.0
        self.prob = prob
        self.alias = alias
        self.prob.flags.writeable = False
        self.alias.flags.writeable = False

    def __len__(self) -> int:
        return self.prob.size

    def sample(self, rng: np.random.Generator, size=None):
        i = rng.integers(0, self.prob.size, size=size)
        u = rng.random(size=size)
        return np.where(u < self.prob[i], i, self.alias[i])
