"""Monte Carlo tail experiments, brute-force oracles and result files.

Every trial draws its randomness from its own stream, derived from
``(master_seed, stream id, trial index)``. Results therefore do not depend on
how trials are split between worker processes.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .bounds import InadmissibleParameters, TailBound, derive_params, k_from_A, tail_bound
from .exploration import explore, largest_component_size
from .models import (
    ErConfig,
    IntersectionConfig,
    NrConfig,
    RegularPercolationConfig,
    generate,
    model_name,
    model_params,
    nr_edge_probabilities,
    regular_base,
)
from .offspring import offspring_for
from .stats import ProportionEstimate
from .walks import StateSpaceTooLarge, WalkSpec, survival_probability_exact, survival_probability_mc

ESTIMATORS = ("max-component", "uniform-vertex")
SCHEMA_VERSION = 1
ORACLE_EDGE_LIMIT = 20
CHUNK_SIZE = 256

# stream ids keep independent uses of one master seed apart
GRAPH_STREAM = 1
WALK_STREAM = 2


def trial_rng(master_seed: int, stream: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(stream, trial)))


def default_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


# --------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class ExperimentConfig:
    model: object
    k: int
    trials: int
    master_seed: int = 0
    workers: int = 1
    estimator: str = "max-component"
    A: float | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @classmethod
    def from_A(cls, model, A: float, trials: int, **kw) -> "ExperimentConfig":
        if A <= 1:
            raise ValueError(f"A must exceed 1, got {A}")
        return cls(model, k_from_A(model.n, A), trials, A=A, **kw)


@dataclass
class TailEstimate:
    model: str
    params: dict
    k: int
    A: float | None
    estimate: ProportionEstimate
    estimator: str
    seed: int
    bound: TailBound | None = None
    wall_time_s: float = 0.0

    @property
    def n(self) -> int:
        return self.params["n"]

    @property
    def trials(self) -> int:
        return self.estimate.trials

    @property
    def successes(self) -> int:
        return self.estimate.successes

    @property
    def p_hat(self) -> float:
        return self.estimate.p_hat

    @property
    def ci_low(self) -> float:
        return self.estimate.ci_low

    @property
    def ci_high(self) -> float:
        return self.estimate.ci_high

    @property
    def ci_width(self) -> float:
        return self.ci_high - self.ci_low


def _trial_statistic(model, estimator: str, cap: int, master_seed: int, trial: int) -> int:
    """``|C_max|``, or ``|C(V)|`` for a uniform ``V``, capped just above ``cap``."""
    rng = trial_rng(master_seed, GRAPH_STREAM, trial)
    graph = generate(model, rng)
    if estimator == "max-component":
        return largest_component_size(graph)
    v = int(rng.integers(graph.n))
    trace = explore(graph, v, max_steps=max(cap, 1))
    if trace.component_sizes:
        return trace.component_sizes[0]
    return trace.steps + trace.active[-1]


def _run_chunk(args) -> np.ndarray:
    model, estimator, cap, master_seed, lo, hi = args
    return np.array([_trial_statistic(model, estimator, cap, master_seed, t) for t in range(lo, hi)], dtype=np.int64)


def sample_statistics(
    model, trials: int, master_seed: int, *, estimator: str = "max-component", cap: int = 0, workers: int = 1
) -> np.ndarray:
    """Per-trial statistics in trial order. ``cap`` bounds the exploration
    length for the uniform-vertex estimator: values above ``cap`` are exact
    only in the sense that they exceed ``cap``."""
    chunks = [
        (model, estimator, cap, master_seed, lo, min(lo + CHUNK_SIZE, trials)) for lo in range(0, trials, CHUNK_SIZE)
    ]
    if workers <= 1 or len(chunks) == 1:
        parts = [_run_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(chunks))) as pool:
            parts = list(pool.map(_run_chunk, chunks))
    return np.concatenate(parts)


@lru_cache(maxsize=64)
def _cached_params(model):
    return derive_params(model)


def certified_bound(model, k: int, A: float | None = None) -> TailBound | None:
    """The tail bound for ``model`` at ``k``, or ``None`` outside the admissible range."""
    try:
        params = _cached_params(model)
    except (InadmissibleParameters, TypeError):
        return None
    if k <= 0:
        return None
    return tail_bound(model.n, params, A=A) if A is not None else tail_bound(model.n, params, k=k)


def _estimate_from(model, k, A, stats, estimator, seed, elapsed) -> TailEstimate:
    return TailEstimate(
        model=model_name(model),
        params=model_params(model),
        k=k,
        A=A,
        estimate=ProportionEstimate(int(np.count_nonzero(stats > k)), int(stats.size)),
        estimator=estimator,
        seed=seed,
        bound=certified_bound(model, k, A),
        wall_time_s=elapsed,
    )


def estimate_tail(config: ExperimentConfig) -> TailEstimate:
    """Estimate ``P(|C_max| > k)`` or ``P(|C(V)| > k)`` by independent graph samples."""
    t0 = time.perf_counter()
    stats = sample_statistics(
        config.model,
        config.trials,
        config.master_seed,
        estimator=config.estimator,
        cap=config.k,
        workers=config.workers,
    )
    return _estimate_from(
        config.model, config.k, config.A, stats, config.estimator, config.master_seed, time.perf_counter() - t0
    )


def scaling_sweep(
    model,
    A_list: Sequence[float],
    trials: int,
    master_seed: int = 0,
    workers: int = 1,
    estimator: str = "max-component",
) -> list[TailEstimate]:
    """One estimate per ``A``, all read off the same sampled graphs, so the
    ``p_hat`` column is non-increasing in ``A`` by construction."""
    A_list = list(A_list)
    if not A_list:
        raise ValueError("A_list is empty")
    if any(a <= 1 for a in A_list) or A_list != sorted(A_list):
        raise ValueError("A_list must be ascending with every A > 1")
    ks = [k_from_A(model.n, a) for a in A_list]
    t0 = time.perf_counter()
    stats = sample_statistics(model, trials, master_seed, estimator=estimator, cap=max(ks), workers=workers)
    elapsed = time.perf_counter() - t0
    return [_estimate_from(model, k, a, stats, estimator, master_seed, elapsed) for k, a in zip(ks, A_list)]


# --------------------------------------------------------------------------
# domination of the exploration by the walk


@dataclass
class DominationReport:
    k: int
    lhs: ProportionEstimate
    rhs: ProportionEstimate
    rhs_exact: float | None = None

    @property
    def pooled_se(self) -> float:
        return math.hypot(self.lhs.standard_error, self.rhs.standard_error)

    @property
    def holds(self) -> bool:
        return self.lhs.p_hat <= self.rhs.p_hat + 3.0 * self.pooled_se

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "trials": self.lhs.trials,
            "lhs_p_hat": self.lhs.p_hat,
            "lhs_ci": list(self.lhs.interval),
            "rhs_p_hat": self.rhs.p_hat,
            "rhs_ci": list(self.rhs.interval),
            "rhs_exact": self.rhs_exact,
            "pooled_se": self.pooled_se,
            "holds": self.holds,
        }


def check_domination(model, k: int, trials: int, master_seed: int = 0, workers: int = 1) -> DominationReport:
    """Compare ``P(|C(V)| > k)`` on sampled graphs with the survival to ``k``
    of the walk ``2 + sum (X_i - 1)`` driven by the model's dominating law."""
    est = estimate_tail(
        ExperimentConfig(model, k, trials, master_seed=master_seed, workers=workers, estimator="uniform-vertex")
    )
    spec = WalkSpec(offspring_for(model), start=2, horizon=max(k, 1))
    rhs = survival_probability_mc(spec, trials, trial_rng(master_seed, WALK_STREAM, 0))
    try:
        exact = survival_probability_exact(spec)
    except (NotImplementedError, StateSpaceTooLarge):
        exact = None
    return DominationReport(k, est.estimate, rhs, exact)


# --------------------------------------------------------------------------
# brute-force oracle


class OracleTooLarge(ValueError):
    pass


def _candidate_edges(model) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(model, ErConfig):
        u, v = np.triu_indices(model.n, 1)
        return model.n, u, v, np.full(u.size, model.p)
    if isinstance(model, RegularPercolationConfig):
        u, v = regular_base(model).edges()
        return model.n, u, v, np.full(u.size, model.p)
    if isinstance(model, NrConfig):
        u, v = np.triu_indices(model.n, 1)
        return model.n, u, v, nr_edge_probabilities(model, u, v)
    raise TypeError(f"no edge-independent oracle for {model!r}")


def _largest_by_labels(n: int, adjacent) -> np.ndarray:
    """``adjacent(i, j)`` gives a boolean array over all subsets; returns the
    largest component size per subset by label propagation."""
    labels = None
    pairs = [(i, j, adjacent(i, j)) for i in range(n) for j in range(i + 1, n)]
    size = pairs[0][2].size if pairs else 1
    labels = np.tile(np.arange(n, dtype=np.int8), (size, 1))
    for _ in range(n):
        for i, j, on in pairs:
            low = np.minimum(labels[:, i], labels[:, j])
            labels[on, i] = low[on]
            labels[on, j] = low[on]
    counts = np.stack([(labels == c).sum(axis=1) for c in range(n)], axis=1)
    return counts.max(axis=1)


def _subset_probabilities(probs: np.ndarray, bits: np.ndarray) -> np.ndarray:
    weight = np.ones(bits.shape[0])
    for e, p in enumerate(probs):
        weight *= np.where(bits[:, e], p, 1.0 - p)
    return weight


def exact_tail_oracle(model, k: int) -> float:
    """``P(|C_max| > k)`` by summing over every edge subset (at most 2^20)."""
    if isinstance(model, IntersectionConfig):
        n, m = model.n, model.m
        n_edges = n * m
    else:
        n, u, v, probs = _candidate_edges(model)
        n_edges = u.size
    if n_edges > ORACLE_EDGE_LIMIT:
        raise OracleTooLarge(f"{n_edges} candidate edges; the limit is {ORACLE_EDGE_LIMIT}")
    if k >= n:
        return 0.0
    if k <= 0:
        return 1.0
    masks = np.arange(2**n_edges, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n_edges)) & 1).astype(bool)
    if isinstance(model, IntersectionConfig):
        weight = _subset_probabilities(np.full(n_edges, model.p), bits)
        # bit i*m + a: vertex i joined to auxiliary vertex a
        member = bits.reshape(-1, n, m)
        largest = _largest_by_labels(n, lambda i, j: (member[:, i, :] & member[:, j, :]).any(axis=1))
    else:
        weight = _subset_probabilities(probs, bits)
        index = {(int(a), int(b)): e for e, (a, b) in enumerate(zip(u, v))}
        never = np.zeros(masks.size, dtype=bool)
        largest = _largest_by_labels(n, lambda i, j: bits[:, index[(i, j)]] if (i, j) in index else never)
    return float(math.fsum(weight[largest > k]))


# --------------------------------------------------------------------------
# output


CSV_COLUMNS = (
    "model",
    "n",
    "params",
    "k",
    "A",
    "trials",
    "successes",
    "p_hat",
    "ci_low",
    "ci_high",
    "bound_value",
    "bound_certified",
    "seed",
    "wall_time_s",
)


def fmt(x) -> str:
    """Ten significant digits for reals; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".10g")
    return str(x)


def flatten_params(params: dict) -> str:
    return ";".join(f"{key}={fmt(val)}" for key, val in params.items() if key != "n")


def estimate_record(est: TailEstimate, timing: bool = False) -> dict:
    """Row for CSV/JSON output. Without ``timing`` the wall time is left blank
    so repeated runs produce identical bytes."""
    return {
        "model": est.model,
        "n": est.n,
        "params": flatten_params(est.params),
        "k": est.k,
        "A": est.A,
        "trials": est.trials,
        "successes": est.successes,
        "p_hat": est.p_hat,
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "bound_value": est.bound.value if est.bound else None,
        "bound_certified": est.bound.certified if est.bound else None,
        "seed": est.seed,
        "wall_time_s": est.wall_time_s if timing else None,
    }


def render_csv(records: Iterable[dict], columns: Sequence[str] = CSV_COLUMNS) -> str:
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([fmt(rec.get(c)) for c in columns])
    return buf.getvalue()


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        return float(format(float(x), ".10g"))
    if isinstance(x, np.integer):
        return int(x)
    return x


def render_json(records: Iterable[dict]) -> str:
    rows = [{key: _json_value(val) for key, val in rec.items()} for rec in records]
    return json.dumps({"schema": SCHEMA_VERSION, "rows": rows}, indent=2) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the target directory and rename it."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
