"""Largest-component tails of critical random graphs via a dominating random walk."""
from .bounds import BoundParams, TailBound, check_mgf_condition, derive_params, tail_bound, theorem1_bound
from .exploration import ExplorationTrace, Graph, component_sizes, component_sizes_bfs, explore
from .harness import (
    ExperimentConfig,
    TailEstimate,
    check_domination,
    estimate_tail,
    exact_tail_oracle,
    scaling_sweep,
)
from .models import (
    ErConfig,
    IntersectionConfig,
    NrConfig,
    RegularPercolationConfig,
    generate,
    nr_weights,
)
from .offspring import Binomial, CompoundBinomial, Finite, MixedPoisson, offspring_for, verify_lemma2, verify_weight_sequence
from .walks import WalkSpec, survival_probability_exact, survival_probability_mc, verify_ballot

__version__ = "0.1.0"
