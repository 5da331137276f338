"""Oriented 2D percolation: extreme open paths, exact conditional path
laws, stochastic dominance, resampling dynamics, and inequality suites."""

from .lattice import (
    Edge,
    EmptyG,
    LatticeError,
    NoPath,
    NotStrictlyOrdered,
    PercolationModel,
    Region,
    Sentinel,
    Site,
    Support,
    SupportTooLarge,
    Variant,
    band,
    edge_support,
    level_sites,
    pair_law_from_correlation,
    site_support,
    strictly_left_region,
    strictly_right_region,
    support_for,
    union_support,
)
from .paths import (
    Configuration,
    LevelMismatch,
    PathSpec,
    concat,
    enumerate_paths,
    enumerate_paths_through,
    leftmost_open_path,
    open_path_exists,
    path_leq,
    path_lt,
    pointwise_max,
    pointwise_min,
    rightmost_open_path,
    tau_boundary,
)
from .oracle import (
    DominanceResult,
    EventPredicate,
    IncompatibleBases,
    NotStrictlySeparated,
    PathDistribution,
    ZeroProbabilityCondition,
    connection_predicate,
    constant_predicate,
    exact_extreme_distribution,
    exact_extreme_pair,
    stochastic_leq,
    up_sets,
    verify_corollary2,
    verify_proposition31,
    verify_theorem1,
)
from .chain import (
    ChainState,
    CounterRng,
    CoupledChain,
    CoupledState,
    ResamplingChain,
    UnsupportedModel,
    bhk_step,
    chain_theorem1_estimate,
    conditional_stationary,
    coupled_step,
    exact_kernel,
    in_X,
    invariance_gap_tv,
    kernel_power_convergence,
)
from .inequalities import (
    ConnectionEvent,
    EstimateReport,
    NonTranslationInvariantModel,
    ZeroDenominator,
    event_probability,
    verify_corollary62,
    verify_corollary63,
    verify_lemma61,
)
from .report import Report

__version__ = "0.1.0"
