"""Greedy extension for weakly supermodular set functions.

Bicriteria solvers for k-median / constrained k-means, sparse (multiple)
linear regression and column subset selection, plus brute-force oracles
for checking the guarantees on small instances.
"""

from .clustering import (
    CostMatrix,
    KMeansObjective,
    KMedianObjective,
    PointSet,
    kmeans_constrained_objective,
    kmedian_objective,
    verify_supermodular,
)
from .core import (
    GreedyBudget,
    GreedyTrace,
    GroundSet,
    SetFunction,
    SetObjective,
    SolutionSet,
    TraceStep,
    bicriteria_solve,
    greedy_extend,
    greedy_extend_until,
    greedy_step,
    iteration_budget,
)
from .exceptions import (
    ConfigError,
    GroundSetExhausted,
    GuardError,
    InputParseError,
    NoImprovingColumn,
    RankDeficientError,
    StallError,
    WSGreedyError,
)
from .initializers import InitializerResult, d2_adaptive_sample, greedy_init
from .oracle import (
    OracleReport,
    brute_force_min,
    estimate_alpha_empirical,
    estimate_curvature,
    verify_transition_bound,
    verify_weak_supermodularity,
)
from .regression import (
    AlphaCertificate,
    RegressionInstance,
    ResidualState,
    SMLRObjective,
    alpha_exact,
    alpha_spectral_bound,
    css_objective,
    incremental_gain_scan,
    smlr_objective,
    sparse_regress,
)

__version__ = "0.1.0"
