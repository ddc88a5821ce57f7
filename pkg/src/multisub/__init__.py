"""Multi-objective monotone submodular maximisation under a cardinality constraint."""

from .core import (
    CappedOracle,
    ConvexCombinationOracle,
    CoverageFunction,
    ElementSet,
    FunctionOracle,
    GroundSet,
    MinOracle,
    ModularFunction,
    ScaledResidualOracle,
    ValueOracle,
    greedy_fraction,
    check_submodular,
    marginal_of_set,
)
from .instances import (
    Graph,
    InitiatorMatrix,
    MultiObjectiveInstance,
    brute_force_max_min,
    kronecker_generate,
    load_instance,
    max_cover_objectives,
    planted_instance,
    save_instance,
)
from .multilinear import (
    ConvexCombination,
    EstimatorConfig,
    FractionalPoint,
    concavity_check,
    estimate_multilinear,
    estimate_multilinear_gain,
    exact_multilinear,
    swap_round,
)
from .multiobjective import (
    DecisionResult,
    MwuConfig,
    MwuTrace,
    Stage1Exhausted,
    convex_combination_greedy,
    mwu_stage2,
    naive_min_greedy,
    round_robin_greedy,
    saturate,
    saturate_with_search,
    solve_max_min,
    solve_targets,
    stage1_filter,
    tuple_min_greedy,
    check_subset_variation,
)
from .solvers import SolverConfig, lazy_greedy, standard_greedy, threshold_greedy

__version__ = "0.1.0"
