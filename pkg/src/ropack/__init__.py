"""Random-order online algorithms for knapsack and GAP, with exact analysis."""

from ropack.core import (
    GapInstance,
    GapOption,
    KnapsackInstance,
    KnapsackItem,
    Permutation,
    SplitPair,
    classify_gap,
    classify_knapsack,
    load_instance,
    random_permutation,
    rank_order,
    save_instance,
)
from ropack.errors import CapabilityError, ContractError, ParameterError, RopackError
from ropack.gap_online import (
    GAP_DEFAULTS,
    AssignmentTrace,
    gap_params,
    run_lp_as,
    run_matching_al,
    run_sequential_gap,
)
from ropack.knapsack_online import (
    KNAPSACK_DEFAULTS,
    RunTrace,
    SeqParams,
    run_al,
    run_as,
    run_sequential,
)
from ropack.analysis import (
    ProbabilityReport,
    RatioBundle,
    case_bounds,
    optimize_params,
    p_first_asymptotic,
    p_first_exact,
    p_pair_asymptotic,
    p_pair_exact,
    probability_report,
    ratio_AS_bound,
    ratio_bundle,
    ratio_matching_bound,
)
from ropack.simulator import (
    Estimate,
    InstanceFamily,
    enumerate_exact,
    estimate_probability,
    estimate_ratio,
    generate,
)

__all__ = [
    "AssignmentTrace",
    "CapabilityError",
    "case_bounds",
    "classify_gap",
    "classify_knapsack",
    "ContractError",
    "enumerate_exact",
    "Estimate",
    "estimate_probability",
    "estimate_ratio",
    "GAP_DEFAULTS",
    "gap_params",
    "GapInstance",
    "GapOption",
    "generate",
    "InstanceFamily",
    "KNAPSACK_DEFAULTS",
    "KnapsackInstance",
    "KnapsackItem",
    "load_instance",
    "optimize_params",
    "p_first_asymptotic",
    "p_first_exact",
    "p_pair_asymptotic",
    "p_pair_exact",
    "ParameterError",
    "Permutation",
    "probability_report",
    "ProbabilityReport",
    "random_permutation",
    "rank_order",
    "ratio_AS_bound",
    "ratio_bundle",
    "ratio_matching_bound",
    "RatioBundle",
    "RopackError",
    "run_al",
    "run_as",
    "run_lp_as",
    "run_matching_al",
    "run_sequential",
    "run_sequential_gap",
    "RunTrace",
    "save_instance",
    "SeqParams",
    "SplitPair",
]

__version__ = "0.1.0"
