"""Offline reference solvers used as OPT baselines and as test oracles."""

from ropack.oracles.gap import (
    ExactGapLP,
    FastGapLP,
    GapFractional,
    gap_dual_bound,
    gap_opt_fractional,
    gap_opt_integral,
)
from ropack.oracles.knapsack import (
    FractionalSolution,
    greedy_order,
    knapsack_opt_fractional,
    knapsack_opt_integral,
    knapsack_opt_pairs,
)
from ropack.oracles.matching import Matching, matching_opt
from ropack.oracles.simplex import LPResult, simplex_max

__all__ = [
    "ExactGapLP",
    "FastGapLP",
    "FractionalSolution",
    "GapFractional",
    "LPResult",
    "Matching",
    "gap_dual_bound",
    "gap_opt_fractional",
    "gap_opt_integral",
    "greedy_order",
    "knapsack_opt_fractional",
    "knapsack_opt_integral",
    "knapsack_opt_pairs",
    "matching_opt",
    "simplex_max",
]
