"""Tunable caps for the exact solvers and enumeration oracles."""

from dataclasses import dataclass


@dataclass
class SolverCaps:
    knapsack_exact_max_n: int = 40
    gap_enum_max_assignments: int = 2_000_000
    enumerate_max_n: int = 7
    exact_binomial_max_n: int = 500
    gap_lp_exact_max_n: int = 60


CAPS = SolverCaps()
