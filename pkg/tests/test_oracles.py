import random
from fractions import Fraction

import numpy as np
import pytest

from bruteforce import gap_by_assignments, knapsack_by_subsets, lp_by_vertices, matching_by_injections
from conftest import random_gap, random_knapsack
from ropack import CapabilityError, GapInstance, GapOption, KnapsackInstance, ParameterError
from ropack.oracles import (
    ExactGapLP,
    FastGapLP,
    gap_dual_bound,
    gap_opt_fractional,
    gap_opt_integral,
    knapsack_opt_fractional,
    knapsack_opt_integral,
    knapsack_opt_pairs,
    matching_opt,
    simplex_max,
)
from ropack.oracles.knapsack import greedy_order, packing_value


# ---------------------------------------------------------------- knapsack

def test_fractional_frozen(tiny_knapsack):
    # densities 2, 9/5, 2, 1, 5/2 -> ids 4, 0, 2 fill 11 > 10, so id 2 is 3/4 packed
    sol = knapsack_opt_fractional(tiny_knapsack)
    assert sol.value == Fraction(5, 2) + 12 + Fraction(3, 4) * 8
    assert sol.fractional_ids() == [2]
    assert [it.id for it in greedy_order(tiny_knapsack.items)] == [4, 0, 2, 1, 3]


def test_integral_frozen(tiny_knapsack):
    value, ids = knapsack_opt_integral(tiny_knapsack)
    # 6 + 4 fills W exactly; the fractional optimum is 41/2
    assert value == 20
    assert packing_value(tiny_knapsack, ids) == value


def test_integral_cap():
    inst = KnapsackInstance.from_lists(100, [1] * 41, [1] * 41)
    with pytest.raises(CapabilityError):
        knapsack_opt_integral(inst)
    assert knapsack_opt_integral(inst, cap=50)[0] == 41


@pytest.mark.parametrize("seed", range(40))
def test_branch_and_bound_matches_subsets(seed):
    rng = random.Random(seed)
    inst = random_knapsack(rng, rng.randint(0, 12))
    value, ids = knapsack_opt_integral(inst)
    assert value == knapsack_by_subsets(inst)
    assert sum(it.size for it in inst.items if it.id in ids) <= inst.capacity
    assert knapsack_opt_fractional(inst).value >= value


@pytest.mark.parametrize("seed", range(40))
def test_pairs_oracle(seed):
    rng = random.Random(seed)
    W = rng.randint(9, 90)
    n = rng.randint(1, 12)
    inst = KnapsackInstance.from_lists(W, [rng.randint(W // 3 + 1, W) for _ in range(n)],
                                       [rng.randint(0, 9) for _ in range(n)])
    value, ids = knapsack_opt_pairs(inst)
    assert value == knapsack_by_subsets(inst)
    assert len(ids) <= 2 and packing_value(inst, ids) == value


def test_pairs_oracle_refuses_small_items():
    with pytest.raises(CapabilityError):
        knapsack_opt_pairs(KnapsackInstance.from_lists(9, [3, 5], [1, 1]))


# ---------------------------------------------------------------- simplex

def test_simplex_frozen():
    # max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
    res = simplex_max([3, 2], [[1, 1], [1, 3], [1, 0]], [4, 6, 3])
    assert res.value == 11
    assert res.x == (3, 1)
    # dual prices: 2 on the first row, 1 on the third
    assert res.duals == (2, 0, 1)


def test_simplex_unbounded():
    with pytest.raises(ParameterError):
        simplex_max([1, 0], [[0, 1]], [1])


def test_simplex_rejects_negative_rhs():
    with pytest.raises(ParameterError):
        simplex_max([1], [[1]], [-1])


@pytest.mark.parametrize("seed", range(40))
def test_simplex_matches_vertices(seed):
    rng = random.Random(seed)
    n, m = rng.randint(1, 5), rng.randint(1, 4)
    c = [rng.randint(-3, 9) for _ in range(n)]
    A = [[rng.randint(0, 6) for _ in range(n)] for _ in range(m)]
    A.append([1] * n)  # keeps the LP bounded
    b = [rng.randint(0, 12) for _ in range(m + 1)]
    res = simplex_max(c, A, b)
    assert res.value == lp_by_vertices(c, A, b)
    # strong duality
    assert sum(y * bi for y, bi in zip(res.duals, b)) == res.value


# ---------------------------------------------------------------- matching

def test_matching_frozen():
    w = [[4, 1, 0], [3, 3, 0], [0, 5, 2], [1, 1, 1]]
    res = matching_opt(w)
    assert res.weight == 10
    assert res.edges == frozenset({(0, 0), (2, 1), (3, 2)})


def test_matching_ignores_nonpositive():
    res = matching_opt([[0, -2], [-1, 0]])
    assert res.weight == 0 and not res.edges


@pytest.mark.parametrize("seed", range(40))
def test_hungarian_matches_injections(seed):
    rng = random.Random(seed)
    rows, cols = rng.randint(1, 5), rng.randint(1, 4)
    w = [[rng.randint(0, 9) for _ in range(cols)] for _ in range(rows)]
    res = matching_opt(w)
    assert res.weight == matching_by_injections(w)
    assert len({r for _, r in res.edges}) == len(res.edges)
    assert res.weight == sum(Fraction(w[i][j]) for i, j in res.edges)


# ---------------------------------------------------------------- GAP

def test_gap_integral_frozen():
    inst = GapInstance((4, 3), (
        (GapOption(5, 3), GapOption(4, 2)),
        (GapOption(3, 2), GapOption(3, 3)),
        (GapOption(2, 1), GapOption(1, 1)),
    ))
    value, assign = gap_opt_integral(inst)
    assert value == 10
    assert gap_by_assignments(inst) == 10


@pytest.mark.parametrize("seed", range(25))
def test_gap_oracles_agree(seed):
    rng = random.Random(seed)
    inst = random_gap(rng, rng.randint(1, 6), rng.randint(1, 3))
    integral = gap_opt_integral(inst)[0]
    assert integral == gap_by_assignments(inst)
    frac = gap_opt_fractional(inst)
    assert frac.value >= integral
    assert gap_opt_fractional(inst, column_generation=False).value == frac.value
    assert gap_dual_bound(inst, frac.duals) == frac.value


@pytest.mark.parametrize("seed", range(6))
def test_dual_bound_is_tight(seed):
    rng = random.Random(100 + seed)
    inst = random_gap(rng, 40, 3, W=50)
    exact = gap_opt_fractional(inst).value
    bound = gap_dual_bound(inst)
    assert bound >= exact
    assert float(bound - exact) <= 1e-6 * float(exact)


@pytest.mark.parametrize("seed", range(10))
def test_fast_lp_matches_exact_lp(seed):
    rng = random.Random(seed)
    inst = random_gap(rng, 30, rng.randint(1, 3), W=40)
    fast = FastGapLP([float(w) for w in inst.capacities], inst.n, batch=4)
    exact = ExactGapLP(inst.capacities, inst.n)
    for j, opts in enumerate(inst.items):
        fast.add_item([float(o.profit) for o in opts], [float(o.size) for o in opts])
        exact.add_item([o.profit for o in opts], [o.size for o in opts])
        assert fast.value() == pytest.approx(exact.value(), rel=1e-9, abs=1e-9)


def test_fast_lp_unique_optimum_coefficients():
    # distinct densities on one resource: a unique greedy optimum
    W = 10.0
    lp = FastGapLP([W], 5)
    sizes = [4, 3, 5, 2, 6]
    profits = [8, 9, 5, 1, 3]
    for p, s in zip(profits, sizes):
        lp.add_item([p], [s])
    x = np.array([lp.coefficients(j)[0] for j in range(5)])
    assert np.allclose(x, [1, 1, 3 / 5, 0, 0])
    assert lp.value() == pytest.approx(8 + 9 + 3)
