import random
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_gap
from ropack import (
    GapInstance,
    GapOption,
    KnapsackInstance,
    ParameterError,
    SeqParams,
    classify_gap,
    gap_params,
    random_permutation,
    run_as,
    run_lp_as,
    run_matching_al,
    run_sequential_gap,
)
from ropack.core import coin_rng
from ropack.gap_online import PreparedGap, simulate_matching
from ropack.oracles import ExactGapLP, matching_opt


def large_only(rng, n, m):
    """Every option fills its resource; weights distinct so optima are unique."""
    weights = rng.sample(range(1, 10**6), n * m)
    return GapInstance(tuple([1] * m), tuple(
        tuple(GapOption(weights[i * m + r], 1) for r in range(m)) for i in range(n)))


def naive_matching(instance, order, cn, dn):
    taken, out = set(), {}
    for p in range(cn, dn):
        revealed = [instance.items[q] for q in order[:p + 1]]
        table = [[o.profit for o in opts] for opts in revealed]
        r = matching_opt(table).resource_of(p)
        if r is None or r in taken:
            continue
        taken.add(r)
        out[order[p]] = r
    return out


def test_matching_frozen():
    inst = GapInstance((1, 1), (
        (GapOption(5, 1), GapOption(1, 1)),
        (GapOption(9, 1), GapOption(2, 1)),
        (GapOption(7, 1), GapOption(8, 1)),
        (GapOption(6, 1), GapOption(3, 1)),
        (GapOption(1, 1), GapOption(4, 1)),
    ))
    params = SeqParams(Fraction(1, 5), 1, Fraction(1, 2), 5)  # cn = 1
    trace = run_matching_al(inst, [0, 1, 2, 3, 4], params)
    # round 2: {0, 1} -> 1 takes resource 0; round 3: 1-0 and 2-1 -> 2 takes 1
    # round 4: item 3 is not in the optimum; round 5: neither
    assert trace.assignment == {1: 0, 2: 1}
    assert trace.decisions == ("sampled", "assigned:0", "assigned:1", "rejected", "rejected")
    assert trace.profit == 17


def test_matching_blocked_edge():
    inst = GapInstance((1, 1), (
        (GapOption(1, 1), GapOption(1, 1)),
        (GapOption(5, 1), GapOption(1, 1)),
        (GapOption(9, 1), GapOption(1, 1)),
    ))
    params = SeqParams(Fraction(1, 3), 1, Fraction(1, 2), 3)
    trace = run_matching_al(inst, [0, 1, 2], params)
    # item 2 wants resource 0, which item 1 already holds
    assert trace.decisions == ("sampled", "assigned:0", "blocked-capacity")


@pytest.mark.parametrize("seed", range(40))
def test_matching_matches_naive(seed):
    rng = random.Random(seed)
    n, m = rng.randint(10, 20), rng.randint(1, 4)
    inst = large_only(rng, n, m)
    params = SeqParams(Fraction(rng.randint(1, 4), 10), Fraction(rng.randint(5, 10), 10),
                       Fraction(1, 2), n)
    perm = random_permutation(n, seed, 0)
    trace = run_matching_al(inst, perm, params)
    assert trace.assignment == naive_matching(inst, perm.order, params.cn, params.dn)
    assert len(set(trace.assignment.values())) == len(trace.assignment)


@pytest.mark.parametrize("seed", range(10))
def test_lp_fast_matches_exact(seed):
    rng = random.Random(seed)
    inst = classify_gap(random_gap(rng, 25, rng.randint(1, 3), W=30), Fraction(1, 2)).small
    params = SeqParams(Fraction(1, 10), Fraction(2, 5), Fraction(1, 2), inst.n)
    perm = random_permutation(inst.n, seed, 0)
    fast = run_lp_as(inst, perm, params, rng=coin_rng(seed, 0))
    slow = run_lp_as(inst, perm, params, rng=coin_rng(seed, 0), lp_factory=ExactGapLP)
    assert fast.decisions == slow.decisions
    assert fast.profit == slow.profit


@pytest.mark.parametrize("seed", range(25))
def test_single_resource_lp_equals_knapsack(seed):
    # one resource: LP 1 is the fractional knapsack and both algorithms coincide
    rng = random.Random(seed)
    n, W = rng.randint(8, 30), 60
    sizes = [rng.randint(1, W // 2) for _ in range(n)]
    profits = rng.sample(range(1, 10**5), n)  # distinct densities almost surely
    gap = GapInstance((W,), tuple((GapOption(p, s),) for p, s in zip(profits, sizes)))
    kp = KnapsackInstance.from_lists(W, sizes, profits)
    params = SeqParams(Fraction(1, 10), Fraction(2, 5), Fraction(1, 2), n)
    perm = random_permutation(n, seed, 0)
    a = run_lp_as(gap, perm, params, rng=coin_rng(seed, 0))
    b = run_as(kp, perm, params, rng=coin_rng(seed, 0))
    assert sorted(a.assignment) == sorted(b.packed_ids)
    assert a.coin_rounds == b.coin_rounds


def test_lp_guard():
    inst = GapInstance((4,), tuple((GapOption(p, 2),) for p in (5, 4, 3, 2)))
    params = SeqParams(Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), 4)  # dn = 1
    trace = run_lp_as(inst, [3, 0, 1, 2], params, rng=np.random.default_rng(0))
    assert trace.decisions[:3] == ("sampled", "assigned:0", "assigned:0")
    assert trace.residuals[-1] == (0,)
    tr = run_lp_as(inst, [3, 0, 1, 2], params, rng=np.random.default_rng(0),
                   residuals_at_start=[1])
    assert tr.decisions[1] == "blocked-capacity"


def test_views_are_enforced():
    inst = GapInstance((4,), ((GapOption(1, 1),), (GapOption(1, 3),)))
    params = gap_params(2, c=Fraction(1, 2), d=1)
    with pytest.raises(ParameterError):
        run_matching_al(inst, [0, 1], params)
    with pytest.raises(ParameterError):
        run_lp_as(inst, [0, 1], params)


@pytest.mark.parametrize("seed", range(15))
def test_sequential_feasible(seed):
    rng = random.Random(seed)
    inst = random_gap(rng, 30, 3, W=25)
    params = gap_params(inst.n)
    trace = run_sequential_gap(inst, random_permutation(inst.n, seed, 0), params,
                               rng=coin_rng(seed, 0))
    for row in trace.residuals:
        assert all(x >= 0 for x in row)
    load = [Fraction(0)] * inst.m
    for i, r in trace.assignment.items():
        load[r] += inst.items[i][r].size
    assert all(l <= w for l, w in zip(load, inst.capacities))
    assert trace.profit == sum(inst.items[i][r].profit for i, r in trace.assignment.items())


def test_prepared_from_arrays_matches_instance():
    rng = random.Random(3)
    inst = large_only(rng, 12, 3)
    w = np.array([[int(o.profit) for o in opts] for opts in inst.items])
    a = PreparedGap(inst, Fraction(1, 2))
    b = PreparedGap.from_arrays([1, 1, 1], np.ones_like(w), w, Fraction(1, 2))
    order = np.array(random_permutation(12, 0, 0).order)
    ra = simulate_matching(a, order, 3, 10)
    rb = simulate_matching(b, order, 3, 10)
    assert ra.events == rb.events
    assert np.array_equal(a.large, b.large)


def test_trace_json():
    inst = GapInstance((1,), ((GapOption(2, 1),), (GapOption(3, 1),)))
    trace = run_matching_al(inst, [0, 1], gap_params(2, c=Fraction(1, 2), d=1))
    d = trace.to_dict()
    assert d["assignment"] == {"1": 0}
    assert d["decisions"] == ["sampled", "assigned:0"]
