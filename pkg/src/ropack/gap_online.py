"""Online GAP: matching for large options, LP rounding for small ones, run in sequence."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from ropack.core import GapInstance, format_fraction
from ropack.errors import ParameterError
from ropack.knapsack_online import SeqParams, _default_rng, _order_array, param_fraction
from ropack.oracles.gap import FastGapLP

GAP_DEFAULTS = dict(c=Fraction("0.5261"), d=Fraction("0.6906"), delta=Fraction(1, 2))


@dataclass(frozen=True)
class AssignmentTrace:
    """Per-round record of one online GAP run.

    ``decisions`` holds ``sampled``, ``rejected``, ``blocked-capacity`` or
    ``assigned:<r>``; ``residuals[l][r]`` is the free capacity of resource
    ``r`` after round ``l + 1``.
    """

    decisions: tuple[str, ...]
    assignment: dict
    profit: Fraction
    residuals: tuple[tuple[Fraction, ...], ...]
    coin_rounds: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "decisions": list(self.decisions),
            "assignment": {str(k): v for k, v in sorted(self.assignment.items())},
            "profit": format_fraction(self.profit),
            "residuals": [[format_fraction(x) for x in row] for row in self.residuals],
            "coin_rounds": list(self.coin_rounds),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


class PreparedGap:
    def __init__(self, instance: GapInstance, delta):
        delta = param_fraction(delta)
        if not 0 < delta < 1:
            raise ParameterError("delta must lie in (0, 1)")
        n, m = instance.n, instance.m
        scales = []
        for r, w in enumerate(instance.capacities):
            s = w.denominator
            for opts in instance.items:
                s = math.lcm(s, opts[r].size.denominator)
            scales.append(s)
        pden = 1
        for opts in instance.items:
            for o in opts:
                pden = math.lcm(pden, o.profit.denominator)
        size = np.zeros((n, m), dtype=object)
        profit = np.zeros((n, m), dtype=object)
        for i, opts in enumerate(instance.items):
            for r, o in enumerate(opts):
                size[i, r] = int(o.size * scales[r])
                profit[i, r] = int(o.profit * pden)
        W = [int(w * s) for w, s in zip(instance.capacities, scales)]
        self._setup(instance, delta, W, scales, pden, size, profit)

    @classmethod
    def from_arrays(cls, capacities, sizes, profits, delta) -> "PreparedGap":
        """Integer data without building a :class:`GapInstance` first; the
        fast path for simulations that draw a fresh table every trial."""
        delta = param_fraction(delta)
        if not 0 < delta < 1:
            raise ParameterError("delta must lie in (0, 1)")
        sizes = np.asarray(sizes, dtype=np.int64)
        profits = np.asarray(profits, dtype=np.int64)
        W = [int(w) for w in capacities]
        if sizes.shape != profits.shape or sizes.ndim != 2 or sizes.shape[1] != len(W):
            raise ParameterError("sizes and profits must both be n x m")
        if (sizes <= 0).any() or (profits < 0).any():
            raise ParameterError("sizes must be positive and profits nonnegative")
        self = cls.__new__(cls)
        self._setup(None, delta, W, [1] * len(W), 1,
                    sizes.astype(object), profits.astype(object))
        return self

    def _setup(self, instance, delta, W, scales, pden, size, profit):
        self.instance = instance
        self.delta = delta
        self.n, self.m = size.shape
        self.scales = scales
        self.W = W
        self.pden = pden
        self.size = size
        self.profit = profit
        # size > delta * W_r, compared exactly in integers
        big = delta.denominator * size > np.array([delta.numerator * w for w in W], dtype=object)
        pos = profit > 0
        self.large = (pos & big).astype(bool)
        self.small = (pos & ~big).astype(bool)
        self.threshold = [math.ceil(delta * w) for w in W]
        self.w_large = np.where(self.large, profit, 0).astype(float)
        self.v_small = np.where(self.small, profit, 0).astype(float)
        self.s_small = size.astype(float)
        self.has_large = self.large.any(axis=1)
        self.has_small = self.small.any(axis=1)


@dataclass
class _GapRun:
    codes: np.ndarray                  # -1 sampled, -2 rejected, -3 blocked, r >= 0 assigned
    events: list = field(default_factory=list)   # (round, item, resource)
    coins: list = field(default_factory=list)
    matched_round: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    lp_solves: int = 0


SAMPLED, REJECTED, BLOCKED = -1, -2, -3


def _new_run(prep: PreparedGap, sampled_until: int, residual) -> _GapRun:
    codes = np.full(prep.n, REJECTED, dtype=np.int64)
    codes[:sampled_until] = SAMPLED
    return _GapRun(codes, [], [], [None] * prep.m, list(residual))


def _matching_phase(prep: PreparedGap, order: np.ndarray, cn: int, dn: int, run: _GapRun):
    """Tentative-edge matching over rounds ``cn+1 .. dn``.

    A maximum-weight matching of the revealed graph only ever needs, for each
    resource, its ``m`` heaviest revealed neighbours, so each round solves an
    assignment problem on at most ``m * m`` candidate rows.
    """
    m = prep.m
    w = prep.w_large
    top: list[list[tuple[float, int]]] = [[] for _ in range(m)]
    taken = [False] * m

    def reveal(p, i):
        row = w[i]
        for r in range(m):
            wr = row[r]
            if wr <= 0:
                continue
            lst = top[r]
            if len(lst) < m:
                lst.append((wr, p))
                lst.sort(key=lambda t: (-t[0], t[1]))
            elif wr > lst[-1][0]:
                lst[-1] = (wr, p)
                lst.sort(key=lambda t: (-t[0], t[1]))

    for p in range(min(cn, prep.n)):
        i = int(order[p])
        if prep.has_large[i]:
            reveal(p, i)
    for p in range(cn, dn):
        i = int(order[p])
        if not prep.has_large[i]:
            continue
        reveal(p, i)
        cand = sorted({q for lst in top for _, q in lst})
        if p not in cand:
            continue
        sub = w[order[cand]]
        rows, cols = linear_sum_assignment(sub, maximize=True)
        k = cand.index(p)
        hit = np.flatnonzero(rows == k)
        if len(hit) == 0:
            continue
        r = int(cols[hit[0]])
        if sub[k, r] <= 0:
            continue
        if taken[r]:
            run.codes[p] = BLOCKED
            continue
        taken[r] = True
        run.residual[r] -= int(prep.size[i, r])
        run.codes[p] = r
        run.events.append((p, i, r))
        run.matched_round[r] = p


def _snap(x, tol=1e-9):
    x = np.asarray(x, dtype=float).copy()
    x[x < tol] = 0.0
    x[x > 1.0 - tol] = 1.0
    return x


def _lp_phase(prep: PreparedGap, order: np.ndarray, dn: int, rng, run: _GapRun,
              lp_factory=None):
    m = prep.m
    lp = (lp_factory or FastGapLP)(np.array(prep.W, dtype=float), prep.n)
    slot = {}
    for p in range(prep.n):
        i = int(order[p])
        if not prep.has_small[i]:
            continue
        slot[i] = lp.add_item(prep.v_small[i], prep.s_small[i])
        if p < dn:
            continue
        x = _snap(lp.coefficients(slot[i]))
        if not x.any():
            continue
        if np.all((x == 0) | (x == 1)):
            r = int(np.flatnonzero(x)[0])
        else:
            run.coins.append(p)
            r = int(np.searchsorted(np.cumsum(x), rng.random(), side="right"))
            if r >= m:
                continue
        if run.residual[r] < prep.threshold[r]:
            run.codes[p] = BLOCKED
            continue
        run.residual[r] -= int(prep.size[i, r])
        run.codes[p] = r
        run.events.append((p, i, r))
    run.lp_solves = getattr(lp, "solves", 0)


def simulate_matching(prep, order, cn, dn) -> _GapRun:
    run = _new_run(prep, cn, prep.W)
    _matching_phase(prep, order, cn, dn, run)
    return run


def simulate_lp(prep, order, dn, rng, residual=None, lp_factory=None) -> _GapRun:
    run = _new_run(prep, dn, prep.W if residual is None else residual)
    _lp_phase(prep, order, dn, rng, run, lp_factory)
    return run


def simulate_sequential_gap(prep, order, cn, dn, rng, lp_factory=None) -> _GapRun:
    run = _new_run(prep, cn, prep.W)
    _matching_phase(prep, order, cn, dn, run)
    _lp_phase(prep, order, dn, rng, run, lp_factory)
    return run


def run_profit(prep: PreparedGap, run: _GapRun) -> Fraction:
    return Fraction(sum(int(prep.profit[i, r]) for _, i, r in run.events), prep.pden)


def _trace(prep: PreparedGap, run: _GapRun, start) -> AssignmentTrace:
    used = [[0] * prep.m for _ in range(prep.n)]
    for p, i, r in run.events:
        used[p][r] = int(prep.size[i, r])
    rows = []
    free = list(start)
    for p in range(prep.n):
        for r in range(prep.m):
            free[r] -= used[p][r]
        rows.append(tuple(Fraction(free[r], prep.scales[r]) for r in range(prep.m)))
    names = {SAMPLED: "sampled", REJECTED: "rejected", BLOCKED: "blocked-capacity"}
    decisions = tuple(names.get(c, f"assigned:{c}") for c in run.codes.tolist())
    return AssignmentTrace(
        decisions=decisions,
        assignment={i: r for _, i, r in run.events},
        profit=run_profit(prep, run),
        residuals=tuple(rows),
        coin_rounds=tuple(p + 1 for p in sorted(run.coins)),
    )


def _check_params(params: SeqParams, n: int):
    if params.n != n:
        raise ParameterError(f"params are for n={params.n}, instance has n={n}")


def run_matching_al(instance: GapInstance, perm, params: SeqParams) -> AssignmentTrace:
    """Large-option algorithm: after ``cn`` sampled rounds, commit the arriving
    item's edge in a maximum-weight matching of the revealed graph whenever
    that resource is still free; stop after round ``dn``."""
    prep = PreparedGap(instance, params.delta)
    if prep.small.any():
        raise ParameterError("instance holds positive-profit small options; split it first")
    _check_params(params, prep.n)
    order = _order_array(perm, prep.n)
    run = simulate_matching(prep, order, params.cn, params.dn)
    return _trace(prep, run, prep.W)


def run_lp_as(instance: GapInstance, perm, params: SeqParams,
              rng: Optional[np.random.Generator] = None,
              residuals_at_start=None, lp_factory=None) -> AssignmentTrace:
    """Small-option algorithm: after ``dn`` sampled rounds, solve LP 1 on the
    revealed items, pick resource ``r`` with probability ``x[i, r]`` and assign
    if ``r`` still has at least ``delta * W_r`` free."""
    prep = PreparedGap(instance, params.delta)
    if prep.large.any():
        raise ParameterError("instance holds positive-profit large options; split it first")
    _check_params(params, prep.n)
    order = _order_array(perm, prep.n)
    rng = _default_rng(perm) if rng is None else rng
    start = prep.W
    if residuals_at_start is not None:
        start = [math.floor(Fraction(x) * s) for x, s in zip(residuals_at_start, prep.scales)]
    run = simulate_lp(prep, order, params.dn, rng, start, lp_factory)
    return _trace(prep, run, start)


def run_sequential_gap(instance: GapInstance, perm, params: SeqParams,
                       rng: Optional[np.random.Generator] = None,
                       lp_factory=None) -> AssignmentTrace:
    """Matching over rounds ``cn+1 .. dn``, LP rounding afterwards, with the
    per-resource capacities shared between the two phases."""
    prep = PreparedGap(instance, params.delta)
    _check_params(params, prep.n)
    order = _order_array(perm, prep.n)
    rng = _default_rng(perm) if rng is None else rng
    run = simulate_sequential_gap(prep, order, params.cn, params.dn, rng, lp_factory)
    return _trace(prep, run, prep.W)


def gap_params(n: int, c=None, d=None, delta=None) -> SeqParams:
    return SeqParams(GAP_DEFAULTS["c"] if c is None else c,
                     GAP_DEFAULTS["d"] if d is None else d,
                     GAP_DEFAULTS["delta"] if delta is None else delta, n)
