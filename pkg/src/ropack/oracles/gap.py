"""Fractional (LP 1) and integral optima for the generalized assignment problem.

``gap_opt_fractional`` is exact: rational simplex inside a column-generation
loop, so large instances only ever pivot on the few items that matter.
``FastGapLP`` is the floating-point counterpart used inside simulations,
where LP 1 must be re-solved as items are revealed one at a time.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from ropack.config import CAPS
from ropack.core import GapInstance, GapOption
from ropack.errors import CapabilityError
from ropack.oracles.simplex import simplex_max


@dataclass(frozen=True)
class GapFractional:
    coefficients: Mapping[tuple[int, int], Fraction]
    value: Fraction
    duals: tuple[Fraction, ...] = ()

    def item_vector(self, item: int, m: int) -> list[Fraction]:
        return [self.coefficients.get((item, r), Fraction(0)) for r in range(m)]


def _restricted_lp(instance: GapInstance, subset: list[int]):
    cols = [(i, r) for i in subset for r in range(instance.m)
            if instance.items[i][r].profit > 0]
    c = [instance.items[i][r].profit for i, r in cols]
    rows = []
    for r in range(instance.m):
        rows.append([instance.items[i][rr].size if rr == r else 0 for i, rr in cols])
    b = list(instance.capacities)
    for i in subset:
        rows.append([1 if ii == i else 0 for ii, _ in cols])
        b.append(1)
    return cols, c, rows, b


def _initial_subset(instance: GapInstance) -> list[int]:
    chosen = set()
    for r, w in enumerate(instance.capacities):
        ranked = sorted((i for i in range(instance.n) if instance.items[i][r].profit > 0),
                        key=lambda i: (-(instance.items[i][r].profit / instance.items[i][r].size), i))
        filled = Fraction(0)
        for i in ranked:
            chosen.add(i)
            filled += instance.items[i][r].size
            if filled > 2 * w:
                break
    return sorted(chosen)


def gap_opt_fractional(instance: GapInstance, column_generation: bool = True) -> GapFractional:
    """Optimal basic solution of LP 1, computed in exact arithmetic.

    With ``column_generation`` the LP is first solved on a subset of items and
    the remaining items are priced with the resource duals; any item with a
    positive reduced cost joins the subset and the LP is solved again.  The
    loop ends with a dual-feasible, hence optimal, solution of the full LP.
    """
    n, m = instance.n, instance.m
    subset = _initial_subset(instance) if column_generation else list(range(n))
    while True:
        cols, c, A, b = _restricted_lp(instance, subset)
        res = simplex_max(c, A, b)
        lam = res.duals[:m]
        if not column_generation:
            break
        inside = set(subset)
        extra = [j for j in range(n) if j not in inside and any(
            instance.items[j][r].profit - lam[r] * instance.items[j][r].size > 0
            for r in range(m))]
        if not extra:
            break
        subset = sorted(inside.union(extra))
    coeffs = {col: x for col, x in zip(cols, res.x) if x != 0}
    return GapFractional(coeffs, res.value, tuple(lam))


def gap_opt_integral(instance: GapInstance, cap: int | None = None):
    """Best assignment by enumerating every item -> resource-or-none map."""
    cap = CAPS.gap_enum_max_assignments if cap is None else cap
    n, m = instance.n, instance.m
    if (m + 1) ** n > cap:
        raise CapabilityError(f"(m+1)^n = {(m + 1) ** n} exceeds the enumeration cap {cap}")
    best = Fraction(0)
    best_assign: dict[int, int | None] = {i: None for i in range(n)}
    caps = instance.capacities
    for choice in itertools.product(range(-1, m), repeat=n):
        load = [Fraction(0)] * m
        value = Fraction(0)
        for i, r in enumerate(choice):
            if r >= 0:
                opt = instance.items[i][r]
                load[r] += opt.size
                value += opt.profit
        if value > best and all(load[r] <= caps[r] for r in range(m)):
            best = value
            best_assign = {i: (r if r >= 0 else None) for i, r in enumerate(choice)}
    return best, best_assign


class FastGapLP:
    """LP 1 over a growing item set, re-solved only when it has to be.

    After each solve the resource duals ``lam`` certify optimality.  A newly
    revealed item whose reduced costs ``v - lam * s`` are all non-positive
    leaves the current solution optimal with the new item at zero, so no
    re-solve is needed.  Otherwise the next query re-solves LP 1 by column
    generation: an (item, resource) column enters the model only once it
    prices out positive, and columns never leave.

    The model lives in a persistent HiGHS instance so each re-solve starts
    from the previous basis.  If the incremental interface is unavailable,
    every re-solve falls back to a cold ``scipy.optimize.linprog`` call.
    """

    def __init__(self, capacities, capacity_items: int, tol: float = 1e-9, batch: int = 32):
        self.W = np.asarray(capacities, dtype=float)
        self.m = len(self.W)
        self.V = np.zeros((capacity_items, self.m))
        self.S = np.ones((capacity_items, self.m))
        self.k = 0
        self.batch = batch
        self.x = np.zeros((capacity_items, self.m))
        self.in_model = np.zeros((capacity_items, self.m), dtype=bool)
        self.row_of = np.full(capacity_items, -1, dtype=np.int64)
        self.col_of: list[list[int]] = [[] for _ in range(capacity_items)]
        self.lam = None
        self.tol = tol
        self.dirty = True
        self.solves = 0
        self._highs = _new_highs(self.W) if _hc is not None else None
        self._col_item = np.zeros(capacity_items * self.m, dtype=np.int64)
        self._col_res = np.zeros(capacity_items * self.m, dtype=np.int64)
        self._ncols = 0
        self._rows = 0

    def add_item(self, profits, sizes) -> int:
        j = self.k
        self.V[j] = profits
        self.S[j] = sizes
        self.k += 1
        if self.lam is not None and not self.dirty:
            rc = self.V[j] - self.lam * self.S[j]
            if np.any(rc > self.tol * max(1.0, float(np.max(self.V[j])))):
                self.dirty = True
        return j

    def coefficients(self, j: int) -> np.ndarray:
        if self.dirty:
            self._solve()
        return self.x[j].copy()

    def value(self) -> float:
        if self.dirty:
            self._solve()
        return float(np.sum(self.x[:self.k] * self.V[:self.k]))

    def _violators(self, lam) -> np.ndarray:
        V, S = self.V[:self.k], self.S[:self.k]
        scale = np.maximum(1.0, V.max(axis=1))
        rc = V - lam * S
        bad = (rc > self.tol * scale[:, None]) & ~self.in_model[:self.k]
        for r in range(self.m):
            rows = np.flatnonzero(bad[:, r])
            if len(rows) > self.batch:
                keep = np.argpartition(-(rc[rows, r] / S[rows, r]), self.batch)[:self.batch]
                bad[rows, r] = False
                bad[rows[keep], r] = True
        return bad

    def _solve(self):
        extra = self._violators(np.zeros(self.m) if self.lam is None else self.lam)
        while True:
            lam = self._resolve(extra)
            extra = self._violators(lam)
            if not extra.any():
                break
        self.lam = lam
        self.dirty = False
        self.solves += 1

    def _resolve(self, new_cols: np.ndarray) -> np.ndarray:
        k = self.k
        self.in_model[:k] |= new_cols
        if self._highs is None:
            V = np.where(self.in_model[:k], self.V[:k], 0.0)
            xs, lam = _linprog_restricted(V, self.S[:k], self.W)
            self.x[:k] = xs
            return lam
        h, m = self._highs, self.m
        items, res = np.nonzero(new_cols)
        q = len(items)
        if q:
            first = self._ncols
            h.addCols(q, self.V[items, res], np.zeros(q), np.ones(q), q,
                      np.arange(q, dtype=np.int32), res.astype(np.int32), self.S[items, res])
            self._col_item[first:first + q] = items
            self._col_res[first:first + q] = res
            self._ncols += q
            for i in np.unique(items).tolist():
                cols = self.col_of[i]
                cols.extend((first + np.flatnonzero(items == i)).tolist())
                if len(cols) < 2:
                    continue
                if self.row_of[i] < 0:
                    self.row_of[i] = m + self._rows
                    self._rows += 1
                    h.addRow(-_hc.kHighsInf, 1.0, len(cols), np.array(cols, dtype=np.int32),
                             np.ones(len(cols)))
                else:
                    for c in cols[-int(np.sum(items == i)):]:
                        h.changeCoeff(int(self.row_of[i]), int(c), 1.0)
        h.run()
        status = h.getModelStatus()
        if status != _hc.HighsModelStatus.kOptimal:
            raise RuntimeError(f"HiGHS failed on LP 1: {h.modelStatusToString(status)}")
        sol = h.getSolution()
        xs = np.clip(np.asarray(sol.col_value), 0.0, 1.0)
        self.x[:k] = 0.0
        nc = self._ncols
        self.x[self._col_item[:nc], self._col_res[:nc]] = xs
        return np.maximum(np.asarray(sol.row_dual)[:m], 0.0)


try:
    from scipy.optimize._highspy import _core as _hc
except ImportError:      # pragma: no cover - depends on the scipy build
    _hc = None


def _new_highs(W):
    h = _hc._Highs()
    h.setOptionValue("output_flag", False)
    h.changeObjectiveSense(_hc.ObjSense.kMaximize)
    for w in W:
        h.addRow(-_hc.kHighsInf, float(w), 0, np.zeros(0, dtype=np.int32), np.zeros(0))
    return h


def _linprog_restricted(V, S, W):
    m = len(W)
    k = len(V)
    mask = V > 0
    rows_i, cols_r = np.nonzero(mask)
    nvar = len(rows_i)
    if nvar == 0:
        return np.zeros((k, m)), np.zeros(m)
    var = np.arange(nvar)
    A = sp.csr_matrix(
        (np.concatenate([S[rows_i, cols_r], np.ones(nvar)]),
         (np.concatenate([cols_r, m + rows_i]), np.concatenate([var, var]))),
        shape=(m + k, nvar))
    b = np.concatenate([W, np.ones(k)])
    res = linprog(-V[rows_i, cols_r], A_ub=A, b_ub=b, bounds=(0, 1), method="highs")
    if res.status != 0:
        raise RuntimeError(f"HiGHS failed on LP 1: {res.message}")
    xs = np.zeros((k, m))
    xs[rows_i, cols_r] = np.clip(res.x, 0.0, 1.0)
    return xs, np.maximum(-res.ineqlin.marginals[:m], 0.0)


class ExactGapLP:
    """Drop-in replacement for ``FastGapLP`` that re-solves LP 1 from scratch
    in exact arithmetic on every query.  Meant for small instances and for
    cross-checking the floating-point path."""

    def __init__(self, capacities, capacity_items: int):
        self.W = [Fraction(w) for w in np.asarray(capacities, dtype=float).tolist()]
        self.m = len(self.W)
        self.rows: list[list[GapOption]] = []
        self.solves = 0

    def add_item(self, profits, sizes) -> int:
        opts = []
        for v, s in zip(np.asarray(profits, dtype=float).tolist(),
                        np.asarray(sizes, dtype=float).tolist()):
            opts.append(GapOption(Fraction(v), Fraction(s)) if v > 0
                        else GapOption(Fraction(0), Fraction(max(s, 1.0))))
        self.rows.append(opts)
        return len(self.rows) - 1

    def solution(self) -> GapFractional:
        self.solves += 1
        return gap_opt_fractional(GapInstance(tuple(self.W), tuple(tuple(r) for r in self.rows)))

    def coefficients(self, j: int) -> np.ndarray:
        return np.array([float(x) for x in self.solution().item_vector(j, self.m)])

    def value(self) -> float:
        return float(self.solution().value)


def gap_dual_bound(instance: GapInstance, lam=None) -> Fraction:
    """Exact rational upper bound on LP 1 (hence on OPT) from resource prices.

    For any ``lam >= 0`` weak duality gives
    ``sum_r W_r lam_r + sum_i max(0, max_r (v_ir - lam_r s_ir))`` as an upper
    bound.  Without ``lam`` the prices come from a floating-point solve of LP 1,
    so the bound exceeds the LP optimum only by solver round-off; the
    evaluation itself is exact.
    """
    if lam is None:
        lp = FastGapLP([float(w) for w in instance.capacities], instance.n)
        for opts in instance.items:
            lp.add_item([float(o.profit) for o in opts], [float(o.size) for o in opts])
        lp.value()
        lam = lp.lam
    # exact inputs stay exact; floats are converted without rounding
    lam = [max(x if isinstance(x, Fraction) else Fraction(float(x)), Fraction(0)) for x in lam]
    bound = sum((w * l for w, l in zip(instance.capacities, lam)), Fraction(0))
    for opts in instance.items:
        best = max(o.profit - l * o.size for o, l in zip(opts, lam))
        if best > 0:
            bound += best
    return bound
