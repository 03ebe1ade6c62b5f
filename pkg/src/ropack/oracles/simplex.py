"""Exact primal simplex for ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``.

The tableau is kept integral (fraction-free pivoting): every stored entry is
the true entry times the current denominator ``D``, which is the previous
pivot element.  Division by ``D`` after each update is exact.  Entering and
leaving variables follow Bland's rule, so the method terminates without any
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from ropack.core import as_fraction
from ropack.errors import ParameterError


@dataclass(frozen=True)
class LPResult:
    x: tuple[Fraction, ...]
    value: Fraction
    duals: tuple[Fraction, ...]
    pivots: int


def _scale_row(row: Sequence[Fraction]) -> tuple[list[int], int]:
    den = 1
    for v in row:
        den = lcm(den, v.denominator)
    return [int(v * den) for v in row], den


def simplex_max(c: Sequence, A: Sequence[Sequence], b: Sequence,
                max_pivots: int | None = None) -> LPResult:
    """Solve the LP exactly; the slack basis must be feasible (``b >= 0``).

    Returns the optimal basic solution, its value, and the optimal dual
    prices of the ``A x <= b`` rows.  Raises :class:`ParameterError` on an
    unbounded problem.
    """
    c = [as_fraction(v) for v in c]
    A = [[as_fraction(v) for v in row] for row in A]
    b = [as_fraction(v) for v in b]
    n_rows, n_cols = len(A), len(c)
    if any(len(row) != n_cols for row in A) or len(b) != n_rows:
        raise ParameterError("inconsistent LP dimensions")
    if any(v < 0 for v in b):
        raise ParameterError("right-hand side must be non-negative")

    width = n_cols + n_rows + 1
    T = np.zeros((n_rows + 1, width), dtype=object)
    for i in range(n_rows):
        ints, den = _scale_row(A[i] + [b[i]])
        # slack coefficient is 1 before scaling, hence den afterwards
        T[i, :n_cols] = ints[:n_cols]
        T[i, n_cols + i] = den
        T[i, -1] = ints[-1]
    obj_ints, obj_scale = _scale_row(c)
    T[n_rows, :n_cols] = obj_ints

    basis = list(range(n_cols, n_cols + n_rows))
    D = 1
    pivots = 0
    obj = T[n_rows]
    while True:
        entering = next((j for j in range(width - 1) if obj[j] > 0), None)
        if entering is None:
            break
        col = T[:n_rows, entering]
        leave, best = None, None
        for i in range(n_rows):
            a = col[i]
            if a <= 0:
                continue
            # compare T[i,-1]/a with best ratio, ties to smallest basic index
            if best is None:
                leave, best = i, (T[i, -1], a)
                continue
            lhs = T[i, -1] * best[1]
            rhs = best[0] * a
            if lhs < rhs or (lhs == rhs and basis[i] < basis[leave]):
                leave, best = i, (T[i, -1], a)
        if leave is None:
            raise ParameterError("LP is unbounded")
        p = T[leave, entering]
        pivot_row = T[leave].copy()
        factor = T[:, entering].copy()
        T = (T * p - np.outer(factor, pivot_row)) // D
        T[leave] = pivot_row
        D = p
        basis[leave] = entering
        obj = T[n_rows]
        pivots += 1
        if max_pivots is not None and pivots > max_pivots:
            raise ParameterError("pivot limit exceeded")

    x = [Fraction(0)] * n_cols
    for i, var in enumerate(basis):
        if var < n_cols:
            x[var] = Fraction(int(T[i, -1]), int(D))
    value = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    duals = []
    for i in range(n_rows):
        # row scaling cancels: the slack's reduced cost is -y_i * obj_scale
        duals.append(Fraction(-int(T[n_rows, n_cols + i]), int(D)) / obj_scale)
    return LPResult(tuple(x), value, tuple(duals), pivots)
