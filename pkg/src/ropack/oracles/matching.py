"""Maximum-weight bipartite matching via the Hungarian method with potentials."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ropack.core import as_fraction


@dataclass(frozen=True)
class Matching:
    edges: frozenset[tuple[int, int]]
    weight: Fraction

    def resource_of(self, online: int):
        for l, r in self.edges:
            if l == online:
                return r
        return None


def _assignment_min(cost: list[list]) -> list[int]:
    """Min-cost assignment of every row to a distinct column (rows <= cols).

    Returns ``col_of_row``.  Works with any exactly ordered numeric type.
    """
    n = len(cost)
    m = len(cost[0])
    INF = None
    u = [0] * (n + 1)
    v = [0] * (m + 1)
    p = [0] * (m + 1)
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = -1
            for j in range(1, m + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                if minv[j] is INF or cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if delta is INF or minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    col_of_row = [-1] * n
    for j in range(1, m + 1):
        if p[j]:
            col_of_row[p[j] - 1] = j - 1
    return col_of_row


def matching_opt(weights: Sequence[Sequence]) -> Matching:
    """Maximum total weight matching of a rectangular online x resource table.

    Negative and zero weights are treated as absent edges; zero-weight edges
    never appear in the result.
    """
    table = [[max(as_fraction(w), Fraction(0)) for w in row] for row in weights]
    n_rows = len(table)
    if n_rows == 0 or not table[0]:
        return Matching(frozenset(), Fraction(0))
    n_cols = len(table[0])
    transpose = n_rows > n_cols
    if transpose:
        table = [[table[i][j] for i in range(n_rows)] for j in range(n_cols)]
    cost = [[-w for w in row] for row in table]
    col_of_row = _assignment_min(cost)
    edges = set()
    total = Fraction(0)
    for i, j in enumerate(col_of_row):
        w = table[i][j]
        if w > 0:
            edges.add((j, i) if transpose else (i, j))
            total += w
    return Matching(frozenset(edges), total)
