"""Closed-form acceptance probabilities, case bounds and competitive-ratio functions.

Exact finite-n quantities are rationals built from big-integer binomials.
Asymptotic evaluators take the n -> infinity limit, dropping every o(1) term,
and accept numpy arrays so the parameter search can evaluate whole grids.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from ropack.config import CAPS
from ropack.core import as_fraction, format_fraction
from ropack.errors import ContractError, ParameterError

TABLE2_PARAMS = ((0.23053, 1.0), (0.42291, 0.64570))
TYPES = "ABCDEFGHIJKLM"


# ---------------------------------------------------------------- exact, finite n

def _check_counts(n: int, cn: int, dn: int):
    if n < 2:
        raise ParameterError("n must be at least 2")
    if not 1 <= cn <= dn <= n:
        raise ParameterError(f"need 1 <= cn <= dn <= n, got cn={cn}, dn={dn}, n={n}")


def _log_comb(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def _comb_ratio_float(a: int, b: int, c: int, e: int) -> float:
    """C(a, b) / C(c, e) in floating point, 0 when the numerator vanishes."""
    if b < 0 or b > a:
        return 0.0
    return math.exp(_log_comb(a, b) - _log_comb(c, e))


def p_first_exact(n: int, cn: int, dn: int, i: int):
    """Probability that the item of rank ``i`` is the first one the large-item
    algorithm packs, for sampling length ``cn`` and stopping round ``dn``.

    Returns a ``Fraction`` for ``n`` up to the configured binomial cap and a
    float (log-gamma evaluation) beyond it.
    """
    _check_counts(n, cn, dn)
    if not 1 <= i <= n:
        raise ParameterError(f"rank i must lie in [1, {n}]")
    ks = range(cn + 1, dn + 1)
    if n <= CAPS.exact_binomial_max_n:
        total = sum((Fraction(math.comb(n - i, k - 1), math.comb(n - 2, k - 2)) for k in ks),
                    Fraction(0))
        return Fraction(cn, n) / (n - 1) * total
    total = math.fsum(_comb_ratio_float(n - i, k - 1, n - 2, k - 2) for k in ks)
    return cn / n / (n - 1) * total


def p_pair_exact(n: int, cn: int, dn: int, j: int, i: int | None = None):
    """Probability that a fixed item ``i`` of better rank is packed first and
    the item of rank ``j`` second.  The value does not depend on ``i``; pass it
    only to have ``i < j`` validated.  For the reverse order use the same
    call, the two probabilities coincide.
    """
    _check_counts(n, cn, dn)
    if not 2 <= j <= n:
        raise ParameterError(f"rank j must lie in [2, {n}]")
    if i is not None and not 1 <= i < j:
        raise ParameterError("need 1 <= i < j")
    # the double sum over k < l collapses to a single sum with weight (l - cn - 1)
    ls = range(cn + 2, dn + 1)
    if len(ls) == 0:
        return Fraction(0) if n <= CAPS.exact_binomial_max_n else 0.0
    if n <= CAPS.exact_binomial_max_n:
        total = sum((Fraction((l - cn - 1) * math.comb(n - j, l - 2), math.comb(n - 3, l - 3))
                     for l in ls), Fraction(0))
        return Fraction(cn, n * (n - 1) * (n - 2)) * total
    total = math.fsum((l - cn - 1) * _comb_ratio_float(n - j, l - 2, n - 3, l - 3) for l in ls)
    return cn / (n * (n - 1) * (n - 2)) * total


def p_pair(n: int, cn: int, dn: int, i: int, j: int):
    """Ordered pair probability: ``i`` packed first, ``j`` second."""
    if i == j:
        raise ParameterError("a pair needs two distinct items")
    return p_pair_exact(n, cn, dn, max(i, j))


def sum_p_first(n: int, cn: int, dn: int):
    return sum((p_first_exact(n, cn, dn, i) for i in range(1, n + 1)), Fraction(0))


# ---------------------------------------------------------------- packing types

def type_probabilities(p: Mapping[int, object], pp: Mapping[tuple[int, int], object]) -> dict:
    """Packing-type probabilities from single and ordered-pair probabilities."""
    return {
        "A": pp[1, 2] + pp[2, 1],
        "B": pp[1, 3] + pp[3, 1],
        "C": pp[2, 3] + pp[3, 2],
        "D": p[1],
        "E": p[2],
        "F": p[3],
        "G": p[4],
        "H": p[1] - pp[1, 2],
        "I": p[1] - pp[1, 3],
        "J": p[2] - pp[2, 1],
        "K": p[2] - pp[2, 3],
        "L": p[3] - pp[3, 1],
        "M": p[3] - pp[3, 2],
    }


def case_coefficients(t: Mapping[str, object]) -> list[tuple]:
    """``(alpha_w, beta_w, gamma_w)`` for the five optimal-packing cases."""
    zero = t["A"] * 0
    return [
        (t["D"], zero, zero),
        (t["A"], t["H"], t["J"]),
        (t["B"], t["I"], t["E"] + t["L"]),
        (t["C"], t["D"] + t["K"], t["M"]),
        (zero, t["D"], t["E"] + t["F"] + t["G"]),
    ]


def case_values_from_types(t: Mapping[str, object]) -> list:
    out = []
    for a, b, g in case_coefficients(t):
        half = (b + g) / 2
        out.append(a + (half if half <= b else b))
    return out


# ---------------------------------------------------------------- asymptotic

def _check_cd(c, d, strict: bool = False):
    c_arr, d_arr = np.asarray(c, dtype=float), np.asarray(d, dtype=float)
    bad = (c_arr <= 0) | (d_arr > 1) | ((c_arr >= d_arr) if strict else (c_arr > d_arr))
    if np.any(bad):
        raise ParameterError(f"need 0 < c {'<' if strict else '<='} d <= 1, got c={c}, d={d}")


def _p1234(c, d):
    L = np.log(d / c)
    e1, e2, e3 = d - c, d * d - c * c, d ** 3 - c ** 3
    return (c * L,
            c * (L - e1),
            c * (L - 2 * e1 + 0.5 * e2),
            c * (L - 3 * e1 + 1.5 * e2 - e3 / 3))


def _p_pairs(c, d):
    L = np.log(d / c)
    p12 = c * (d - c * L - c)
    p13 = c * (d - c * L - c - d * d / 2 + c * d - c * c / 2)
    return p12, p13


def p_first_asymptotic(c, d, i: int):
    """Limit of the rank-``i`` first-acceptance probability, ``i`` in 1..4."""
    _check_cd(c, d)
    if i not in (1, 2, 3, 4):
        raise ParameterError("asymptotic single-item bounds exist for i in 1..4")
    out = _p1234(np.asarray(c, dtype=float), np.asarray(d, dtype=float))[i - 1]
    return float(out) if np.ndim(out) == 0 else out


def p_pair_asymptotic(c, d, pair):
    """Limit of a pair probability; ``pair`` is 12, 13 or 23 (either order)."""
    _check_cd(c, d)
    key = tuple(sorted(int(ch) for ch in str(pair))) if not isinstance(pair, tuple) \
        else tuple(sorted(pair))
    p12, p13 = _p_pairs(np.asarray(c, dtype=float), np.asarray(d, dtype=float))
    table = {(1, 2): p12, (1, 3): p13, (2, 3): p13}
    if key not in table:
        raise ParameterError("asymptotic pair bounds exist for pairs 12, 13 and 23")
    out = table[key]
    return float(out) if np.ndim(out) == 0 else out


def feasibility_f(x):
    """``2 ln x - 6x + 2x^2 - x^3/3``."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise ParameterError("feasibility_f needs x > 0")
    out = 2 * np.log(arr) - 6 * arr + 2 * arr ** 2 - arr ** 3 / 3
    return float(out) if np.ndim(out) == 0 else out


def feasibility_f_parts(x) -> tuple[Fraction, float]:
    """Exact polynomial part and the logarithmic part ``2 ln x`` of ``feasibility_f``."""
    q = as_fraction(x)
    if q <= 0:
        raise ParameterError("feasibility_f needs x > 0")
    return -6 * q + 2 * q ** 2 - q ** 3 / 3, 2 * math.log(q)


def is_feasible(c, d):
    return feasibility_f(c) >= feasibility_f(d)


def _case_bounds_raw(c, d):
    p1, p2, p3, p4 = _p1234(c, d)
    p12, p13 = _p_pairs(c, d)
    return (p1,
            p12 + (p1 + p2) / 2,
            p13 + (p1 + p2 + p3) / 2,
            p13 + (p1 + p2 + p3) / 2,
            (p1 + p2 + p3 + p4) / 2)


def case_bounds(c: float, d: float) -> tuple[float, float, float, float, float]:
    """Asymptotic lower bounds on E[A_L]/OPT_L for the five optimal-packing cases.

    Valid only where ``f(c) >= f(d)``; elsewhere a ``ContractError`` is raised.
    """
    _check_cd(c, d, strict=True)
    fc, fd = feasibility_f(c), feasibility_f(d)
    if fc < fd:
        raise ContractError(f"f(c) >= f(d) violated: f({c}) = {fc:.6f} < f({d}) = {fd:.6f}")
    return tuple(float(v) for v in _case_bounds_raw(float(c), float(d)))


def ratio_al_general(c: float, d: float) -> float:
    """min over cases of ``alpha + min((beta + gamma)/2, beta)``, valid for any c < d."""
    _check_cd(c, d, strict=True)
    p = dict(enumerate(_p1234(float(c), float(d)), start=1))
    p12, p13 = _p_pairs(float(c), float(d))
    pp = {(1, 2): p12, (2, 1): p12, (1, 3): p13, (3, 1): p13, (2, 3): p13, (3, 2): p13}
    return float(min(case_values_from_types(type_probabilities(p, pp))))


def ratio_AS_bound(c, d, Delta):
    """Asymptotic competitive ratio of the small-item algorithm against OPT_S."""
    c_arr, d_arr = np.asarray(c, dtype=float), np.asarray(d, dtype=float)
    if np.any((c_arr <= 0) | (c_arr > d_arr) | (d_arr >= 1)):
        raise ParameterError(f"need 0 < c <= d < 1, got c={c}, d={d}")
    if Delta < 1:
        raise ParameterError("Delta = 1/(1 - delta) is at least 1")
    out = (c_arr / d_arr) * ((1 - d_arr) * (1 + Delta) + Delta * np.log(d_arr))
    return float(out) if np.ndim(out) == 0 else out


def ratio_matching_bound(c, d):
    """Asymptotic ratio of the matching algorithm against OPT_L: ``c ln(d/c)``."""
    _check_cd(c, d)
    out = np.asarray(c, dtype=float) * np.log(np.asarray(d, dtype=float) / np.asarray(c, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def delta_to_Delta(delta) -> float:
    q = as_fraction(delta)
    if not 0 < q < 1:
        raise ParameterError("delta must lie in (0, 1)")
    return float(1 / (1 - q))


@dataclass(frozen=True)
class RatioBundle:
    problem: str
    c: float
    d: float
    delta: float
    Delta: float
    ratio_AL: float
    ratio_AS: float
    ratio_matching: float
    combined: float
    feasible: bool
    note: str = "asymptotic limits; o(1) terms dropped"

    def to_dict(self) -> dict:
        return asdict(self)


def ratio_bundle(c: float, d: float, delta: float | None = None,
                 problem: str = "knapsack") -> RatioBundle:
    """All asymptotic ratios at one parameter point.

    ``combined`` is the guarantee of the sequential algorithm: the smaller of
    the large-item ratio (case bounds for knapsack, matching for GAP) and the
    small-item ratio.
    """
    if problem not in ("knapsack", "gap"):
        raise ParameterError("problem must be 'knapsack' or 'gap'")
    delta = (1 / 3 if problem == "knapsack" else 1 / 2) if delta is None else float(delta)
    _check_cd(c, d, strict=True)
    Delta = delta_to_Delta(delta)
    r_al = ratio_al_general(c, d)
    r_as = ratio_AS_bound(c, d, Delta) if d < 1 else 0.0
    r_m = ratio_matching_bound(c, d)
    large = r_al if problem == "knapsack" else r_m
    return RatioBundle(problem, float(c), float(d), delta, Delta, r_al, r_as, r_m,
                       min(large, r_as), bool(is_feasible(c, d)))


# ---------------------------------------------------------------- parameter search

@dataclass(frozen=True)
class OptimizeResult:
    problem: str
    c: float
    d: float
    value: float
    grid_step: float
    refined_step: float


def _objective(problem: str, c, d):
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        valid = (c > 0) & (c < d) & (d <= 1)
        cs = np.where(valid, c, 0.5)
        ds = np.where(valid, d, 0.75)
        if problem == "knapsack":
            valid &= d < 1
            ds = np.where(valid, ds, 0.75)
            valid &= feasibility_f(cs) >= feasibility_f(ds)
            val = np.minimum(np.min(np.stack(_case_bounds_raw(cs, ds)), axis=0),
                             ratio_AS_bound(cs, ds, 1.5))
        elif problem == "gap":
            valid &= d < 1
            ds = np.where(valid, ds, 0.75)
            val = np.minimum(ratio_matching_bound(cs, ds), ratio_AS_bound(cs, ds, 2.0))
        elif problem == "knapsack-al":
            valid &= feasibility_f(cs) >= feasibility_f(ds)
            val = np.min(np.stack(_case_bounds_raw(cs, ds)), axis=0)
        else:
            raise ParameterError(f"unknown problem {problem!r}")
    return np.where(valid, val, -np.inf)


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    k = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(k + 1)


def _best(problem, cs, ds):
    if problem == "knapsack-al":
        vals = _objective(problem, cs, np.ones_like(cs))
        k = int(np.argmax(vals))
        return float(cs[k]), 1.0, float(vals[k])
    C, D = np.meshgrid(cs, ds, indexing="ij")
    vals = _objective(problem, C, D)
    k = int(np.argmax(vals))
    a, b = np.unravel_index(k, vals.shape)
    return float(cs[a]), float(ds[b]), float(vals[a, b])


def _profile(problem: str, c: float, d_lo: float, d_hi: float, step: float):
    """Best d for fixed c: dense scan, then bounded scalar polish."""
    if problem == "knapsack-al":
        return 1.0, float(_objective(problem, c, 1.0))
    ds = _grid(max(d_lo, c + step), min(d_hi, 1.0), step)
    if len(ds) == 0:
        return d_lo, -np.inf
    vals = _objective(problem, np.full_like(ds, c), ds)
    k = int(np.argmax(vals))
    d, v = float(ds[k]), float(vals[k])
    if not np.isfinite(v):
        return d, v
    res = minimize_scalar(lambda x: -float(_objective(problem, c, x)),
                          bounds=(max(ds[0], d - step), min(ds[-1], d + step)),
                          method="bounded", options={"xatol": 1e-12})
    if -res.fun > v:
        d, v = float(res.x), float(-res.fun)
    return d, v


def optimize_params(problem: str = "knapsack", grid_step: float = 1e-3,
                    refine: tuple[float, ...] = (1e-4, 1e-5)) -> OptimizeResult:
    """Grid search for the (c, d) maximising the combined asymptotic ratio.

    ``knapsack`` uses the case bounds (subject to ``f(c) >= f(d)``) and the
    small-item bound with ``Delta = 3/2``; ``gap`` uses ``c ln(d/c)`` and the
    small-item bound with ``Delta = 2``; ``knapsack-al`` fixes ``d = 1`` and
    uses the case bounds alone.

    The maximiser sits on a ridge where two bounds cross, so a plain fine
    grid would favour whichever point happens to lie closest to the ridge.
    Refinement therefore scans ``c`` on successively finer grids and, for each
    ``c``, takes the best ``d`` (dense scan plus bounded polish).  Each window
    spans two steps of the previous level and is re-centred until the
    incumbent is interior.
    """
    if not 0 < grid_step <= 1e-3:
        raise ParameterError("grid_step must lie in (0, 1e-3]")
    cs = _grid(grid_step, 1 - grid_step, grid_step)
    c, d, v = _best(problem, cs, None if problem == "knapsack-al" else cs)
    if not np.isfinite(v):
        raise ContractError("no feasible (c, d) on the grid")
    prev, last = grid_step, grid_step
    for step in refine:
        for _ in range(100):
            cs = _grid(max(step, c - 2 * prev), min(1 - step, c + 2 * prev), step)
            best = (v, c, d)
            for cc in cs:
                dd, vv = _profile(problem, float(cc), d - 10 * prev, d + 10 * prev, step)
                if vv > best[0]:
                    best = (vv, float(cc), dd)
            moved = best[0] > v
            v, c, d = best
            at_edge = abs(c - cs[0]) < step / 2 or abs(c - cs[-1]) < step / 2
            if not (moved and at_edge):
                break
        prev, last = step, step
    return OptimizeResult(problem, c, d, v, grid_step, last)


def table2(params=TABLE2_PARAMS) -> list[tuple[float, float, tuple[float, ...]]]:
    return [(c, d, case_bounds(c, d)) for c, d in params]


# ---------------------------------------------------------------- report

@dataclass(frozen=True)
class ProbabilityReport:
    n: int
    cn: int
    dn: int
    p_first: dict = field(default_factory=dict)
    p_pair: dict = field(default_factory=dict)
    type_probs: dict = field(default_factory=dict)
    case_values: tuple = ()

    def to_dict(self) -> dict:
        def fmt(x):
            return format_fraction(x) if isinstance(x, Fraction) else float(x)
        return {
            "n": self.n, "cn": self.cn, "dn": self.dn,
            "p_first": {str(i): fmt(v) for i, v in sorted(self.p_first.items())},
            "p_pair": {f"{i},{j}": fmt(v) for (i, j), v in sorted(self.p_pair.items())},
            "type_probs": {k: fmt(v) for k, v in self.type_probs.items()},
            "case_values": [fmt(v) for v in self.case_values],
        }


def probability_report(n: int, cn: int, dn: int, max_rank: int | None = None) -> ProbabilityReport:
    """Exact single, pair and packing-type probabilities with the five case values.

    Ranks beyond ``n`` contribute probability 0.  ``p_first`` covers ranks up
    to ``max_rank`` (default: all ranks when ``n <= 50``, otherwise 1..4).
    """
    _check_counts(n, cn, dn)
    if max_rank is None:
        max_rank = n if n <= 50 else 4
    zero = Fraction(0) if n <= CAPS.exact_binomial_max_n else 0.0
    p = {i: p_first_exact(n, cn, dn, i) if i <= n else zero
         for i in range(1, max(max_rank, 4) + 1)}
    pp = {}
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            if i != j:
                pp[i, j] = p_pair(n, cn, dn, i, j) if max(i, j) <= n and n >= 3 else zero
    t = type_probabilities(p, pp)
    return ProbabilityReport(n, cn, dn, {i: v for i, v in p.items() if i <= max(max_rank, 4)},
                             pp, t, tuple(case_values_from_types(t)))
