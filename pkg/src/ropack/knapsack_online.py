"""Online knapsack under random arrival: large-item, small-item and sequential algorithms.

Every algorithm runs on an integer-scaled copy of the instance (all sizes
multiplied by the common denominator), so capacity checks and greedy
coefficients are exact while the inner loops stay on machine integers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from ropack.core import (
    KnapsackInstance,
    Permutation,
    as_fraction,
    check_delta,
    coin_rng,
    format_fraction,
)
from ropack.errors import ParameterError
from ropack.oracles.knapsack import greedy_order

SAMPLED, REJECTED, PACKED, BLOCKED = 0, 1, 2, 3
DECISION_NAMES = ("sampled", "rejected", "packed", "blocked-capacity")

_INT64_SAFE = 1 << 62


def param_fraction(value) -> Fraction:
    """Parameters given as floats are read by their decimal repr (0.3 -> 3/10)."""
    if isinstance(value, float):
        return Fraction(repr(value))
    return as_fraction(value)


@dataclass(frozen=True)
class SeqParams:
    c: Fraction
    d: Fraction
    delta: Fraction
    n: int

    def __post_init__(self):
        c, d = param_fraction(self.c), param_fraction(self.d)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "delta", check_delta(param_fraction(self.delta)))
        if not 0 < c < 1:
            raise ParameterError(f"c must lie in (0, 1), got {c}")
        if not c < d <= 1:
            raise ParameterError(f"need c < d <= 1, got c={c}, d={d}")
        if self.n < 1:
            raise ParameterError("n must be positive")
        if not self.cn < self.dn <= self.n:
            raise ParameterError(
                f"floor(c*n)={self.cn} must be below floor(d*n)={self.dn} for n={self.n}")

    @property
    def cn(self) -> int:
        return math.floor(self.c * self.n)

    @property
    def dn(self) -> int:
        return math.floor(self.d * self.n)

    def with_n(self, n: int) -> "SeqParams":
        return SeqParams(self.c, self.d, self.delta, n)


KNAPSACK_DEFAULTS = dict(c=Fraction("0.42291"), d=Fraction("0.64570"), delta=Fraction(1, 3))


@dataclass(frozen=True)
class RunTrace:
    """Per-round record of one online run.

    ``residual[l]`` is the free capacity after round ``l + 1``; ``coin_rounds``
    lists the 1-based rounds where a strictly fractional coin was flipped;
    ``empty_after`` is the round in which the first item was packed, or
    ``None`` if the knapsack stayed empty.
    """

    decisions: tuple[str, ...]
    packed_ids: tuple[int, ...]
    profit: Fraction
    residual: tuple[Fraction, ...]
    coin_rounds: tuple[int, ...]
    empty_after: Optional[int]

    def to_dict(self) -> dict:
        return {
            "decisions": list(self.decisions),
            "packed_ids": list(self.packed_ids),
            "profit": format_fraction(self.profit),
            "residual": [format_fraction(r) for r in self.residual],
            "coin_rounds": list(self.coin_rounds),
            "empty_after": self.empty_after,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


class PreparedKnapsack:
    """Integer-scaled arrays for one instance and one size threshold."""

    def __init__(self, instance: KnapsackInstance, delta):
        delta = check_delta(param_fraction(delta))
        self.instance = instance
        self.delta = delta
        items = instance.items
        n = len(items)
        self.n = n
        W = instance.capacity
        scale = W.denominator
        for it in items:
            scale = math.lcm(scale, it.size.denominator)
        self.scale = scale
        self.W = int(W * scale)
        sizes = [int(it.size * scale) for it in items]
        pden = 1
        for it in items:
            pden = math.lcm(pden, it.profit.denominator)
        self.pden = pden
        self.profit_int = [int(it.profit * pden) for it in items]
        dtype = np.int64 if sum(sizes) + self.W < _INT64_SAFE else object
        self.size = np.array(sizes, dtype=dtype)
        self.ids = [it.id for it in items]
        self.threshold = math.ceil(delta * self.W)

        bound = delta * W
        large = [it.size > bound and it.profit > 0 for it in items]
        small = [it.size <= bound and it.profit > 0 for it in items]
        self.large = np.array(large, dtype=bool)
        self.small = np.array(small, dtype=bool)

        index_of = {it.id: k for k, it in enumerate(items)}
        # large items: strength n - rank, ties by id (profits made distinct)
        key = np.zeros(n, dtype=np.int64)
        big = [it for it in items if it.size > bound and it.profit > 0]
        for pos, it in enumerate(sorted(big, key=lambda it: (-it.profit, it.id))):
            key[index_of[it.id]] = len(big) - pos
        self.al_key = key
        # small items: position in the greedy density order
        rank = np.full(n, -1, dtype=np.int64)
        tiny = [it for it in items if it.size <= bound and it.profit > 0]
        for pos, it in enumerate(greedy_order(tiny)):
            rank[index_of[it.id]] = pos
        self.as_rank = rank
        self.n_small = len(tiny)

    def profit_of(self, idx: Sequence[int]) -> Fraction:
        return Fraction(sum(self.profit_int[i] for i in idx), self.pden)


@dataclass
class _Run:
    codes: np.ndarray
    packed: list[int]          # item indices in packing order
    packed_rounds: list[int]   # 0-based rounds
    coins: list[int]           # 0-based rounds
    residual_end: int


def _large_phase(prep: PreparedKnapsack, order: np.ndarray, cn: int, dn: int,
                 residual: int, run: _Run) -> int:
    keys = prep.al_key[order]
    vstar = int(keys[:cn].max()) if cn > 0 else 0
    candidates = np.flatnonzero(keys[cn:dn] > vstar) + cn
    size = prep.size
    count = 0
    for p in candidates.tolist():
        i = int(order[p])
        s = int(size[i])
        if s <= residual:
            residual -= s
            run.codes[p] = PACKED
            run.packed.append(i)
            run.packed_rounds.append(p)
            count += 1
            if count == 2:
                break
        else:
            run.codes[p] = BLOCKED
    return residual


def greedy_prefix_sizes(prep: PreparedKnapsack, order: np.ndarray, dn: int):
    """For every round after ``dn`` holding a positive small item, the total
    size of visible small items that precede it in the greedy density order.

    Returns ``(rounds, prefix)`` with 0-based rounds.
    """
    rank = prep.as_rank
    size = prep.size
    early = order[:dn]
    early = early[rank[early] >= 0]
    arr = np.zeros(prep.n_small, dtype=size.dtype)
    arr[rank[early]] = size[early]
    before = np.cumsum(arr) - arr
    post_items = order[dn:]
    keep = rank[post_items] >= 0
    rounds = np.flatnonzero(keep) + dn
    items = post_items[keep]
    r = rank[items]
    s = size[items]
    prefix = before[r].copy()
    k = len(items)
    if k > 1:
        block = 1024
        for lo in range(0, k, block):
            hi = min(k, lo + block)
            tri = (np.arange(k)[None, :] < np.arange(lo, hi)[:, None])
            smaller = r[None, :] < r[lo:hi, None]
            prefix[lo:hi] += ((tri & smaller) * s[None, :]).sum(axis=1)
    return rounds, items, prefix


def _small_phase(prep: PreparedKnapsack, order: np.ndarray, dn: int, residual: int,
                 rng: np.random.Generator, run: _Run) -> int:
    rounds, items, prefix = greedy_prefix_sizes(prep, order, dn)
    W = prep.W
    thr = prep.threshold
    size = prep.size
    for p, i, pre in zip(rounds.tolist(), items.tolist(), prefix.tolist()):
        room = W - pre
        if room <= 0:
            continue
        s = int(size[i])
        if room < s:
            run.coins.append(p)
            if rng.random() * s >= room:
                continue
        if residual < thr:
            run.codes[p] = BLOCKED
            continue
        residual -= s
        run.codes[p] = PACKED
        run.packed.append(i)
        run.packed_rounds.append(p)
    return residual


def _new_run(n: int, sampled_until: int) -> _Run:
    codes = np.full(n, REJECTED, dtype=np.int8)
    codes[:sampled_until] = SAMPLED
    return _Run(codes, [], [], [], 0)


def simulate_large(prep, order, cn, dn, residual=None) -> _Run:
    run = _new_run(prep.n, cn)
    residual = prep.W if residual is None else residual
    run.residual_end = _large_phase(prep, order, cn, dn, residual, run)
    return run


def simulate_small(prep, order, dn, rng, residual=None) -> _Run:
    run = _new_run(prep.n, dn)
    residual = prep.W if residual is None else residual
    run.residual_end = _small_phase(prep, order, dn, residual, rng, run)
    return run


def simulate_sequential(prep, order, cn, dn, rng) -> _Run:
    run = _new_run(prep.n, cn)
    residual = _large_phase(prep, order, cn, dn, prep.W, run)
    run.residual_end = _small_phase(prep, order, dn, residual, rng, run)
    return run


def _trace(prep: PreparedKnapsack, run: _Run, start_residual: int) -> RunTrace:
    used = np.zeros(prep.n, dtype=object)
    for p, i in zip(run.packed_rounds, run.packed):
        used[p] = int(prep.size[i])
    remaining = start_residual - np.cumsum(used)
    residual = tuple(Fraction(int(r), prep.scale) for r in remaining)
    order = sorted(zip(run.packed_rounds, run.packed))
    return RunTrace(
        decisions=tuple(DECISION_NAMES[c] for c in run.codes.tolist()),
        packed_ids=tuple(prep.ids[i] for _, i in order),
        profit=prep.profit_of(run.packed),
        residual=residual,
        coin_rounds=tuple(p + 1 for p in sorted(run.coins)),
        empty_after=(min(run.packed_rounds) + 1) if run.packed_rounds else None,
    )


def _order_array(perm: Union[Permutation, Sequence[int]], n: int) -> np.ndarray:
    order = np.asarray(perm.order if isinstance(perm, Permutation) else perm, dtype=np.int64)
    if len(order) != n or not np.array_equal(np.sort(order), np.arange(n)):
        raise ParameterError("arrival order is not a permutation of the instance's items")
    return order


def _check_views(prep: PreparedKnapsack, want_large: bool):
    wrong = prep.small if want_large else prep.large
    if wrong.any():
        kind = "small" if want_large else "large"
        raise ParameterError(f"instance holds positive-profit {kind} items; split it first")


def run_al(instance: KnapsackInstance, perm, params: SeqParams) -> RunTrace:
    """Large-item algorithm: sample ``cn`` rounds, then pack the first two
    items that beat the best sampled profit, skipping ones that do not fit.

    Profits are compared in the tie-broken rank order of :func:`rank_order`.
    """
    prep = PreparedKnapsack(instance, params.delta)
    _check_views(prep, want_large=True)
    order = _order_array(perm, prep.n)
    run = simulate_large(prep, order, params.cn, params.dn)
    return _trace(prep, run, prep.W)


def run_as(instance: KnapsackInstance, perm, params: SeqParams,
           rng: Optional[np.random.Generator] = None,
           residual_at_start=None) -> RunTrace:
    """Small-item algorithm: after ``dn`` sampled rounds, pack the arriving
    item with its coefficient in the greedy fractional solution of the small
    items seen so far, provided the free capacity is at least ``delta * W``.

    ``residual_at_start`` is the free capacity when the run begins (default
    the full capacity).
    """
    prep = PreparedKnapsack(instance, params.delta)
    _check_views(prep, want_large=False)
    order = _order_array(perm, prep.n)
    if rng is None:
        rng = _default_rng(perm)
    start = prep.W
    if residual_at_start is not None:
        free = as_fraction(residual_at_start)
        if not 0 <= free <= instance.capacity:
            raise ParameterError("residual_at_start must lie in [0, W]")
        start = math.floor(free * prep.scale)
    run = simulate_small(prep, order, params.dn, rng, residual=start)
    return _trace(prep, run, start)


def run_sequential(instance: KnapsackInstance, perm, params: SeqParams,
                   rng: Optional[np.random.Generator] = None) -> RunTrace:
    """Sample ``cn`` rounds, follow the large-item algorithm up to round ``dn``
    and the small-item algorithm afterwards, on one shared capacity."""
    prep = PreparedKnapsack(instance, params.delta)
    order = _order_array(perm, prep.n)
    if rng is None:
        rng = _default_rng(perm)
    run = simulate_sequential(prep, order, params.cn, params.dn, rng)
    return _trace(prep, run, prep.W)


def _default_rng(perm) -> np.random.Generator:
    if isinstance(perm, Permutation):
        return coin_rng(perm.seed, perm.trial_index)
    return np.random.default_rng(0)
