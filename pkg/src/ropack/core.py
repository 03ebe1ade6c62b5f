"""Instance types, size classification, rank ordering and seeded arrival orders.

All instance data is held as :class:`fractions.Fraction`.  Floats are accepted
on input but converted exactly, so ``0.1`` becomes its binary value, not 1/10;
pass strings such as ``"1/10"`` when the decimal value matters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from ropack.errors import ParameterError

Rational = Union[int, str, Fraction, float]

_UINT64 = (1 << 64) - 1


def as_fraction(value: Rational) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParameterError("booleans are not rationals")
    try:
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ParameterError(f"not a rational number: {value!r}") from exc


def format_fraction(value: Fraction) -> str:
    value = as_fraction(value)
    return f"{value.numerator}/{value.denominator}"


def check_delta(delta: Rational) -> Fraction:
    delta = as_fraction(delta)
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    return delta


@dataclass(frozen=True)
class KnapsackItem:
    id: int
    size: Fraction
    profit: Fraction

    def __post_init__(self):
        object.__setattr__(self, "size", as_fraction(self.size))
        object.__setattr__(self, "profit", as_fraction(self.profit))
        if self.id < 0:
            raise ParameterError(f"item id must be non-negative, got {self.id}")
        if self.size <= 0:
            raise ParameterError(f"item {self.id}: size must be positive")
        if self.profit < 0:
            raise ParameterError(f"item {self.id}: profit must be non-negative")

    @property
    def density(self) -> Fraction:
        return self.profit / self.size


@dataclass(frozen=True)
class KnapsackInstance:
    capacity: Fraction
    items: tuple[KnapsackItem, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "capacity", as_fraction(self.capacity))
        object.__setattr__(self, "items", tuple(self.items))
        if self.capacity <= 0:
            raise ParameterError("capacity must be positive")
        ids = [it.id for it in self.items]
        if len(set(ids)) != len(ids):
            raise ParameterError("item ids must be pairwise distinct")
        for it in self.items:
            if it.size > self.capacity:
                raise ParameterError(f"item {it.id} is larger than the capacity")

    @property
    def n(self) -> int:
        return len(self.items)

    @classmethod
    def from_lists(cls, capacity: Rational, sizes: Sequence[Rational],
                   profits: Sequence[Rational]) -> "KnapsackInstance":
        if len(sizes) != len(profits):
            raise ParameterError("sizes and profits differ in length")
        items = [KnapsackItem(i, s, p) for i, (s, p) in enumerate(zip(sizes, profits))]
        return cls(capacity, tuple(items))


@dataclass(frozen=True)
class GapOption:
    profit: Fraction
    size: Fraction

    def __post_init__(self):
        object.__setattr__(self, "profit", as_fraction(self.profit))
        object.__setattr__(self, "size", as_fraction(self.size))
        if self.size <= 0:
            raise ParameterError("option size must be positive")
        if self.profit < 0:
            raise ParameterError("option profit must be non-negative")


@dataclass(frozen=True)
class GapInstance:
    """Resources with capacities and, per item, one option per resource.

    Item ``i`` is ``items[i]``; its id is its index.  Use
    :meth:`with_dummies` to fill missing options with zero-profit ones.
    """

    capacities: tuple[Fraction, ...]
    items: tuple[tuple[GapOption, ...], ...] = ()

    def __post_init__(self):
        caps = tuple(as_fraction(w) for w in self.capacities)
        object.__setattr__(self, "capacities", caps)
        object.__setattr__(self, "items", tuple(tuple(opts) for opts in self.items))
        if not caps:
            raise ParameterError("a GAP instance needs at least one resource")
        if any(w <= 0 for w in caps):
            raise ParameterError("capacities must be positive")
        for i, opts in enumerate(self.items):
            if len(opts) != len(caps):
                raise ParameterError(
                    f"item {i} has {len(opts)} options for {len(caps)} resources")

    @property
    def m(self) -> int:
        return len(self.capacities)

    @property
    def n(self) -> int:
        return len(self.items)

    @classmethod
    def with_dummies(cls, capacities: Sequence[Rational],
                     items: Iterable[dict]) -> "GapInstance":
        """Build from per-item ``{resource: (profit, size)}`` maps.

        Resources absent from an item's map get the option ``(0, W_r)``.
        """
        caps = [as_fraction(w) for w in capacities]
        rows = []
        for opts in items:
            row = []
            for r, w in enumerate(caps):
                if r in opts:
                    p, s = opts[r]
                    row.append(GapOption(p, s))
                else:
                    row.append(GapOption(0, w))
            rows.append(tuple(row))
        return cls(tuple(caps), tuple(rows))


@dataclass(frozen=True)
class Permutation:
    """Arrival order: ``order[l]`` is the index of the item arriving in round ``l + 1``."""

    order: tuple[int, ...]
    seed: int
    trial_index: int

    def __len__(self):
        return len(self.order)


@dataclass(frozen=True)
class SplitPair:
    large: Union[KnapsackInstance, GapInstance]
    small: Union[KnapsackInstance, GapInstance]
    delta: Fraction = field(default=Fraction(1, 3))


def classify_knapsack(instance: KnapsackInstance, delta: Rational) -> SplitPair:
    """Split into a large-only and a small-only view of the same items.

    An item is large iff ``size > delta * W``.  In the large view each small
    item becomes ``(size W, profit 0)``; in the small view each large item
    becomes ``(size delta * W, profit 0)``.  Ids and positions are preserved.
    """
    delta = check_delta(delta)
    W = instance.capacity
    bound = delta * W
    large, small = [], []
    for it in instance.items:
        if it.size > bound:
            large.append(it)
            small.append(KnapsackItem(it.id, bound, 0))
        else:
            large.append(KnapsackItem(it.id, W, 0))
            small.append(it)
    return SplitPair(KnapsackInstance(W, tuple(large)),
                     KnapsackInstance(W, tuple(small)), delta)


def classify_gap(instance: GapInstance, delta: Rational) -> SplitPair:
    """Option-wise split: small options become ``(0, W_r)`` in the large view,
    large options become ``(0, delta * W_r)`` in the small view."""
    delta = check_delta(delta)
    caps = instance.capacities
    large, small = [], []
    for opts in instance.items:
        lrow, srow = [], []
        for w, opt in zip(caps, opts):
            if opt.size > delta * w:
                lrow.append(opt)
                srow.append(GapOption(0, delta * w))
            else:
                lrow.append(GapOption(0, w))
                srow.append(opt)
        large.append(tuple(lrow))
        small.append(tuple(srow))
    return SplitPair(GapInstance(caps, tuple(large)),
                     GapInstance(caps, tuple(small)), delta)


def rank_order(items: Iterable[KnapsackItem]) -> list[int]:
    """Ids by decreasing profit; equal profits go to the smaller id first."""
    return [it.id for it in sorted(items, key=lambda it: (-it.profit, it.id))]


def trial_rng(seed: int, trial_index: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for one trial.

    Philox keyed on ``(seed, stream)`` with the trial index in the top counter
    word, so every trial owns a disjoint block of the stream.
    """
    if not 0 <= seed <= _UINT64:
        raise ParameterError("seed must be a 64-bit unsigned integer")
    if trial_index < 0:
        raise ParameterError("trial_index must be non-negative")
    bitgen = np.random.Philox(key=seed | (stream << 64), counter=trial_index << 192)
    return np.random.Generator(bitgen)


def permutation_array(n: int, seed: int, trial_index: int) -> np.ndarray:
    if n < 1:
        raise ParameterError("n must be at least 1")
    return trial_rng(seed, trial_index, 0).permutation(n)


def random_permutation(n: int, seed: int, trial_index: int) -> Permutation:
    order = permutation_array(n, seed, trial_index)
    return Permutation(tuple(int(i) for i in order), seed, trial_index)


def coin_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Stream used by randomized algorithms; independent of the arrival order."""
    return trial_rng(seed, trial_index, 1)


# -- JSON ------------------------------------------------------------------

def instance_to_dict(instance: Union[KnapsackInstance, GapInstance]) -> dict:
    f = format_fraction
    if isinstance(instance, KnapsackInstance):
        return {
            "type": "knapsack",
            "capacity": f(instance.capacity),
            "items": [{"id": it.id, "size": f(it.size), "profit": f(it.profit)}
                      for it in instance.items],
        }
    if isinstance(instance, GapInstance):
        return {
            "type": "gap",
            "capacities": [f(w) for w in instance.capacities],
            "items": [[{"profit": f(o.profit), "size": f(o.size)} for o in opts]
                      for opts in instance.items],
        }
    raise ParameterError(f"unknown instance type {type(instance).__name__}")


def instance_from_dict(data: dict) -> Union[KnapsackInstance, GapInstance]:
    kind = data.get("type")
    try:
        if kind == "knapsack":
            items = [KnapsackItem(int(d["id"]), as_fraction(d["size"]),
                                  as_fraction(d["profit"])) for d in data["items"]]
            return KnapsackInstance(as_fraction(data["capacity"]), tuple(items))
        if kind == "gap":
            rows = [tuple(GapOption(as_fraction(o["profit"]), as_fraction(o["size"]))
                          for o in opts) for opts in data["items"]]
            caps = tuple(as_fraction(w) for w in data["capacities"])
            return GapInstance(caps, tuple(rows))
    except KeyError as exc:
        raise ParameterError(f"instance JSON is missing field {exc}") from exc
    raise ParameterError(f"unknown instance type {kind!r}")


def save_instance(instance, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=1))


def load_instance(path: Union[str, Path]):
    return instance_from_dict(json.loads(Path(path).read_text()))
