"""Exact integral knapsack (branch and bound) and the greedy fractional optimum."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from ropack.config import CAPS
from ropack.core import KnapsackInstance, KnapsackItem
from ropack.errors import CapabilityError


@dataclass(frozen=True)
class FractionalSolution:
    coefficients: Mapping[int, Fraction]
    value: Fraction

    def fractional_ids(self) -> list[int]:
        return [i for i, a in self.coefficients.items() if 0 < a < 1]


def greedy_order(items: Iterable[KnapsackItem]) -> list[KnapsackItem]:
    """Items by non-increasing density, equal densities by ascending id."""
    return sorted(items, key=lambda it: (-it.density, it.id))


def knapsack_opt_fractional(instance: KnapsackInstance) -> FractionalSolution:
    W = instance.capacity
    coeffs: dict[int, Fraction] = {}
    used = Fraction(0)
    value = Fraction(0)
    for it in greedy_order(instance.items):
        room = W - used
        if room <= 0:
            coeffs[it.id] = Fraction(0)
        elif it.size <= room:
            coeffs[it.id] = Fraction(1)
            used += it.size
            value += it.profit
        else:
            a = room / it.size
            coeffs[it.id] = a
            used = W
            value += a * it.profit
    return FractionalSolution(coeffs, value)


def knapsack_opt_integral(instance: KnapsackInstance,
                          cap: int | None = None) -> tuple[Fraction, frozenset[int]]:
    """Exact optimum by depth-first branch and bound.

    The bound at each node is the greedy fractional value of the remaining
    items in density order, which is admissible for the integral subproblem.
    """
    cap = CAPS.knapsack_exact_max_n if cap is None else cap
    if instance.n > cap:
        raise CapabilityError(
            f"n={instance.n} exceeds the exact-solve cap {cap}; "
            "use knapsack_opt_fractional as an upper bound instead")
    items = [it for it in greedy_order(instance.items) if it.profit > 0]
    W = instance.capacity
    sizes = [it.size for it in items]
    profits = [it.profit for it in items]
    k = len(items)

    def bound(idx, room, value):
        for j in range(idx, k):
            if sizes[j] <= room:
                room -= sizes[j]
                value += profits[j]
            else:
                return value + profits[j] * room / sizes[j]
        return value

    best_value = Fraction(0)
    best_set: tuple[int, ...] = ()
    chosen: list[int] = []

    def dfs(idx, room, value):
        nonlocal best_value, best_set
        if value > best_value:
            best_value, best_set = value, tuple(chosen)
        if idx == k or bound(idx, room, value) <= best_value:
            return
        if sizes[idx] <= room:
            chosen.append(items[idx].id)
            dfs(idx + 1, room - sizes[idx], value + profits[idx])
            chosen.pop()
        dfs(idx + 1, room, value)

    dfs(0, W, Fraction(0))
    return best_value, frozenset(best_set)


def knapsack_opt_pairs(instance: KnapsackInstance) -> tuple[Fraction, frozenset[int]]:
    """Exact optimum when every item is larger than a third of the capacity.

    Then no three items fit together, so the optimum is the best single item
    or the best fitting pair.  Sorting by size and keeping a running maximum
    over the smaller items finds it in ``O(n log n)``.
    """
    W = instance.capacity
    items = [it for it in instance.items if it.profit > 0 and it.size <= W]
    if any(3 * it.size <= W for it in items):
        raise CapabilityError("some item is at most a third of the capacity; three may fit")
    best_value, best_set = Fraction(0), frozenset()
    for it in items:
        if it.profit > best_value:
            best_value, best_set = it.profit, frozenset([it.id])
    items.sort(key=lambda it: (it.size, it.id))
    # running best among items[:k]; the partner of item j must be smaller or equal in order
    prefix: list[KnapsackItem] = []
    for it in items:
        if prefix:
            prefix.append(it if it.profit > prefix[-1].profit else prefix[-1])
        else:
            prefix.append(it)
    sizes = [it.size for it in items]
    for j, it in enumerate(items):
        k = min(bisect_right(sizes, W - it.size), j)
        if k > 0:
            partner = prefix[k - 1]
            value = it.profit + partner.profit
            if value > best_value:
                best_value, best_set = value, frozenset([it.id, partner.id])
    return best_value, best_set


def packing_value(instance: KnapsackInstance, ids: Iterable[int]) -> Fraction:
    by_id = {it.id: it for it in instance.items}
    return sum((by_id[i].profit for i in ids), Fraction(0))
