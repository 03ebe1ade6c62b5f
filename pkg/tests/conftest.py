import random
import sys
from fractions import Fraction

import pytest

from ropack import GapInstance, GapOption, KnapsackInstance


def random_knapsack(rng: random.Random, n: int, W: int = 60, pmax: int = 30) -> KnapsackInstance:
    sizes = [rng.randint(1, W) for _ in range(n)]
    profits = [rng.randint(0, pmax) for _ in range(n)]
    return KnapsackInstance.from_lists(W, sizes, profits)


def random_gap(rng: random.Random, n: int, m: int, W: int = 20, pmax: int = 20) -> GapInstance:
    caps = [rng.randint(W // 2, W) for _ in range(m)]
    items = []
    for _ in range(n):
        items.append(tuple(GapOption(rng.randint(0, pmax), rng.randint(1, w)) for w in caps))
    return GapInstance(tuple(caps), tuple(items))


@pytest.fixture
def tiny_knapsack():
    # W = 10; ids 0..4
    return KnapsackInstance.from_lists(10, [6, 5, 4, 3, 1], [12, 9, 8, 3, Fraction(5, 2)])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])
