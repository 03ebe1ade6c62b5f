"""Monte Carlo and exhaustive-enumeration harness, plus the built-in instance families."""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from ropack.config import CAPS
from ropack.core import (
    GapInstance,
    GapOption,
    KnapsackInstance,
    classify_gap,
    classify_knapsack,
    coin_rng,
    permutation_array,
    trial_rng,
)
from ropack.errors import CapabilityError, ParameterError
from ropack.gap_online import GAP_DEFAULTS, PreparedGap, run_profit, simulate_lp, \
    simulate_matching, simulate_sequential_gap
from ropack.knapsack_online import KNAPSACK_DEFAULTS, PreparedKnapsack, SeqParams, \
    simulate_large, simulate_sequential, simulate_small
from ropack.oracles.gap import gap_dual_bound, gap_opt_fractional, gap_opt_integral
from ropack.oracles.knapsack import knapsack_opt_fractional, knapsack_opt_integral, \
    knapsack_opt_pairs
from ropack.oracles.matching import matching_opt

KNAPSACK_FAMILIES = ("few-large", "many-small", "mixed", "correlated")
GAP_FAMILIES = ("gap-uniform", "gap-skewed")
FAMILIES = KNAPSACK_FAMILIES + GAP_FAMILIES
CSV_FIELDS = ("family", "algorithm", "n", "c", "d", "delta", "trials", "seed",
              "mean", "stderr", "opt_ref")
EVENTS = ("accept-first", "accept-pair", "empty-after-dn", "resource-unmatched",
          "fractional-round-count")

# streams of trial_rng: 0 arrival order, 1 coins, 2 per-trial instance data
_DATA_STREAM = 2


# ---------------------------------------------------------------- statistics

@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    trials: int
    seed: int

    @classmethod
    def from_samples(cls, samples: Sequence[float], seed: int) -> "Estimate":
        """Mean and standard error with compensated sums, so the result does
        not depend on how the samples were produced or reduced."""
        k = len(samples)
        if k == 0:
            raise ParameterError("need at least one trial")
        mean = math.fsum(samples) / k
        if k == 1:
            return cls(mean, 0.0, 1, seed)
        var = math.fsum((x - mean) ** 2 for x in samples) / (k - 1)
        return cls(mean, math.sqrt(var / k), k, seed)


def thread_count() -> int:
    raw = os.environ.get("ROPACK_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ParameterError(f"ROPACK_THREADS must be an integer, got {raw!r}")
    return os.cpu_count() or 1


def _run_chunk(args):
    fn, lo, hi = args
    return [fn(t) for t in range(lo, hi)]


def map_trials(fn: Callable[[int], float], trials: int, threads: int | None = None) -> list[float]:
    """``[fn(0), ..., fn(trials-1)]``, fanned out over processes when allowed.

    Results always come back in trial order.  ``fn`` must be picklable when
    more than one worker is used.
    """
    threads = thread_count() if threads is None else threads
    if threads <= 1 or trials < 64:
        return [fn(t) for t in range(trials)]
    bounds = np.linspace(0, trials, threads * 4 + 1).astype(int)
    chunks = [(fn, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(_run_chunk, chunks))
    return [x for part in parts for x in part]


# ---------------------------------------------------------------- families

@dataclass(frozen=True)
class InstanceFamily:
    """Generator settings for one built-in family.

    ``capacity`` is the knapsack capacity (knapsack families) or the list of
    resource capacities (GAP families); ``params`` holds family-specific
    knobs, see :func:`generate`.
    """

    name: str
    n: int
    m: int = 1
    capacity: Union[int, tuple[int, ...]] = 1_000_000
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise ParameterError(f"unknown family {self.name!r}; choose from {', '.join(FAMILIES)}")
        if self.n < 1:
            raise ParameterError("n must be positive")

    @property
    def is_gap(self) -> bool:
        return self.name in GAP_FAMILIES


def family(name: str, n: int | None = None, **params) -> InstanceFamily:
    """Built-in family with its default settings (``n`` 2000 knapsack, 1500 GAP)."""
    if name == "gap-uniform":
        return InstanceFamily(name, n or 1500, 3, (1000, 1000, 1000), params)
    if name == "gap-skewed":
        return InstanceFamily(name, n or 1500, 4, (600, 1000, 1500, 2500), params)
    return InstanceFamily(name, n or 2000, 1, 1_000_000, params)


def _pareto_profits(rng, k, scale=100, shape=1.5):
    return np.ceil(scale * (rng.pareto(shape, k) + 1)).astype(np.int64)


def _knapsack_arrays(fam: InstanceFamily, rng) -> tuple[int, np.ndarray, np.ndarray]:
    W = int(fam.capacity)
    n = fam.n
    if fam.name == "few-large":
        sizes = rng.integers(W // 3 + 1, W + 1, n)
        profits = _pareto_profits(rng, n)
    elif fam.name == "many-small":
        sizes = rng.integers(1, W // 100 + 1, n)
        dens = rng.lognormal(0.0, 0.5, n)
        profits = np.maximum(1, np.round(sizes * dens / 100)).astype(np.int64)
    elif fam.name == "mixed":
        half = n // 2
        big = rng.integers(W // 3 + 1, W + 1, half)
        tiny = rng.integers(1, W // 100 + 1, n - half)
        sizes = np.concatenate([big, tiny])
        dens = rng.lognormal(0.0, 0.5, n)
        profits = np.maximum(1, np.round(sizes * dens / 100)).astype(np.int64)
        perm = rng.permutation(n)
        sizes, profits = sizes[perm], profits[perm]
    elif fam.name == "correlated":
        noise = float(fam.params.get("noise", 0.1))
        sizes = rng.integers(1, W // 2 + 1, n)
        profits = np.maximum(1, np.round(sizes * (1 + rng.uniform(-noise, noise, n)) / 100))
        profits = profits.astype(np.int64)
    else:
        raise ParameterError(f"{fam.name!r} is not a knapsack family")
    return W, sizes, profits


def _gap_arrays(fam: InstanceFamily, rng) -> tuple[list[int], np.ndarray, np.ndarray]:
    caps = list(fam.capacity)
    n, m = fam.n, len(caps)
    W = np.array(caps)
    if fam.name == "gap-uniform":
        sizes = rng.integers(1, W + 1, (n, m))
        profits = rng.integers(1, 101, (n, m))
    elif fam.name == "gap-skewed":
        lo = np.maximum(1, W // 50)
        u = rng.uniform(0, 1, (n, m))
        sizes = np.clip(np.round(lo * np.exp(u * np.log(W / lo))), 1, W).astype(np.int64)
        profits = _pareto_profits(rng, n * m, scale=10).reshape(n, m)
        dummy = rng.uniform(0, 1, (n, m)) < float(fam.params.get("dummy", 0.3))
        profits[dummy] = 0
        sizes[dummy] = np.broadcast_to(W, (n, m))[dummy]
    else:
        raise ParameterError(f"{fam.name!r} is not a GAP family")
    return caps, sizes, profits


def generate(fam: Union[InstanceFamily, str], seed: int):
    """Deterministic instance of a built-in family.

    * ``few-large``: sizes uniform in (W/3, W], heavy-tailed (Pareto) profits.
    * ``many-small``: sizes uniform in [1, W/100], log-normal densities.
    * ``mixed``: half of each of the above size ranges, shuffled.
    * ``correlated``: sizes uniform in [1, W/2], profit proportional to size
      times ``1 +- noise``.
    * ``gap-uniform``: three resources of capacity 1000, sizes uniform in
      [1, W_r], profits uniform in [1, 100].
    * ``gap-skewed``: four resources of capacities 600..2500, log-uniform sizes
      in [W_r/50, W_r], Pareto profits, 30% zero-profit dummy options.
    """
    fam = family(fam) if isinstance(fam, str) else fam
    rng = trial_rng(seed, 0, _DATA_STREAM)
    if fam.is_gap:
        caps, sizes, profits = _gap_arrays(fam, rng)
        items = tuple(tuple(GapOption(int(profits[i, r]), int(sizes[i, r])) for r in range(len(caps)))
                      for i in range(fam.n))
        return GapInstance(tuple(Fraction(w) for w in caps), items)
    W, sizes, profits = _knapsack_arrays(fam, rng)
    return KnapsackInstance.from_lists(W, sizes.tolist(), profits.tolist())


# ---------------------------------------------------------------- enumeration

@dataclass(frozen=True)
class EnumerationResult:
    n: int
    cn: int
    dn: int
    permutations: int
    p_first: dict
    p_pair: dict


def rank_instance(n: int) -> KnapsackInstance:
    """``n`` items of size W/2 with profits ``n, n-1, ..., 1``: item id ``k``
    has rank ``k + 1``.  Any two fit together, no three do."""
    return KnapsackInstance.from_lists(2, [1] * n, list(range(n, 0, -1)))


def enumerate_exact(n: int, cn: int, dn: int) -> EnumerationResult:
    """Run the large-item algorithm on every arrival order of ``n`` ranked items.

    Acceptance depends only on relative ranks and arrival positions, so the
    ``n!`` rank permutations give the exact first-item and ordered-pair
    probabilities.
    """
    if n > CAPS.enumerate_max_n:
        raise CapabilityError(f"n={n} exceeds the enumeration cap {CAPS.enumerate_max_n}")
    if not 1 <= cn <= dn <= n:
        raise ParameterError(f"need 1 <= cn <= dn <= n, got cn={cn}, dn={dn}, n={n}")
    prep = PreparedKnapsack(rank_instance(n), Fraction(1, 3))
    first = [0] * (n + 1)
    pair: dict[tuple[int, int], int] = {}
    total = 0
    for perm in itertools.permutations(range(n)):
        run = simulate_large(prep, np.array(perm, dtype=np.int64), cn, dn)
        total += 1
        ranks = [i + 1 for i in run.packed]
        if ranks:
            first[ranks[0]] += 1
        if len(ranks) == 2:
            pair[ranks[0], ranks[1]] = pair.get((ranks[0], ranks[1]), 0) + 1
    p_first = {i: Fraction(first[i], total) for i in range(1, n + 1)}
    p_pair = {(i, j): Fraction(pair.get((i, j), 0), total)
              for i in range(1, n + 1) for j in range(1, n + 1) if i != j}
    return EnumerationResult(n, cn, dn, total, p_first, p_pair)


# ---------------------------------------------------------------- events

def _params(n: int, config: Mapping, defaults: Mapping) -> SeqParams:
    return SeqParams(config.get("c", defaults["c"]), config.get("d", defaults["d"]),
                     config.get("delta", defaults["delta"]), n)


def _counts(config: Mapping, defaults=KNAPSACK_DEFAULTS) -> tuple[int, int, int]:
    n = int(config["n"])
    if "cn" in config or "dn" in config:
        cn, dn = int(config["cn"]), int(config["dn"])
        if not 0 <= cn < dn <= n:
            raise ParameterError(f"need 0 <= cn < dn <= n, got cn={cn}, dn={dn}")
        return n, cn, dn
    p = _params(n, config, defaults)
    return n, p.cn, p.dn


class _RankTrial:
    def __init__(self, n, cn, dn, seed, want):
        self.prep = PreparedKnapsack(rank_instance(n), Fraction(1, 3))
        self.n, self.cn, self.dn, self.seed, self.want = n, cn, dn, seed, want

    def __call__(self, t: int) -> float:
        order = permutation_array(self.n, self.seed, t)
        run = simulate_large(self.prep, order, self.cn, self.dn)
        return float(self.want([i + 1 for i in run.packed]))


class _CoinTrial:
    def __init__(self, prep, n, dn, seed):
        self.prep, self.n, self.dn, self.seed = prep, n, dn, seed

    def __call__(self, t: int) -> float:
        order = permutation_array(self.n, self.seed, t)
        run = simulate_small(self.prep, order, self.dn, coin_rng(self.seed, t))
        return float(len(run.coins))


def weight_table_instance(n: int, m: int, rng, high: int = 100) -> GapInstance:
    """Large-only GAP instance: every option fills its resource completely,
    profits uniform in [1, high]."""
    w = rng.integers(1, high + 1, (n, m))
    return GapInstance(tuple(Fraction(1) for _ in range(m)),
                       tuple(tuple(GapOption(int(w[i, r]), 1) for r in range(m)) for i in range(n)))


def weight_table(n: int, m: int, rng, high: int = 100) -> PreparedGap:
    """Same draw as :func:`weight_table_instance`, prepared directly."""
    w = rng.integers(1, high + 1, (n, m))
    return PreparedGap.from_arrays([1] * m, np.ones((n, m), dtype=np.int64), w, Fraction(1, 2))


class _MatchRoundTrial:
    """1-based round in which resource ``r`` gets matched, ``n + 1`` if never."""

    def __init__(self, n, m, cn, dn, resource, seed):
        self.n, self.m, self.cn, self.dn = n, m, cn, dn
        self.resource, self.seed = resource, seed

    def __call__(self, t: int) -> int:
        prep = weight_table(self.n, self.m, trial_rng(self.seed, t, _DATA_STREAM))
        run = simulate_matching(prep, permutation_array(self.n, self.seed, t), self.cn, self.dn)
        when = run.matched_round[self.resource]
        return self.n + 1 if when is None else when + 1


def estimate_unmatched(n: int, ells: Sequence[int], m: int = 3, resource: int = 0,
                       c=None, d=None, trials: int = 1000, seed: int = 0,
                       threads: int | None = None) -> dict[int, Estimate]:
    """Frequency of "resource still free after round ell" for several ``ell``,
    all read off the same simulated runs (fresh weight table per trial)."""
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if not 0 <= resource < m:
        raise ParameterError("resource index out of range")
    p = gap_params_for(n, c, d)
    rounds = map_trials(_MatchRoundTrial(n, m, p.cn, p.dn, resource, seed), trials, threads)
    return {ell: Estimate.from_samples([float(x > ell) for x in rounds], seed) for ell in ells}


def gap_params_for(n: int, c=None, d=None, delta=None) -> SeqParams:
    return SeqParams(GAP_DEFAULTS["c"] if c is None else c, GAP_DEFAULTS["d"] if d is None else d,
                     GAP_DEFAULTS["delta"] if delta is None else delta, n)


def top_rows(table: np.ndarray) -> list[int]:
    """Rows that can appear in some maximum-weight matching: the ``m`` heaviest
    positive entries of every column.  Matching on these rows alone loses
    nothing, since any optimal edge outside them can be swapped for a free
    heavier row of the same column."""
    n, m = table.shape
    keep = set()
    for r in range(m):
        col = table[:, r]
        pos = np.flatnonzero(col > 0)
        best = pos[np.lexsort((pos, -col[pos]))][:m]
        keep.update(best.tolist())
    return sorted(keep)


class _BaselineTrial:
    def __init__(self, n, m, cn, dn, seed):
        self.n, self.m, self.cn, self.dn, self.seed = n, m, cn, dn, seed

    def __call__(self, t: int) -> float:
        prep = weight_table(self.n, self.m, trial_rng(self.seed, t, _DATA_STREAM))
        run = simulate_matching(prep, permutation_array(self.n, self.seed, t), self.cn, self.dn)
        rows = top_rows(prep.w_large)
        opt = matching_opt([[int(prep.profit[i, r]) for r in range(self.m)] for i in rows]).weight
        return float(run_profit(prep, run) / opt)


def estimate_matching_baseline(n: int, m: int = 3, c=None, d=1, trials: int = 1000,
                               seed: int = 0, threads: int | None = None) -> Estimate:
    """Mean ``weight / OPT_L`` of the matching algorithm alone, each trial on a
    fresh random weight table (``m`` resources, profits uniform in [1, 100]).
    ``c`` defaults to ``1/e``; OPT_L is the exact maximum-weight matching."""
    c = Fraction(1 / math.e) if c is None else c
    p = SeqParams(c, d, Fraction(1, 2), n)
    if p.cn < 1 or p.cn >= p.dn:
        raise ParameterError("need 1 <= cn < dn")
    return Estimate.from_samples(map_trials(_BaselineTrial(n, m, p.cn, p.dn, seed), trials, threads), seed)


def estimate_probability(event: str, config: Mapping, trials: int, seed: int,
                         threads: int | None = None) -> Estimate:
    """Monte Carlo frequency of one event, with standard error.

    Events and their ``config`` keys (``n`` always; ``c``/``d`` or ``cn``/``dn``):

    * ``accept-first``: item of rank ``i`` is packed first by the large-item algorithm.
    * ``accept-pair``: ranks ``i`` then ``j`` are packed, in that order.
    * ``empty-after-dn``: the large-item algorithm packs nothing.
    * ``resource-unmatched``: with ``m`` resources and random weight tables,
      resource ``r`` is still free after round ``ell`` of the matching algorithm.
    * ``fractional-round-count``: number of strictly fractional coin rounds of
      the small-item algorithm on ``family`` (default ``many-small``); the
      estimate is a mean count rather than a probability.
    """
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if event not in EVENTS:
        raise ParameterError(f"unknown event {event!r}; choose from {', '.join(EVENTS)}")
    if event in ("accept-first", "accept-pair", "empty-after-dn"):
        n, cn, dn = _counts(config)
        if event == "accept-first":
            i = int(config["i"])
            fn = _RankTrial(n, cn, dn, seed, _FirstIs(i))
        elif event == "accept-pair":
            fn = _RankTrial(n, cn, dn, seed, _PairIs(int(config["i"]), int(config["j"])))
        else:
            fn = _RankTrial(n, cn, dn, seed, _Empty())
    elif event == "resource-unmatched":
        n, cn, dn = _counts(config, GAP_DEFAULTS)
        m = int(config.get("m", 3))
        r, ell = int(config.get("r", 0)), int(config["ell"])
        if not 0 <= r < m:
            raise ParameterError("resource index out of range")
        rounds = map_trials(_MatchRoundTrial(n, m, cn, dn, r, seed), trials, threads)
        return Estimate.from_samples([float(x > ell) for x in rounds], seed)
    else:
        n = int(config["n"])
        p = _params(n, config, KNAPSACK_DEFAULTS)
        fam = family(config.get("family", "many-small"), n)
        inst = classify_knapsack(generate(fam, int(config.get("instance_seed", seed))), p.delta).small
        fn = _CoinTrial(PreparedKnapsack(inst, p.delta), n, p.dn, seed)
    return Estimate.from_samples(map_trials(fn, trials, threads), seed)


class _FirstIs:
    def __init__(self, i):
        self.i = i

    def __call__(self, ranks):
        return bool(ranks) and ranks[0] == self.i


class _PairIs:
    def __init__(self, i, j):
        self.i, self.j = i, j

    def __call__(self, ranks):
        return len(ranks) == 2 and ranks[0] == self.i and ranks[1] == self.j


class _Empty:
    def __call__(self, ranks):
        return not ranks


# ---------------------------------------------------------------- ratios

KNAPSACK_ALGORITHMS = ("sequential", "al", "as")
GAP_ALGORITHMS = ("sequential", "matching", "lp")


@dataclass(frozen=True)
class RatioEstimate:
    estimate: Estimate
    opt_ref: Fraction
    opt_kind: str
    family: str
    algorithm: str
    n: int
    params: SeqParams

    def csv_row(self) -> dict:
        e = self.estimate
        return {"family": self.family, "algorithm": self.algorithm, "n": self.n,
                "c": float(self.params.c), "d": float(self.params.d),
                "delta": float(self.params.delta), "trials": e.trials, "seed": e.seed,
                "mean": repr(e.mean), "stderr": repr(e.stderr),
                "opt_ref": f"{self.opt_kind}:{float(self.opt_ref)!r}"}


def knapsack_opt_ref(instance: KnapsackInstance) -> tuple[Fraction, str]:
    if instance.n <= CAPS.knapsack_exact_max_n:
        return knapsack_opt_integral(instance)[0], "integral"
    W = instance.capacity
    if all(3 * it.size > W for it in instance.items if it.profit > 0):
        return knapsack_opt_pairs(instance)[0], "integral"
    return knapsack_opt_fractional(instance).value, "fractional"


def _has_small(instance: GapInstance, delta) -> bool:
    return any(o.profit > 0 and o.size <= delta * w
               for opts in instance.items for o, w in zip(opts, instance.capacities))


def gap_opt_ref(instance: GapInstance, delta=Fraction(1, 2)) -> tuple[Fraction, str]:
    """Exact OPT if enumeration is affordable; the exact matching optimum for
    large-only instances; otherwise the LP 1 value (exact simplex for small
    instances, the exact dual bound beyond)."""
    if (instance.m + 1) ** instance.n <= CAPS.gap_enum_max_assignments:
        return gap_opt_integral(instance)[0], "integral"
    if not _has_small(instance, delta):
        table = [[o.profit for o in opts] for opts in instance.items]
        return matching_opt(table).weight, "integral"
    if instance.n <= CAPS.gap_lp_exact_max_n:
        return gap_opt_fractional(instance).value, "fractional"
    return gap_dual_bound(instance), "fractional-dual"


class _KnapsackRatio:
    def __init__(self, prep, params, algorithm, opt, seed):
        self.prep, self.params, self.algorithm = prep, params, algorithm
        self.opt, self.seed = float(opt), seed

    def __call__(self, t: int) -> float:
        p, prep = self.params, self.prep
        order = permutation_array(prep.n, self.seed, t)
        if self.algorithm == "al":
            run = simulate_large(prep, order, p.cn, p.dn)
        elif self.algorithm == "as":
            run = simulate_small(prep, order, p.dn, coin_rng(self.seed, t))
        else:
            run = simulate_sequential(prep, order, p.cn, p.dn, coin_rng(self.seed, t))
        return sum(prep.profit_int[i] for i in run.packed) / prep.pden / self.opt


class _GapRatio:
    def __init__(self, prep, params, algorithm, opt, seed):
        self.prep, self.params, self.algorithm = prep, params, algorithm
        self.opt, self.seed = float(opt), seed

    def __call__(self, t: int) -> float:
        p, prep = self.params, self.prep
        order = permutation_array(prep.n, self.seed, t)
        if self.algorithm == "matching":
            run = simulate_matching(prep, order, p.cn, p.dn)
        elif self.algorithm == "lp":
            run = simulate_lp(prep, order, p.dn, coin_rng(self.seed, t))
        else:
            run = simulate_sequential_gap(prep, order, p.cn, p.dn, coin_rng(self.seed, t))
        return float(run_profit(prep, run)) / self.opt


def estimate_ratio(target: Union[KnapsackInstance, GapInstance, InstanceFamily, str],
                   algorithm: str = "sequential", trials: int = 1000, seed: int = 0,
                   params: SeqParams | None = None, n: int | None = None,
                   instance_seed: int | None = None, threads: int | None = None) -> RatioEstimate:
    """Mean of ``profit / OPT_ref`` over ``trials`` arrival orders of one instance.

    ``target`` is an instance or a family (name or :class:`InstanceFamily`),
    generated with ``instance_seed`` (default ``seed``).  For ``al``/``as``
    (knapsack) and ``matching``/``lp`` (GAP) the algorithm runs on the
    matching split view and OPT_ref refers to that view.  OPT_ref is exact
    when the solver caps allow it, otherwise a fractional upper bound, so the
    reported ratio never overstates performance.
    """
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    fam_name = "instance"
    if isinstance(target, (str, InstanceFamily)):
        fam = family(target, n) if isinstance(target, str) else target
        fam_name = fam.name
        target = generate(fam, seed if instance_seed is None else instance_seed)
    if isinstance(target, KnapsackInstance):
        if algorithm not in KNAPSACK_ALGORITHMS:
            raise ParameterError(f"knapsack algorithm must be one of {KNAPSACK_ALGORITHMS}")
        params = params.with_n(target.n) if params else _params(target.n, {}, KNAPSACK_DEFAULTS)
        inst = target
        if algorithm != "sequential":
            split = classify_knapsack(target, params.delta)
            inst = split.large if algorithm == "al" else split.small
        opt, kind = knapsack_opt_ref(inst)
        fn = _KnapsackRatio(PreparedKnapsack(inst, params.delta), params, algorithm, opt, seed)
    elif isinstance(target, GapInstance):
        if algorithm not in GAP_ALGORITHMS:
            raise ParameterError(f"GAP algorithm must be one of {GAP_ALGORITHMS}")
        params = params.with_n(target.n) if params else _params(target.n, {}, GAP_DEFAULTS)
        inst = target
        if algorithm != "sequential":
            split = classify_gap(target, params.delta)
            inst = split.large if algorithm == "matching" else split.small
        opt, kind = gap_opt_ref(inst, params.delta)
        fn = _GapRatio(PreparedGap(inst, params.delta), params, algorithm, opt, seed)
    else:
        raise ParameterError("target must be an instance or a family")
    if opt <= 0:
        raise ParameterError("OPT_ref is zero; the ratio is undefined")
    est = Estimate.from_samples(map_trials(fn, trials, threads), seed)
    return RatioEstimate(est, opt, kind, fam_name, algorithm, target.n, params)


# ---------------------------------------------------------------- CSV

def write_results_csv(rows: Iterable[Mapping], stream=None) -> str:
    buf = io.StringIO() if stream is None else stream
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in CSV_FIELDS})
    return buf.getvalue() if stream is None else ""


def read_results_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ParameterError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for row in reader:
        out.append({
            "family": row["family"], "algorithm": row["algorithm"], "n": int(row["n"]),
            "c": float(row["c"]), "d": float(row["d"]), "delta": float(row["delta"]),
            "trials": int(row["trials"]), "seed": int(row["seed"]),
            "mean": float(row["mean"]), "stderr": float(row["stderr"]),
            "opt_ref": row["opt_ref"],
        })
    return out
