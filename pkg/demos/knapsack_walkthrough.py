"""Follow one random arrival order through the sequential knapsack algorithm,
then compare the average over many orders with the offline optimum."""

from fractions import Fraction

from ropack import KNAPSACK_DEFAULTS, SeqParams, generate, random_permutation, run_sequential
from ropack.core import coin_rng
from ropack.oracles import knapsack_opt_integral
from ropack.simulator import estimate_ratio, family

SEED = 7

inst = generate(family("mixed", 40), SEED)
params = SeqParams(KNAPSACK_DEFAULTS["c"], KNAPSACK_DEFAULTS["d"], KNAPSACK_DEFAULTS["delta"], inst.n)
print(f"{inst.n} items, capacity {inst.capacity}; sample {params.cn} rounds, "
      f"large phase until round {params.dn}")

trace = run_sequential(inst, random_permutation(inst.n, SEED, 0), params, coin_rng(SEED, 0))
for rnd, (dec, left) in enumerate(zip(trace.decisions, trace.residual), start=1):
    if dec == "packed":
        print(f"  round {rnd:3d}: packed, {left} capacity left")
print(f"profit {float(trace.profit):.1f}, fractional coin rounds {list(trace.coin_rounds)}")

opt = knapsack_opt_integral(inst)[0]
print(f"OPT {float(opt):.1f}, this run got {float(trace.profit / opt):.3f} of it")

res = estimate_ratio(inst, "sequential", trials=2000, seed=SEED)
print(f"over 2000 orders: mean ratio {res.estimate.mean:.3f} +- {res.estimate.stderr:.3f} "
      f"(OPT reference: {res.opt_kind})")
print(f"the asymptotic guarantee is {float(Fraction(100, 665)):.4f}")
