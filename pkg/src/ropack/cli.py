"""``ropack`` command line: instance generation, simulation and the analytic reproductions."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from ropack import analysis, simulator
from ropack.core import GapInstance, classify_gap, classify_knapsack, coin_rng, instance_to_dict, \
    load_instance, random_permutation, save_instance
from ropack.errors import CapabilityError, ContractError, ParameterError
from ropack.gap_online import GAP_DEFAULTS, run_lp_as, run_matching_al, run_sequential_gap
from ropack.knapsack_online import KNAPSACK_DEFAULTS, SeqParams, param_fraction, run_al, \
    run_as, run_sequential


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here usage errors map to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _add_cd(p):
    p.add_argument("--c", type=str, default=None, help="sampling fraction (default per problem)")
    p.add_argument("--d", type=str, default=None, help="switch fraction (default per problem)")
    p.add_argument("--delta", type=str, default=None, help="large/small threshold (default per problem)")


def _params(args, n: int, gap: bool) -> SeqParams:
    base = GAP_DEFAULTS if gap else KNAPSACK_DEFAULTS
    c = base["c"] if args.c is None else param_fraction(Fraction(args.c))
    d = base["d"] if args.d is None else param_fraction(Fraction(args.d))
    delta = base["delta"] if args.delta is None else param_fraction(Fraction(args.delta))
    if not 0 < c < d <= 1:
        raise ParameterError(f"need 0 < c < d <= 1, got c={c}, d={d}")
    return SeqParams(c, d, delta, n)


# ---------------------------------------------------------------- subcommands

def cmd_gen(args) -> int:
    inst = simulator.generate(simulator.family(args.family, args.n), args.seed)
    if args.out:
        save_instance(inst, args.out)
    else:
        sys.stdout.write(json.dumps(instance_to_dict(inst)) + "\n")
    return 0


def _trace(inst, algorithm: str, params: SeqParams, seed: int):
    perm = random_permutation(inst.n, seed, 0)
    rng = coin_rng(seed, 0)
    if isinstance(inst, GapInstance):
        if algorithm == "matching":
            return run_matching_al(classify_gap(inst, params.delta).large, perm, params)
        if algorithm == "lp":
            return run_lp_as(classify_gap(inst, params.delta).small, perm, params, rng)
        return run_sequential_gap(inst, perm, params, rng)
    if algorithm == "al":
        return run_al(classify_knapsack(inst, params.delta).large, perm, params)
    if algorithm == "as":
        return run_as(classify_knapsack(inst, params.delta).small, perm, params, rng)
    return run_sequential(inst, perm, params, rng)


def cmd_simulate(args) -> int:
    if (args.family is None) == (args.instance is None):
        raise ParameterError("give exactly one of --family or --instance")
    if args.instance:
        inst = load_instance(args.instance)
        name = args.instance
    else:
        fam = simulator.family(args.family, args.n)
        inst = simulator.generate(fam, args.seed if args.instance_seed is None else args.instance_seed)
        name = fam.name
    gap = isinstance(inst, GapInstance)
    params = _params(args, inst.n, gap)
    if args.trials < 1:
        raise ParameterError("--trials must be at least 1")
    res = simulator.estimate_ratio(inst, args.algorithm, args.trials, args.seed, params=params)
    row = dict(res.csv_row(), family=name)
    if args.format == "json":
        text = _dumps({**row, "mean": res.estimate.mean, "stderr": res.estimate.stderr,
                       "opt_kind": res.opt_kind, "opt_value": str(res.opt_ref)})
    else:
        text = simulator.write_results_csv([row])
    _emit(text, args.out)
    if args.dump_trace:
        with open(args.dump_trace, "w") as fh:
            fh.write(_trace(inst, args.algorithm, params, args.seed).to_json() + "\n")
    return 0


def cmd_probs(args) -> int:
    n, cn, dn = args.n, args.cn, args.dn
    report = analysis.probability_report(n, cn, dn, max_rank=min(n, 4))
    want = args.enumerate == "always" or (
        args.enumerate == "auto" and n <= simulator.CAPS.enumerate_max_n)
    enum = simulator.enumerate_exact(n, cn, dn) if want else None
    if cn < 1 or cn >= dn:
        raise ParameterError("Monte Carlo needs 1 <= cn < dn")
    rows = []
    for i in range(1, min(n, 4) + 1):
        mc = simulator.estimate_probability("accept-first", dict(n=n, cn=cn, dn=dn, i=i),
                                            args.trials, args.seed)
        rows.append((f"p{i}", report.p_first[i], enum.p_first[i] if enum else None, mc))
    for i, j in ((1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)):
        if max(i, j) > n:
            continue
        mc = simulator.estimate_probability("accept-pair", dict(n=n, cn=cn, dn=dn, i=i, j=j),
                                            args.trials, args.seed)
        rows.append((f"p{i}{j}", report.p_pair[i, j], enum.p_pair[i, j] if enum else None, mc))
    if args.format == "json":
        out = {"n": n, "cn": cn, "dn": dn, "trials": args.trials, "seed": args.seed,
               "rows": [{"name": k, "exact": str(e), "enumerated": None if en is None else str(en),
                         "monte_carlo": mc.mean, "stderr": mc.stderr} for k, e, en, mc in rows]}
        text = _dumps(out)
    else:
        lines = ["name,exact,exact_float,enumerated,monte_carlo,stderr"]
        for k, e, en, mc in rows:
            lines.append(f"{k},{e},{float(e):.6f},{'' if en is None else en},{mc.mean:.6f},{mc.stderr:.6f}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def cmd_bounds(args) -> int:
    problem = args.problem
    base = GAP_DEFAULTS if problem == "gap" else KNAPSACK_DEFAULTS
    c = float(base["c"]) if args.c is None else float(Fraction(args.c))
    d = float(base["d"]) if args.d is None else float(Fraction(args.d))
    if args.Delta is not None and args.delta is not None:
        raise ParameterError("give --delta or --Delta, not both")
    delta = None if args.delta is None else float(Fraction(args.delta))
    if args.Delta is not None:
        Delta = float(Fraction(args.Delta))
        if Delta <= 1:
            raise ParameterError("Delta must exceed 1")
        delta = 1 - 1 / Delta
    _emit(_dumps(analysis.ratio_bundle(c, d, delta, problem).to_dict()), args.out)
    return 0


def cmd_optimize(args) -> int:
    res = analysis.optimize_params(args.problem, args.grid_step)
    _emit(_dumps({"problem": res.problem, "c": round(res.c, 5), "d": round(res.d, 5),
                  "value": res.value, "grid_step": res.grid_step,
                  "refined_step": res.refined_step}), args.out)
    return 0


def cmd_table2(args) -> int:
    lines = ["c,d,case1,case2,case3,case4,case5"]
    for c, d, vals in analysis.table2():
        lines.append(f"{c:.5f},{d:.5f}," + ",".join(f"{v:.5f}" for v in vals))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def constants_report() -> dict:
    kc, kd = float(KNAPSACK_DEFAULTS["c"]), float(KNAPSACK_DEFAULTS["d"])
    gc, gd = float(GAP_DEFAULTS["c"]), float(GAP_DEFAULTS["d"])
    k_cases = min(analysis.case_bounds(kc, kd))
    k_as = analysis.ratio_AS_bound(kc, kd, 1.5)
    g_match = analysis.ratio_matching_bound(gc, gd)
    g_as = analysis.ratio_AS_bound(gc, gd, 2.0)
    kt, gt = 1 / 6.65, 1 / 6.99
    return {
        "knapsack": {"c": kc, "d": kd, "delta": "1/3", "target": kt,
                     "min_case_bound": k_cases, "as_bound": k_as,
                     "ok": min(k_cases, k_as) >= kt - 2e-5},
        "gap": {"c": gc, "d": gd, "delta": "1/2", "target": gt,
                "matching_bound": g_match, "as_bound": g_as,
                "ok": min(g_match, g_as) >= gt - 2e-5},
    }


def cmd_constants(args) -> int:
    rep = constants_report()
    _emit(_dumps(rep), args.out)
    return 0 if rep["knapsack"]["ok"] and rep["gap"]["ok"] else 1


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ropack", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write a generated instance as JSON")
    p.add_argument("--family", required=True, choices=simulator.FAMILIES)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("simulate", help="estimate the empirical competitive ratio")
    p.add_argument("--family", choices=simulator.FAMILIES, default=None)
    p.add_argument("--instance", default=None, help="instance JSON path")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--algorithm", default="sequential",
                   choices=sorted(set(simulator.KNAPSACK_ALGORITHMS + simulator.GAP_ALGORITHMS)))
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instance-seed", type=int, default=None)
    _add_cd(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.add_argument("--dump-trace", default=None, metavar="PATH",
                   help="write the trace of trial 0 as JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("probs", help="exact, enumerated and Monte Carlo acceptance probabilities")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cn", type=int, required=True)
    p.add_argument("--dn", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--enumerate", choices=("auto", "always", "never"), default="auto",
                   help="exhaustive column; auto runs it when n is within the cap")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_probs)

    p = sub.add_parser("bounds", help="asymptotic ratio bounds at one (c, d)")
    p.add_argument("--problem", choices=("knapsack", "gap"), default="knapsack")
    p.add_argument("--c", default=None)
    p.add_argument("--d", default=None)
    p.add_argument("--delta", default=None)
    p.add_argument("--Delta", default=None, help="1/(1-delta); alternative to --delta")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("optimize", help="search (c, d) maximising the combined bound")
    p.add_argument("--problem", choices=("knapsack", "gap", "knapsack-al"), default="knapsack")
    p.add_argument("--grid-step", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("reproduce-table2", help="case bounds at the two reference parameter pairs")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_table2)

    p = sub.add_parser("reproduce-constants", help="check the 1/6.65 and 1/6.99 guarantees")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_constants)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except CapabilityError as exc:
        print(f"ropack: capability error: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, ContractError, ValueError, ZeroDivisionError) as exc:
        print(f"ropack: parameter error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ropack: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
