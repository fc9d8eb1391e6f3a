"""Command-line front end: ``wsgreedy solve | verify | bench``.

Exit codes: 0 success, 1 verification failed, 2 invalid configuration,
3 input parse error, 4 solver stall, 5 oracle guard refusal.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

from .exceptions import WSGreedyError
from .regression import alpha_exact, condition_number_sq
from .runner import OBJECTIVES, RunConfig, bench, build_objective, certify_alpha, run, write_bench_table

CHECKS = ("supermodular", "weak", "alpha", "curvature", "transition", "optimum")


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _add_common(p, objective_required=True):
    p.add_argument("--objective", choices=OBJECTIVES, required=objective_required)
    p.add_argument("--input", help="CSV matrix: costs (kmedian), points (kmeans) or design X")
    p.add_argument("--target", help="CSV target matrix Y (sparse, smlr)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", default="auto", help="auto, exact, spectral or a manual value >= 1")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wsgreedy", description="Greedy extension for weakly supermodular set functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one solve and emit a JSON record")
    _add_common(solve)
    stop = solve.add_mutually_exclusive_group(required=True)
    stop.add_argument("--epsilon", type=float, help="bicriteria mode: aim for (1+epsilon) times the optimum")
    stop.add_argument("--target-error", type=float, help="additive mode: aim for optimum + E")
    stop.add_argument("--f-stop", type=float, help="threshold mode: extend until f(S) <= f_stop")
    solve.add_argument("--init", help="d2, greedy, none or none:i,j,... (default depends on objective)")
    solve.add_argument("--beta", type=float, default=2.0, help="D^2 oversampling factor")
    solve.add_argument("--rho", type=float, help="override the warm start's approximation ratio")
    solve.add_argument("--max-steps", type=int)
    solve.add_argument("--output", help="write the JSON record here instead of stdout")
    solve.add_argument("--oracle", action="store_true", help="also compute the brute-force optimum")

    verify = sub.add_parser("verify", help="exhaustive checks on a small instance")
    _add_common(verify)
    verify.add_argument("--check", choices=CHECKS, required=True)

    b = sub.add_parser("bench", help="epsilon sweep over random instances")
    b.add_argument("--objective", required=True, help="comma-separated objective families")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--epsilon", type=_floats, default=[1.0, 0.5, 0.25])
    b.add_argument("--repetitions", type=int, default=20)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--dim", type=int, default=2)
    b.add_argument("--beta", type=float, default=2.0)
    b.add_argument("--threads", type=int, help="default from WSGREEDY_THREADS")
    b.add_argument("--output", help="CSV path (default stdout)")
    return parser


def _solve(args) -> int:
    config = RunConfig(
        objective=args.objective,
        k=args.k,
        epsilon=args.epsilon,
        target_error=args.target_error,
        f_stop=args.f_stop,
        alpha=args.alpha,
        init=args.init,
        beta=args.beta,
        rho=args.rho,
        seed=args.seed,
        max_steps=args.max_steps,
        input=args.input,
        target=args.target,
        output=args.output,
        oracle=args.oracle,
    )
    record = run(config)
    if not args.output:
        sys.stdout.write(record.to_json())
    return 0


def _verify(args) -> int:
    from . import oracle
    from .clustering import verify_supermodular

    config = RunConfig(objective=args.objective, k=args.k, f_stop=0.0, alpha=args.alpha, input=args.input, target=args.target, init="none:0")
    f = build_objective(config)
    out = {"check": args.check, "objective": args.objective, "n": f.n}
    if args.check == "supermodular":
        ok, witness = verify_supermodular(f)
        out.update(verified=ok, witness=None if witness is None else [list(w) for w in witness])
    elif args.check == "weak":
        alpha = certify_alpha(config, f)
        rep = oracle.verify_weak_supermodularity(f, alpha.alpha)
        out.update(rep.to_dict(), alpha=alpha.alpha, alpha_scope=alpha.scope)
    elif args.check == "alpha":
        out["alpha_empirical"] = oracle.estimate_alpha_empirical(f)
        if hasattr(f, "instance"):
            out["alpha_exact"] = alpha_exact(f.instance).alpha
        out["verified"] = True
    elif args.check == "curvature":
        c = oracle.estimate_curvature(f)
        out["curvature"] = None if c != c else c
        if getattr(f, "is_css", False):
            kappa2 = condition_number_sq(f.instance.design)
            inv = None if c != c or c >= 1 else 1.0 / (1.0 - c)
            out.update(kappa_sq=kappa2, inverse_one_minus_c=inv, verified=inv is not None and inv <= kappa2 + 1e-9)
        else:
            out["verified"] = True
    elif args.check == "transition":
        if not hasattr(f, "instance"):
            raise WSGreedyError("the transition check applies to regression objectives")
        out.update(oracle.verify_transition_bound(f.instance).to_dict())
    else:
        out.update(oracle.brute_force_min(f, args.k).to_dict())
    sys.stdout.write(json.dumps(out, sort_keys=True, indent=2) + "\n")
    return 0 if out.get("verified", True) else 1


def _bench(args) -> int:
    objectives = [o.strip() for o in args.objective.split(",") if o.strip()]
    table = bench(objectives, args.n, args.k, args.epsilon, args.repetitions, args.seed, args.dim, args.beta, args.threads)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_bench_table(table, fh)
    else:
        write_bench_table(table, sys.stdout)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"solve": _solve, "verify": _verify, "bench": _bench}[args.command]
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        try:
            return handler(args)
        except WSGreedyError as exc:
            err = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}}
            sys.stdout.write(json.dumps(err, sort_keys=True) + "\n")
            return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
