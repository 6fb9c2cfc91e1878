"""Command-line front end: ``mtf-limit <command> [flags]``.

Exit codes: 0 success, 1 family validation failed, 2 invalid arguments,
3 numerical non-convergence, 4 conjecture violation found in sweep mode.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import cache_analysis, limit_law, mtf_sim, stochastic_order, weights
from .errors import ConvergenceError, DegenerateInputError, DomainError
from .rng import DEFAULT_SEED

SEED_ENV = "MTF_LIMIT_SEED"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_VIOLATION = 4


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    fam = common.add_argument_group("weight family")
    fam.add_argument("--family", choices=["dirac", "gamma", "geometric", "poisson", "custom"],
                     default="dirac", help="weight distribution")
    fam.add_argument("--alpha", type=float, default=1.0, help="Gamma shape (dimensionless, > 0)")
    fam.add_argument("--p", type=float, default=0.5, help="Geometric success probability in (0, 1)")
    fam.add_argument("--lambda", dest="lam", type=float, default=1.0, help="Poisson rate (> 0)")
    fam.add_argument("--custom-spec", metavar="PATH", default=None,
                     help="JSON descriptor {kind, params} for --family custom")
    run = common.add_argument_group("run")
    run.add_argument("--seed", type=int, default=None,
                     help=f"64-bit RNG seed; falls back to ${SEED_ENV}, then {DEFAULT_SEED}")
    run.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                     help="worker threads for sampling (count)")
    run.add_argument("--out", metavar="PATH", default=None, help="output file; standard output if omitted")
    run.add_argument("--format", choices=["csv", "json"], default="csv", help="output format")
    return common


def build_parser():
    common = _common_parser()
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="mtf-limit",
        description="Limiting move-to-front search cost and LRU miss-ratio analysis.",
        formatter_class=fmt,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text, description=help_text,
                              formatter_class=fmt)

    for name, text in (("density", "limit density and CDF on a grid (columns x,f,F)"),
                       ("cdf", "limit CDF and density on a grid (columns x,f,F)")):
        p = add(name, text)
        p.add_argument("--grid", type=int, default=1001, help="number of uniform points on [0, 1]")

    p = add("moments", "moments E[S^q] of the limit law (columns q,value)")
    p.add_argument("--q", type=_floats, default=[0.5, 1.0, 2.0, 3.0],
                   help="comma-separated moment orders, each > -1")

    p = add("laplace", "Laplace transform E[exp(-sS)] of the limit law, or of S_n with --n (columns s,value)")
    p.add_argument("--s", type=_floats, default=[0.5, 1.0, 5.0], help="comma-separated arguments s >= 0")
    p.add_argument("--n", type=int, default=None,
                   help="catalog size (items); evaluates the finite-n transform by quadrature")

    p = add("simulate", "exact stationary search costs (column cost, positions from 0)")
    p.add_argument("--n", type=int, default=100, help="catalog size (items)")
    p.add_argument("--samples", type=int, default=10_000, help="number of samples")
    p.add_argument("--method", choices=list(mtf_sim.METHODS), default="bernoulli", help="stationary sampler")
    p.add_argument("--fixed-weights", action="store_true",
                   help="draw one weight vector for all samples instead of one per sample")

    p = add("converge", "KS distance between S_n/n and the limit law (columns n,ks)")
    p.add_argument("--n", type=_ints, default=[10, 100, 1000], help="comma-separated catalog sizes (items)")
    p.add_argument("--samples", type=int, default=100_000, help="samples per catalog size")

    p = add("miss-curve", "asymptotic LRU miss probability vs cache fraction (columns alpha,pi)")
    p.add_argument("--grid", type=int, default=1001, help="number of uniform cache fractions on [0, 1]")

    p = add("size-cache", "smallest cache fraction meeting a miss budget (columns target,alpha)")
    p.add_argument("--target", type=_floats, default=[0.1], help="comma-separated miss probabilities in (0, 1]")

    p = add("conjecture", "check F_S(x) >= x (JSON dominance report)")
    p.add_argument("--grid", type=int, default=10_001, help="number of uniform points on [0, 1]")
    p.add_argument("--tolerance", type=float, default=1e-10, help="allowed violation (probability)")
    p.add_argument("--sweep", action="store_true",
                   help="ignore --family; run the built-in sweep plus random Gamma mixtures")
    p.add_argument("--count", type=int, default=100, help="random mixtures in sweep mode")

    p = add("validate", "check a family's Laplace-transform evaluators (JSON report)")
    p.add_argument("--tol", type=float, default=1e-5, help="absolute/relative check tolerance")
    return parser


def resolve_seed(seed, environ=os.environ):
    if seed is not None:
        return seed
    env = environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    return DEFAULT_SEED


def family_from_args(args):
    if args.family == "custom":
        if not args.custom_spec:
            raise UsageError("--family custom requires --custom-spec")
        try:
            return weights.load_descriptor(args.custom_spec)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read custom spec: {exc}") from exc
    params = {"gamma": {"alpha": args.alpha}, "geometric": {"p": args.p},
              "poisson": {"lambda": args.lam}}.get(args.family, {})
    return weights.from_descriptor({"kind": args.family, "params": params})


def _require(cond, message):
    if not cond:
        raise UsageError(message)


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _table(columns, rows, fmt):
    if fmt == "json":
        return json.dumps([[_json_num(v) for v in row] for row in rows]) + "\n"
    lines = [",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json_num(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if np.isfinite(v) else str(v)


def _density_table(args, law):
    _require(args.grid >= 2, "--grid must be at least 2")
    x = np.linspace(0.0, 1.0, args.grid)
    f = limit_law.density(law, x)
    F = limit_law.cdf(law, x)
    return _table(["x", "f", "F"], zip(x, f, F), args.format)


def _moments(args, law):
    _require(all(q > -1 for q in args.q), "every --q must exceed -1")
    return _table(["q", "value"], [(q, limit_law.moment(law, q)) for q in args.q], args.format)


def _laplace(args, law):
    _require(all(s >= 0 for s in args.s), "every --s must be nonnegative")
    if args.n is None:
        rows = [(s, limit_law.laplace_limit(law, s)) for s in args.s]
    else:
        _require(args.n >= 1, "--n must be at least 1")
        rows = [(s, mtf_sim.laplace_Sn_quadrature(law.family, args.n, s)) for s in args.s]
    return _table(["s", "value"], rows, args.format)


def _simulate(args, law, seed):
    _require(args.n >= 1, "--n must be at least 1")
    _require(args.samples >= 1, "--samples must be at least 1")
    fam = law.family
    if args.fixed_weights:
        w = weights.sample_weights(fam, args.n, seed)
        req = mtf_sim.request_probabilities(w)
        s = mtf_sim.sample_search_cost(req, args.samples, seed, args.method, args.threads)
    else:
        s = mtf_sim.sample_search_cost_random(fam, args.n, args.samples, seed, args.method, args.threads)
    if args.format == "json":
        return json.dumps([int(c) for c in s.costs]) + "\n"
    return "cost\n" + "".join(f"{int(c)}\n" for c in s.costs)


def _converge(args, law, seed):
    _require(all(n >= 1 for n in args.n), "every --n must be at least 1")
    _require(args.samples >= 1, "--samples must be at least 1")
    rows = []
    for n in args.n:
        s = mtf_sim.sample_search_cost_random(law.family, n, args.samples, seed, "bernoulli", args.threads)
        rows.append((n, mtf_sim.ks_statistic(s, law)))
    return _table(["n", "ks"], rows, args.format)


def _miss_curve(args, law):
    _require(args.grid >= 2, "--grid must be at least 2")
    curve = cache_analysis.miss_curve(law, args.grid)
    return curve.to_json() + "\n" if args.format == "json" else curve.to_csv()


def _size_cache(args, law):
    _require(all(0 < t <= 1 for t in args.target), "every --target must lie in (0, 1]")
    rows = [(t, cache_analysis.cache_size_for_target(law, t)) for t in args.target]
    return _table(["target", "alpha"], rows, args.format)


def _conjecture(args, law, seed):
    _require(args.grid >= 10, "--grid must be at least 10")
    _require(args.tolerance >= 0, "--tolerance must be nonnegative")
    if not args.sweep:
        return stochastic_order.dominance_report(law, args.grid, args.tolerance).to_json() + "\n", EXIT_OK
    reports = stochastic_order.builtin_sweep(args.grid, args.tolerance)
    mixed, _ = stochastic_order.random_mixture_sweep(args.count, seed, args.grid, args.tolerance)
    reports += mixed
    text = json.dumps([r.to_dict() for r in reports], sort_keys=True) + "\n"
    return text, EXIT_OK if all(r.passed for r in reports) else EXIT_VIOLATION


def _validate(args, law):
    _require(args.tol > 0, "--tol must be positive")
    report = weights.validate_family(law.family, args.tol)
    return json.dumps(report.to_dict(), sort_keys=True) + "\n", EXIT_OK if report.passed else EXIT_VALIDATION


def run(args):
    """Dispatch parsed arguments; returns ``(exit_status, output_text)``."""
    seed = resolve_seed(args.seed)
    _require(args.threads >= 1, "--threads must be at least 1")
    law = limit_law.LimitLaw.of(family_from_args(args))
    status = EXIT_OK
    cmd = args.command
    if cmd in ("density", "cdf"):
        text = _density_table(args, law)
    elif cmd == "moments":
        text = _moments(args, law)
    elif cmd == "laplace":
        text = _laplace(args, law)
    elif cmd == "simulate":
        text = _simulate(args, law, seed)
    elif cmd == "converge":
        text = _converge(args, law, seed)
    elif cmd == "miss-curve":
        text = _miss_curve(args, law)
    elif cmd == "size-cache":
        text = _size_cache(args, law)
    elif cmd == "conjecture":
        text, status = _conjecture(args, law, seed)
    else:
        text, status = _validate(args, law)
    return status, text


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        status, text = run(args)
    except (UsageError, DomainError, DegenerateInputError) as exc:
        print(f"mtf-limit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"mtf-limit {args.command}: numerical failure: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
