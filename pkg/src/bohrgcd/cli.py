"""Command line front end: ``bohrgcd gen | solve | bohr | verify | sweep``.

Exit codes: 0 success, 1 other failure, 2 infeasible parameters, 3 budget
exceeded.  Reports go to stdout (or ``--out``); warnings and diagnostics go
to stderr.  Output never depends on ``--jobs``; wall-clock timings are only
included with ``--timings``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .bohr import (
    CENSUS_Q_CAP,
    MonomialBohrSpec,
    count_nontrivial,
    count_U_agcd,
    count_U_general,
    count_V_agcd,
    estimate_U_agcd,
    estimate_U_general,
    minimal_reduction_constant,
    theorem_box_family,
)
from .coppersmith import InfeasibleError, SolveConfig, generate_instance, solve_agcd
from .core import DomainError, Stream, is_prime
from .experiments import (
    AGCD_SWEEP_FIELDS,
    MOMENT_FIELDS,
    RECORD_FIELDS,
    SHAPE_FIELDS,
    TrialSpec,
    run_trials,
    spec_dict,
    summarize,
    sweep_agcd,
    sweep_moment,
    sweep_shape,
)
from .lattice import DEFAULT_DELTA, BudgetExceededError
from .records import dumps_instance, format_csv, instance_digest, load_instance, parse_rational, rational_str
from .suites import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INFEASIBLE, EXIT_BUDGET = 0, 1, 2, 3

log = logging.getLogger("bohrgcd")


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise DomainError(f"environment variable {name} must be an integer, got {raw!r}") from None


def default_budget() -> int:
    """Root-search budget; overridable with BOHRGCD_BUDGET."""
    return _env_int("BOHRGCD_BUDGET", 10**6)


def default_census_cap() -> int:
    """Largest q counted exhaustively; overridable with BOHRGCD_CENSUS_CAP."""
    return _env_int("BOHRGCD_CENSUS_CAP", CENSUS_Q_CAP)


def _rational(s: str) -> Fraction:
    try:
        return parse_rational(s) if "/" in s else Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}") from exc


def _int_list(s: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in s.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from exc


def _rational_list(s: str) -> tuple[Fraction, ...]:
    return tuple(_rational(x) for x in s.split(",") if x.strip())


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {out}: {exc.strerror}") from exc
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _primes(args) -> list[int]:
    if args.q is not None:
        qs = list(args.q)
    elif args.q_min is not None and args.q_max is not None:
        qs = [n for n in range(args.q_min, args.q_max + 1) if is_prime(n)]
    else:
        raise DomainError("give --q or both --q-min and --q-max")
    if not qs:
        raise DomainError("no primes selected")
    return qs


def _add_q_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=_int_list, help="Comma-separated primes")
    p.add_argument("--q-min", type=int, help="Sweep all primes from here")
    p.add_argument("--q-max", type=int, help="...up to here (inclusive)")


def _add_instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bits", type=int, default=40, help="Bit length of p and q")
    p.add_argument("--m", type=int, default=1, help="Number of perturbed multiples")
    p.add_argument("--H", type=int, help="Offset bound H")
    p.add_argument("--h-exp", type=_rational, help="Use H = floor(base^h_exp) instead of --H")
    p.add_argument("--h-base", choices=("p", "a0"), default="p", help="Base for --h-exp")
    p.add_argument("--beta", type=_rational, default=Fraction(1, 2), help="Divisor exponent, e.g. 1/2")


def _check_h_flags(args) -> None:
    if (args.H is None) == (args.h_exp is None):
        raise DomainError("give exactly one of --H and --h-exp")


# --------------------------------------------------------------------------
# gen

def cmd_gen(args) -> int:
    _check_h_flags(args)
    inst = generate_instance(args.bits, args.m, args.H, args.beta, Stream(args.seed), args.h_exp, args.h_base)
    p, H, m = inst.planted.p, inst.X[0], inst.m
    if H ** (m + 1) > p**m:
        print(
            f"warning: H = {H} exceeds p^(1 - 1/(m+1)) for m = {m}; "
            "recovery is only expected for H = O(p^(1 - 1/(m+1) - eps))",
            file=sys.stderr,
        )
    _emit(dumps_instance(inst), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# solve

def _solve_config(args, seed: int = 0) -> SolveConfig:
    return SolveConfig(t=args.t, k=args.k, delta=args.delta, budget=args.budget, seed=seed)


def _solve_one(args) -> int:
    inst = load_instance(args.instance)
    start = time.perf_counter()
    res = solve_agcd(inst, _solve_config(args, args.seed))
    total = time.perf_counter() - start
    report = {
        "instance": instance_digest(inst),
        "params": {"m": res.params.m, "t": res.params.t, "k": res.params.k, "dim": res.params.dim},
        "feasible": res.feasible,
        "mode": res.mode,
        "short_vectors": res.n_short,
        "independent": res.independent,
        "roots": [[str(x) for x in r] for r in res],
        "trace": res.trace,
    }
    if inst.planted is not None:
        report["planted_recovered"] = inst.planted.r in res
    if args.timings:
        report["timings_ms"] = {k: round(1000 * v, 1) for k, v in res.timings.items()}
        report["timings_ms"]["total"] = round(1000 * total, 1)
    _emit(_json(report), args.out)
    # an independent system with no accepted root certifies the box is empty
    return EXIT_OK if res or res.certified else EXIT_FAIL


def _solve_batch(args) -> int:
    _check_h_flags(args)
    spec = TrialSpec(
        "solve", args.seed, args.bits, args.m, args.beta, args.H, args.h_exp, args.h_base,
        args.t, args.k, args.delta, args.budget,
    )
    records = run_trials(spec, args.trials, args.jobs, args.timings)
    summary = summarize(records)
    report = {"spec": spec_dict(spec), "summary": summary, "records": records}
    _emit(_json(report), args.out)
    if args.csv:
        fields = RECORD_FIELDS + (("wall_ms",) if args.timings else ())
        _emit(format_csv(fields, records), args.csv)
    print(f"recovered {summary['recovered']}/{summary['trials']}", file=sys.stderr)
    return EXIT_OK if summary["recovered"] else EXIT_FAIL


def cmd_solve(args) -> int:
    if (args.instance is None) == (args.trials is None):
        raise DomainError("give an instance file or --trials N, not both")
    return _solve_one(args) if args.instance else _solve_batch(args)


# --------------------------------------------------------------------------
# bohr

U_FIELDS = ("q", "a", "k", "h", "count", "nontrivial", "mode", "stderr")
AGCD_FIELDS = ("q", "m", "t", "r", "ell", "H", "count_U", "count_V", "mode", "stderr")
REDUCTION_FIELDS = ("q", "m", "t", "r", "ell", "H", "count_U", "c_min", "c_max")


def _bohr_u(args) -> list[dict]:
    rows = []
    for q in _primes(args):
        if any(x % q == 0 for x in args.a):
            log.warning("skipping q = %d: a coefficient vanishes mod q", q)
            continue
        spec = MonomialBohrSpec(q, args.a, args.k, args.h)
        row = {"q": q, "a": spec.a, "k": spec.k, "h": spec.h}
        if q > args.cap and args.sample:
            est, se = estimate_U_general(spec, args.sample, Stream(args.seed, q))
            row.update(count=f"{est:.6f}", mode="sampled", stderr=f"{se:.6f}")
        else:
            row.update(count=count_U_general(spec, args.cap), nontrivial=count_nontrivial(spec, args.cap), mode="exact")
        rows.append(row)
    exact = [r for r in rows if r["mode"] == "exact"]
    if len(exact) > 1:
        drops = sum(b["nontrivial"] < a["nontrivial"] for a, b in zip(exact, exact[1:]))
        print(f"diagnostic: nontrivial count decreases {drops} times over {len(exact)} increasing q", file=sys.stderr)
    return rows


def _agcd_budget(args) -> int:
    return args.budget if args.budget is not None else _env_int("BOHRGCD_CENSUS_BUDGET", 10**9)


def _bohr_agcd(args) -> list[dict]:
    rows = []
    for q in _primes(args):
        r = args.r if args.r else (1,) * args.m
        spec = theorem_box_family(q, args.H, args.ell, args.m, args.t, r)
        row = {"q": q, "m": args.m, "t": args.t, "r": spec.r, "ell": args.ell, "H": args.H}
        try:
            row.update(count_U=count_U_agcd(spec, _agcd_budget(args)), count_V=count_V_agcd(spec, _agcd_budget(args)), mode="exact")
        except BudgetExceededError:
            if not args.sample:
                raise
            est, se = estimate_U_agcd(spec, args.sample, Stream(args.seed, q))
            row.update(count_U=f"{est:.6f}", mode="sampled", stderr=f"{se:.6f}")
        rows.append(row)
    return rows


def _bohr_reduction(args) -> list[dict]:
    rows = []
    for q in _primes(args):
        r = args.r if args.r else (1,) * args.m
        spec = theorem_box_family(q, args.H, args.ell, args.m, args.t, r)
        budget = _agcd_budget(args)
        rows.append({
            "q": q, "m": args.m, "t": args.t, "r": spec.r, "ell": args.ell, "H": args.H,
            "count_U": count_U_agcd(spec, budget),
            "c_min": minimal_reduction_constant(spec, args.c_max, budget),
            "c_max": args.c_max,
        })
    return rows


def cmd_bohr(args) -> int:
    if args.what == "u":
        rows, fields = _bohr_u(args), U_FIELDS
    elif args.what == "agcd":
        rows, fields = _bohr_agcd(args), AGCD_FIELDS
    else:
        rows, fields = _bohr_reduction(args), REDUCTION_FIELDS
    _emit(format_csv(fields, rows), args.out)
    if args.what == "reduction" and any(r["c_min"] is None for r in rows):
        return EXIT_FAIL
    return EXIT_OK


# --------------------------------------------------------------------------
# verify and sweep

def cmd_verify(args) -> int:
    summary = run_suite(args.suite, args.seed)
    _emit(_json(summary), args.out)
    return EXIT_OK if summary["passed"] else EXIT_FAIL


def cmd_sweep(args) -> int:
    if args.what == "agcd":
        if not args.h_exps:
            raise DomainError("sweep agcd needs --h-exps")
        rows = sweep_agcd(args.bits, args.m, args.h_exps, args.beta, args.trials, args.seed, args.t, args.k, args.jobs)
        fields = AGCD_SWEEP_FIELDS
    elif args.what == "moment":
        rows, fields = sweep_moment(_primes(args), args.h_frac, args.jobs), MOMENT_FIELDS
    else:
        rows, fields = sweep_shape(_primes(args), args.a, args.k, args.h, args.jobs), SHAPE_FIELDS
    _emit(format_csv(fields, rows), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bohrgcd", description="Approximate common divisor lattice attacks and Bohr-set censuses.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="Generate a planted instance")
    _add_instance_flags(p)
    p.add_argument("--seed", type=int, default=42, help="Random seed")
    p.add_argument("--out", help="Output path (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="Run the lattice pipeline on an instance or a planted batch")
    p.add_argument("instance", nargs="?", help="Instance JSON file")
    p.add_argument("--trials", type=int, help="Run a planted batch of this size instead")
    _add_instance_flags(p)
    p.add_argument("--t", type=int, help="Lattice degree bound (with --k)")
    p.add_argument("--k", type=int, help="Multiplicity (with --t)")
    p.add_argument("--delta", type=_rational, default=DEFAULT_DELTA, help="LLL parameter")
    p.add_argument("--budget", type=int, default=None, help="Root-search budget (env BOHRGCD_BUDGET)")
    p.add_argument("--seed", type=int, default=0, help="Master seed")
    p.add_argument("--jobs", type=int, default=1, help="Worker processes for batches")
    p.add_argument("--timings", action="store_true", help="Include wall-clock timings")
    p.add_argument("--csv", help="Also write per-trial records as CSV")
    p.add_argument("--out", help="Report path (default stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bohr", help="Exact or sampled Bohr-set censuses")
    bsub = p.add_subparsers(dest="what", required=True)
    for name, help_ in (("u", "Trivial parametric Bohr sets for a monomial spec"),
                        ("agcd", "Counts for the approximate-gcd systems"),
                        ("reduction", "Smallest constant in the main reduction")):
        b = bsub.add_parser(name, help=help_)
        _add_q_flags(b)
        b.add_argument("--seed", type=int, default=0, help="Seed for sampling")
        b.add_argument("--out", help="CSV path (default stdout)")
        if name == "u":
            b.add_argument("--a", type=_int_list, default=(1, 1, 1), help="Coefficients")
            b.add_argument("--k", type=_int_list, default=(1, 2, 3), help="Exponents")
            b.add_argument("--h", type=_int_list, default=(1, 1, 1), help="Widths")
            b.add_argument("--cap", type=int, default=None, help="Largest q counted exactly (env BOHRGCD_CENSUS_CAP)")
        else:
            b.add_argument("--m", type=int, default=1)
            b.add_argument("--t", type=int, default=2)
            b.add_argument("--r", type=_int_list, help="Offsets r_i (default all 1)")
            b.add_argument("--ell", type=int, default=3)
            b.add_argument("--H", type=int, default=2)
            b.add_argument("--budget", type=int, default=None, help="Operation budget (env BOHRGCD_CENSUS_BUDGET)")
        if name == "reduction":
            b.add_argument("--c-max", type=int, default=64, help="Largest constant tried")
        else:
            b.add_argument("--sample", type=int, default=0, help="Sample size when over the cap")
    p.set_defaults(func=cmd_bohr)

    p = sub.add_parser("verify", help="Run an invariant suite")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="JSON path (default stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="Parameter sweeps")
    wsub = p.add_subparsers(dest="what", required=True)
    w = wsub.add_parser("agcd", help="Recovery rate against the offset exponent")
    w.add_argument("--bits", type=int, default=40)
    w.add_argument("--m", type=int, default=1)
    w.add_argument("--beta", type=_rational, default=Fraction(1, 2))
    w.add_argument("--h-exps", type=_rational_list, help="Comma-separated exponents of p")
    w.add_argument("--trials", type=int, default=10)
    w.add_argument("--t", type=int)
    w.add_argument("--k", type=int)
    w = wsub.add_parser("moment", help="Character fourth moment ratios")
    _add_q_flags(w)
    w.add_argument("--h-frac", type=_rational, default=Fraction(1, 4), help="H as a fraction of q")
    w = wsub.add_parser("shape", help="Nontrivial-count shape ratios")
    _add_q_flags(w)
    w.add_argument("--a", type=_int_list, default=(1, 1, 1))
    w.add_argument("--k", type=_int_list, default=(1, 2, 3))
    w.add_argument("--h", type=_int_list, default=(2, 3, 4))
    for w in wsub.choices.values():
        w.add_argument("--seed", type=int, default=0)
        w.add_argument("--jobs", type=int, default=1)
        w.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.command == "solve" and args.budget is None:
            args.budget = default_budget()
        if args.command == "bohr" and args.what == "u" and args.cap is None:
            args.cap = default_census_cap()
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        if exc.margin is not None:
            print(f"best margin: {exc.margin:.3f} bits at {exc.params}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
