"""Planted-trial runner and grid sweeps.

Trial ``i`` of an experiment draws everything from ``Stream(seed, i)``, so a
record can be reproduced in isolation and the batch result does not depend
on how trials are spread over worker processes.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .bohr import MonomialBohrSpec, count_nontrivial, shape_ratio
from .coppersmith import SolveConfig, generate_instance, solve_agcd
from .core import DomainError, Stream, to_fraction
from .lattice import DEFAULT_DELTA
from .numtheory import fourth_moment_exact, moment_ratio
from .polynomials import RootBudgetError
from .records import instance_digest, rational_str

RECORD_FIELDS = (
    "experiment", "seed", "trial", "digest", "bits", "m", "H", "beta", "t", "k",
    "feasible", "mode", "n_short", "independent", "leading_independent", "recovered", "n_roots", "status",
)


def parallel_map(fn: Callable, items: Iterable, jobs: int = 1) -> list:
    """``list(map(fn, items))``, optionally over worker processes; order kept."""
    items = list(items)
    if jobs < 1:
        raise DomainError("jobs must be >= 1")
    if jobs == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as ex:
        return list(ex.map(fn, items))


@dataclass(frozen=True)
class TrialSpec:
    experiment: str
    seed: int
    bits: int
    m: int
    beta: Fraction
    H: int | None = None
    h_exp: Fraction | None = None
    h_base: str = "p"
    t: int | None = None
    k: int | None = None
    delta: Fraction = DEFAULT_DELTA
    budget: int = 10**6

    def config(self, trial: int) -> SolveConfig:
        return SolveConfig(t=self.t, k=self.k, delta=self.delta, budget=self.budget, seed=trial)


def run_trial(spec: TrialSpec, trial: int, timings: bool = False) -> dict:
    """Generate planted instance ``trial`` and run the full pipeline on it."""
    inst = generate_instance(spec.bits, spec.m, spec.H, spec.beta, Stream(spec.seed, trial), spec.h_exp, spec.h_base)
    rec = {
        "experiment": spec.experiment,
        "seed": spec.seed,
        "trial": trial,
        "digest": instance_digest(inst),
        "bits": spec.bits,
        "m": spec.m,
        "H": inst.X[0],
        "beta": rational_str(spec.beta),
    }
    start = time.perf_counter()
    try:
        res = solve_agcd(inst, spec.config(trial))
    except RootBudgetError:
        rec.update(status="budget", recovered=False, independent=False, leading_independent=False, n_roots=0)
    else:
        rec.update(
            t=res.params.t,
            k=res.params.k,
            feasible=res.feasible,
            mode=res.mode,
            n_short=res.n_short,
            independent=res.independent,
            leading_independent=res.leading_independent,
            recovered=inst.planted.r in res,
            n_roots=len(res),
            status="ok",
        )
    if timings:
        rec["wall_ms"] = round(1000 * (time.perf_counter() - start), 1)
    return rec


def _trial_job(args) -> dict:
    spec, trial, timings = args
    return run_trial(spec, trial, timings)


def run_trials(spec: TrialSpec, trials: int, jobs: int = 1, timings: bool = False) -> list[dict]:
    if trials < 1:
        raise DomainError("trials must be >= 1")
    return parallel_map(_trial_job, [(spec, i, timings) for i in range(trials)], jobs)


def summarize(records: Sequence[dict]) -> dict:
    n = len(records)
    rec = sum(bool(r.get("recovered")) for r in records)
    ind = sum(bool(r.get("independent")) for r in records)
    lead = sum(bool(r.get("leading_independent")) for r in records)
    return {
        "trials": n,
        "recovered": rec,
        "independent": ind,
        "leading_independent": lead,
        "recovery_rate": rational_str(Fraction(rec, n)),
        "independence_rate": rational_str(Fraction(lead, n)),
        "budget_exceeded": sum(r.get("status") == "budget" for r in records),
    }


# --------------------------------------------------------------------------
# sweeps

AGCD_SWEEP_FIELDS = ("bits", "m", "h_exp", "H_first", "t", "k", "trials", "independent", "recovered", "independence_rate", "recovery_rate")


def sweep_agcd(bits: int, m: int, h_exps: Sequence, beta, trials: int, seed: int,
               t: int | None = None, k: int | None = None, jobs: int = 1) -> list[dict]:
    """Recovery and independence rates as the offset bound grows."""
    rows = []
    for idx, he in enumerate(h_exps):
        he = to_fraction(he)
        spec = TrialSpec("sweep-agcd", seed + idx, bits, m, to_fraction(beta), h_exp=he, t=t, k=k)
        recs = run_trials(spec, trials, jobs)
        s = summarize(recs)
        rows.append({
            "bits": bits, "m": m, "h_exp": rational_str(he), "H_first": recs[0]["H"],
            "t": recs[0].get("t"), "k": recs[0].get("k"), "trials": trials,
            "independent": s["leading_independent"], "recovered": s["recovered"],
            "independence_rate": s["independence_rate"], "recovery_rate": s["recovery_rate"],
        })
    return rows


MOMENT_FIELDS = ("q", "H", "moment", "ratio")


def _moment_row(args) -> dict:
    q, H = args
    return {"q": q, "H": H, "moment": fourth_moment_exact(q, H), "ratio": f"{moment_ratio(q, H):.9f}"}


def sweep_moment(primes: Sequence[int], h_frac, jobs: int = 1) -> list[dict]:
    """Fourth moment at H = max(1, floor(h_frac * q)) for each prime."""
    h_frac = to_fraction(h_frac)
    pts = [(q, min(q - 1, max(1, math.floor(h_frac * q)))) for q in primes]
    return parallel_map(_moment_row, pts, jobs)


SHAPE_FIELDS = ("q", "a", "k", "h", "nontrivial", "ratio")


def _shape_row(args) -> dict:
    q, a, k, h = args
    spec = MonomialBohrSpec(q, a, k, h)
    return {
        "q": q, "a": spec.a, "k": spec.k, "h": spec.h,
        "nontrivial": count_nontrivial(spec),
        "ratio": f"{shape_ratio(spec):.9f}",
    }


def sweep_shape(primes: Sequence[int], a: Sequence[int], k: Sequence[int], h: Sequence[int], jobs: int = 1) -> list[dict]:
    pts = [(q, tuple(a), tuple(k), tuple(h)) for q in primes if all(x % q for x in a)]
    return parallel_map(_shape_row, pts, jobs)


def spec_dict(spec: TrialSpec) -> dict:
    d = asdict(spec)
    for key in ("beta", "h_exp", "delta"):
        if d[key] is not None:
            d[key] = rational_str(d[key])
    return d


__all__ = [
    "RECORD_FIELDS",
    "TrialSpec",
    "parallel_map",
    "run_trial",
    "run_trials",
    "spec_dict",
    "summarize",
    "sweep_agcd",
    "sweep_moment",
    "sweep_shape",
]
