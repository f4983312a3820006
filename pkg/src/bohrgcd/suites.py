"""Invariant suites behind ``bohrgcd verify``.

Each suite returns a JSON-ready dict ``{"suite", "passed", "checks"}`` whose
content depends only on the seed, never on timing.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .coppersmith import (
    AgcdInstance,
    CopperParams,
    build_shift_system,
    dual_box_weights,
    dual_membership,
    dual_param_roundtrip,
    generate_instance,
    lattice_invariants,
    planted_dual_vector,
)
from .core import Stream, is_prime
from .lattice import (
    Basis,
    WeightedBox,
    WeightedCross,
    _inverse,
    enumerate_shortest,
    is_lll_reduced,
    lll_reduce,
    transference_product,
)
from .numtheory import (
    fourth_moment_exact,
    fourth_moment_float,
    moment_ratio,
    sum_omega_ap,
    sum_tau_power,
    sum_z_over_phi,
)
from .polynomials import _bareiss_det

SUITES = ("dual", "lattice", "charsum", "arith")


def _check(name: str, passed: bool, **detail) -> dict:
    return {"name": name, "passed": bool(passed), **detail}


def _summary(suite: str, checks: list[dict]) -> dict:
    return {"suite": suite, "passed": all(c["passed"] for c in checks), "checks": checks}


# --------------------------------------------------------------------------
# dual lattice

def random_instance(m: int, a_max: int, rng: Stream) -> AgcdInstance:
    """Unplanted instance with all entries below ``a_max`` and unit root bounds."""
    a0 = rng.randint(2, a_max - 1)
    a = tuple(rng.randint(1, a_max - 1) for _ in range(m))
    return AgcdInstance(a0, a, (1,) * m, Fraction(1, 2))


def planted_grid(seed: int) -> list[tuple[AgcdInstance, CopperParams]]:
    """Small planted instances for m in {1, 2}, k <= t <= 3."""
    out = []
    for m in (1, 2):
        for t in (1, 2, 3):
            for k in range(1, t + 1):
                rng = Stream(seed, m, t, k)
                inst = generate_instance(16, m, 7, Fraction(1, 2), rng)
                out.append((inst, CopperParams(m, t, k)))
    return out


def planted_dual_ok(inst: AgcdInstance, params: CopperParams) -> tuple[bool, bool]:
    """(membership, gauge <= dim / p) for the planted dual vector at u = 1."""
    system = build_shift_system(inst, params)
    y = planted_dual_vector(inst, params.t, 1)
    member = dual_membership(y, system, 1)
    gauge = WeightedCross(dual_box_weights(inst.X, params.t)).gauge(y)
    return member, gauge <= Fraction(params.dim, inst.planted.p)


def dual_suite(seed: int = 0, instances: int = 20) -> dict:
    checks = []
    for m in (1, 2):
        for t in (1, 2, 3):
            ok = 0
            for i in range(instances):
                inst = random_instance(m, 10**6, Stream(seed, 1, m, t, i))
                system = build_shift_system(inst, CopperParams(m, t, 1))
                ok += dual_param_roundtrip(system, 1, samples=10, seed=seed + i)
            checks.append(_check(f"roundtrip m={m} t={t}", ok == instances, passed_instances=ok, instances=instances))
    bad = []
    for inst, params in planted_grid(seed):
        member, short = planted_dual_ok(inst, params)
        if not (member and short):
            bad.append([params.m, params.t, params.k])
    checks.append(_check("planted dual vector", not bad, failures=bad))
    return _summary("dual", checks)


# --------------------------------------------------------------------------
# lattice reduction

def random_basis(d: int, bits: int, rng: Stream) -> list[list[int]]:
    """Random nonsingular integer d x d matrix with entries in [0, 2^bits)."""
    while True:
        rows = [[rng.randbits(bits) for _ in range(d)] for _ in range(d)]
        try:
            _inverse([[Fraction(x) for x in r] for r in rows])
            return rows
        except ZeroDivisionError:
            continue


def _same_lattice(a: list[list[int]], b: list[list[int]]) -> bool:
    """b = T a with T integral and |det T| = 1."""
    inv = _inverse([[Fraction(x) for x in r] for r in a])
    d = len(a)
    T = [[sum(Fraction(b[i][k]) * inv[k][j] for k in range(d)) for j in range(d)] for i in range(d)]
    if any(x.denominator != 1 for r in T for x in r):
        return False
    # integral T with the same |det| as both bases is unimodular
    return abs(_det(b)) == abs(_det(a))


def _det(rows: list[list[int]]) -> int:
    return _bareiss_det([list(r) for r in rows], 0, 1, lambda a, b: a // b)


def lll_contract(rows: list[list[int]], delta=Fraction(99, 100)) -> dict[str, bool]:
    """Every clause of the LLL output contract on one basis."""
    d = len(rows)
    red = lll_reduce(Basis(rows), delta)
    out = red.int_rows()
    first_sq = sum(x * x for x in out[0])
    shortest = enumerate_shortest(Basis(rows), first_sq)
    lam1_sq = min(sum(x * x for x in v) for v in shortest)
    return {
        "reduced": is_lll_reduced(red, delta),
        "same_lattice": _same_lattice(rows, out),
        "first_vector": first_sq <= 2 ** (d - 1) * lam1_sq,
    }


def transference_ok(rows: list[list[int]], weights: list[Fraction]) -> tuple[bool, Fraction]:
    d = len(rows)
    prod = transference_product(Basis(rows), WeightedBox(weights))
    return 1 <= prod <= d * d, prod


def det_identity_ok(m: int, t: int, k: int, rng: Stream) -> bool:
    a0 = rng.randint(2, 2**64 - 1)
    a = tuple(rng.randint(1, 2**64 - 1) for _ in range(m))
    X = tuple(rng.randint(1, 2**16 - 1) for _ in range(m))
    inst = AgcdInstance(a0, a, X, Fraction(1, 2))
    params = CopperParams(m, t, k)
    system = build_shift_system(inst, params)
    return abs(_det(system.basis.int_rows())) == lattice_invariants(params, X, a0)[1]


def lattice_suite(seed: int = 0, bases: int = 100, lattices: int = 50) -> dict:
    checks = []
    fails = {"reduced": 0, "same_lattice": 0, "first_vector": 0}
    for i in range(bases):
        rng = Stream(seed, 2, i)
        d = rng.randint(2, 8)
        res = lll_contract(random_basis(d, 40, rng))
        for key, ok in res.items():
            fails[key] += not ok
    for key, n in fails.items():
        checks.append(_check(f"lll {key}", n == 0, failures=n, bases=bases))
    worst = Fraction(0)
    tr_fail = 0
    for i in range(lattices):
        rng = Stream(seed, 3, i)
        d = rng.randint(2, 6)
        rows = random_basis(d, 8, rng)
        weights = [Fraction(rng.randint(1, 64), rng.randint(1, 64)) for _ in range(d)]
        ok, prod = transference_ok(rows, weights)
        tr_fail += not ok
        worst = max(worst, prod / (d * d))
    checks.append(_check("transference sandwich", tr_fail == 0, failures=tr_fail, worst_over_d2=str(worst)))
    det_fail = []
    for m in (1, 2):
        for t in range(1, 5):
            for k in range(1, t + 1):
                if not det_identity_ok(m, t, k, Stream(seed, 4, m, t, k)):
                    det_fail.append([m, t, k])
    checks.append(_check("determinant identity", not det_fail, failures=det_fail))
    return _summary("lattice", checks)


# --------------------------------------------------------------------------
# character sums

def primes_in(lo: int, hi: int) -> list[int]:
    return [n for n in range(max(lo, 2), hi + 1) if is_prime(n)]


def charsum_suite(seed: int = 0) -> dict:
    checks = [_check("fourth moment (5,2) = 8", fourth_moment_exact(5, 2) == 8, value=fourth_moment_exact(5, 2))]
    small = primes_in(3, 50)[:10]
    bad = [q for q in small if fourth_moment_exact(q, 1) != q - 2]
    checks.append(_check("fourth moment H=1 equals q-2", not bad, primes=small, failures=bad))
    for q, H in ((101, 10), (211, 50)):
        ex = fourth_moment_exact(q, H)
        fl = fourth_moment_float(q, H)
        rel = abs(fl - ex) / ex
        checks.append(_check(f"exact vs float ({q},{H})", rel <= 1e-6, exact=ex, rel_err=float(f"{rel:.3e}")))
    rng = Stream(seed, 5)
    sweep = primes_in(100, 600)[:50]
    ratios = []
    for q in sweep:
        H = rng.randint(1, q - 1)
        ratios.append(moment_ratio(q, H))
    checks.append(_check("moment ratio <= 10", max(ratios) <= 10, primes=len(sweep), max_ratio=round(max(ratios), 6)))
    return _summary("charsum", checks)


# --------------------------------------------------------------------------
# arithmetic functions

PHI_WINDOW = (1.9426, 1.9446)
TAU_WINDOW = (0.95, 1.10)


def arith_suite(seed: int = 0, Z: int = 10**6) -> dict:
    phi_avg = float(sum_z_over_phi(Z) / Z)
    tau_ratio = sum_tau_power(Z, 1) / (Z * math.log(Z))
    checks = [
        _check("z/phi(z) average", PHI_WINDOW[0] <= phi_avg <= PHI_WINDOW[1], Z=Z, value=round(phi_avg, 7)),
        _check("tau average over log", TAU_WINDOW[0] <= tau_ratio <= TAU_WINDOW[1], Z=Z, value=round(tau_ratio, 6)),
        _check("sum_tau_power(3,2) = 7", sum_tau_power(3, 2) == 7),
        _check("sum_omega_ap(9,4,1) = 2", sum_omega_ap(9, 4, 1) == 2),
    ]
    return _summary("arith", checks)


def run_suite(name: str, seed: int = 0) -> dict:
    fn = {"dual": dual_suite, "lattice": lattice_suite, "charsum": charsum_suite, "arith": arith_suite}.get(name)
    if fn is None:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return fn(seed=seed)
