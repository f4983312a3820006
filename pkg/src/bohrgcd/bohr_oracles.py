"""Direct-definition scans, coded independently of :mod:`bohrgcd.bohr`.

Plain loops over exact rationals; slow, and meant only for small q.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .core import centered_rep, dist_to_nearest_int


def _poly_mod(coeffs, u, q):
    return sum(c * pow(u, i, q) for i, c in enumerate(coeffs)) % q


def bohr_set(q, values, h):
    """{s in F_q : ||v_j s / q|| <= h_j / q for all j}."""
    return {
        s for s in range(q)
        if all(dist_to_nearest_int(Fraction(v * s, q)) <= Fraction(hj, q) for v, hj in zip(values, h))
    }


def scan_U(q, polys, h):
    return sum(1 for u in range(q) if bohr_set(q, [_poly_mod(f, u, q) for f in polys], h) == {0})


def scan_V(q, polys, h):
    n = len(polys)
    total = 0
    for u in range(1, q):
        vals = [_poly_mod(f, u, q) for f in polys]
        if vals[0] == 0:
            continue
        ranges = [[x for x in range(-hj, hj + 1) if x != 0] for hj in h]
        for xs in itertools.product(*ranges):
            # x_1 f_j(u) = x_j f_1(u) is the cleared-denominator form
            if all((xs[0] * vals[j] - xs[j] * vals[0]) % q == 0 for j in range(n)):
                total += 1
    return total


def scan_J(q, lam, r, h):
    lam = Fraction(lam)
    total = 0
    ranges = [[y for y in range(-hi, hi + 1) if y % q] for hi in h]
    for ys in itertools.product(*ranges):
        num, den = lam.numerator, lam.denominator
        for y, ri in zip(ys, r):
            if ri >= 0:
                num *= y**ri
            else:
                den *= y ** (-ri)
        if (num - den) % q == 0:
            total += 1
    return total


def _agcd_value(e, r, ell, y):
    a = 1
    b = 1
    for ei, ri, yi in zip(e, r, y):
        a *= (ell * yi + ri) ** ei
        b *= ri**ei
    return (a - b) // ell


def scan_U_agcd(q, m, t, r, ell, X):
    exps = [e for e in itertools.product(range(t + 1), repeat=m) if 1 <= sum(e) <= t]
    total = 0
    for s in range(1, q):
        for y in itertools.product(range(1, q), repeat=m):
            if all(abs(centered_rep(s * _agcd_value(e, r, ell, y), q)) <= X[e] for e in exps):
                total += 1
    return total


def scan_V_agcd(q, m, t, X):
    exps = [e for e in itertools.product(range(t + 1), repeat=m) if 1 <= sum(e) <= t]
    total = 0
    for s in range(1, q):
        for y in itertools.product(range(1, q), repeat=m):
            ok = True
            for e in exps:
                v = s
                for yi, ei in zip(y, e):
                    v *= yi**ei
                if abs(centered_rep(v, q)) > X[e]:
                    ok = False
                    break
            total += ok
    return total
