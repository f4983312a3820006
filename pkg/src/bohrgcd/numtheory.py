"""Arithmetic functions, their summatory sums and multiplicative characters."""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

import gmpy2
import numpy as np

from .core import DomainError, factorize, is_prime, primitive_root

__all__ = [
    "CharacterTable",
    "fourth_moment_exact",
    "fourth_moment_float",
    "moment_ratio",
    "omega",
    "phi",
    "phi_sieve",
    "omega_sieve",
    "sum_omega_ap",
    "sum_tau_power",
    "sum_z_over_phi",
    "tau",
    "tau_power_sieve",
]


def _check_pos(n: int) -> None:
    if n < 1:
        raise DomainError(f"expected a positive integer, got {n}")


def omega(n: int) -> int:
    _check_pos(n)
    return len(factorize(n))


def tau(n: int) -> int:
    _check_pos(n)
    return math.prod(e + 1 for e in factorize(n).values())


def phi(n: int) -> int:
    _check_pos(n)
    return math.prod((p - 1) * p ** (e - 1) for p, e in factorize(n).items())


# --------------------------------------------------------------------------
# sieves over [0, Z]

def _primes_upto(Z: int) -> np.ndarray:
    if Z < 2:
        return np.zeros(0, dtype=np.int64)
    mark = np.ones(Z + 1, dtype=bool)
    mark[:2] = False
    for p in range(2, math.isqrt(Z) + 1):
        if mark[p]:
            mark[p * p :: p] = False
    return np.nonzero(mark)[0]


def phi_sieve(Z: int) -> np.ndarray:
    """phi(z) for 0 <= z <= Z (index 0 unused)."""
    out = np.arange(Z + 1, dtype=np.int64)
    for p in _primes_upto(Z).tolist():
        out[p::p] -= out[p::p] // p
    return out


def omega_sieve(Z: int) -> np.ndarray:
    out = np.zeros(Z + 1, dtype=np.int64)
    for p in _primes_upto(Z).tolist():
        out[p::p] += 1
    return out


def tau_power_sieve(Z: int, nu: int) -> np.ndarray:
    """tau(z^nu) = prod (nu e_p + 1) for 0 <= z <= Z (index 0 unused)."""
    out = np.ones(Z + 1, dtype=np.int64)
    for p in _primes_upto(Z).tolist():
        e = np.zeros((Z // p) + 1, dtype=np.int64)  # e[i] = v_p(i p) over multiples
        pk = p
        while pk <= Z:
            e[pk // p :: pk // p] += 1
            pk *= p
        out[p::p] *= nu * e[1:] + 1
    return out


# --------------------------------------------------------------------------
# summatory functions

def _sum_fractions(nums: list[int], dens: list[int]) -> tuple:
    """sum n_i / d_i by binary splitting; returns an unreduced (num, den)."""
    def rec(lo, hi):
        if hi - lo == 1:
            return gmpy2.mpz(nums[lo]), gmpy2.mpz(dens[lo])
        mid = (lo + hi) // 2
        a, b = rec(lo, mid)
        c, d = rec(mid, hi)
        return a * d + b * c, b * d
    return rec(0, len(nums))


def sum_z_over_phi(Z: int) -> Fraction:
    """Exact sum_{z <= Z} z / phi(z).

    Uses z / phi(z) = sum_{d | z, d squarefree} 1 / phi(d), so the sum is
    sum over squarefree d of floor(Z / d) / phi(d), grouped by phi(d).
    """
    _check_pos(Z)
    ph = phi_sieve(Z)
    sqfree = np.ones(Z + 1, dtype=bool)
    sqfree[0] = False
    for p in _primes_upto(math.isqrt(Z)).tolist():
        sqfree[p * p :: p * p] = False
    d = np.nonzero(sqfree)[0]
    counts = Z // d
    vals = ph[d]
    order = np.argsort(vals, kind="stable")
    vals, counts = vals[order], counts[order]
    starts = np.concatenate([[0], np.nonzero(np.diff(vals))[0] + 1])
    sums = np.add.reduceat(counts, starts)
    num, den = _sum_fractions([int(x) for x in sums], [int(x) for x in vals[starts]])
    g = gmpy2.gcd(num, den)
    return Fraction(int(num // g), int(den // g))


def sum_tau_power(Z: int, nu: int) -> int:
    """Exact sum_{z <= Z} tau(z^nu)."""
    _check_pos(Z)
    if nu < 1:
        raise DomainError("nu must be >= 1")
    if nu == 1:
        r = math.isqrt(Z)
        return 2 * sum(Z // d for d in range(1, r + 1)) - r * r
    return int(tau_power_sieve(Z, nu)[1:].sum())


def sum_omega_ap(Z: int, u: int, v: int) -> int:
    """Exact sum of omega(z) over 1 <= z <= Z with z = v mod u."""
    if u < 1:
        raise DomainError("modulus u must be >= 1")
    if math.gcd(u, v) != 1:
        raise DomainError(f"gcd({u}, {v}) != 1")
    if Z < u:
        raise DomainError("need Z >= u")
    om = omega_sieve(Z)
    start = v % u or u
    return int(om[start :: u].sum())


# --------------------------------------------------------------------------
# characters

class CharacterTable:
    """Discrete logarithms modulo a prime; chi_j(g^x) = exp(2 pi i j x / (q - 1))."""

    def __init__(self, q: int):
        if not is_prime(q):
            raise DomainError(f"{q} is not prime")
        self.q = q
        self.g = primitive_root(q)
        powers = np.empty(q - 1, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            powers[i] = x
            x = x * self.g % q
        self.log = np.zeros(q, dtype=np.int64)
        self.log[powers] = np.arange(q - 1)

    def dlog(self, a: int) -> int:
        a %= self.q
        if a == 0:
            raise DomainError("0 has no discrete logarithm")
        return int(self.log[a])

    def chi(self, j: int, a: int) -> complex:
        if a % self.q == 0:
            return 0j
        return cmath.exp(2j * math.pi * ((j * self.dlog(a)) % (self.q - 1)) / (self.q - 1))


def _check_moment_args(q: int, H: int) -> None:
    if not is_prime(q):
        raise DomainError(f"{q} is not prime")
    if not 1 <= H < q:
        raise DomainError(f"need 1 <= H < q, got H={H}, q={q}")


def fourth_moment_exact(q: int, H: int) -> int:
    """sum over nonprincipal chi of |sum_{y <= H} chi(y)|^4, computed as
    (q - 1) N - H^4 with N the number of y1 y2 = y3 y4 mod q in [1, H]^4."""
    _check_moment_args(q, H)
    y = np.arange(1, H + 1, dtype=np.int64)
    prods = np.outer(y, y) % q
    counts = np.bincount(prods.ravel(), minlength=q)
    N = int((counts.astype(object) ** 2).sum())
    return (q - 1) * N - H**4


def fourth_moment_float(q: int, H: int) -> float:
    """Same quantity by direct character evaluation (independent check)."""
    _check_moment_args(q, H)
    tab = CharacterTable(q)
    logs = tab.log[1 : H + 1].astype(np.float64)
    total = 0.0
    js = np.arange(1, q - 1, dtype=np.float64)
    chunk = max(1, 2_000_000 // H)
    for start in range(0, len(js), chunk):
        jj = js[start : start + chunk]
        S = np.exp(2j * np.pi * np.outer(jj, logs) / (q - 1)).sum(axis=1)
        total += float((np.abs(S) ** 4).sum())
    return total


def moment_ratio(q: int, H: int) -> float:
    """fourth moment / (q H^2 ln^2 q)."""
    return fourth_moment_exact(q, H) / (q * H * H * math.log(q) ** 2)
