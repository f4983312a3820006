"""Exact integer/rational helpers, primality, factorization and seeded streams.

Everything here is a pure function of its arguments.  Python ``int`` is the
arbitrary-precision integer and :class:`fractions.Fraction` the rational type
used across the package.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

__all__ = [
    "DomainError",
    "NotInvertibleError",
    "Stream",
    "centered_rep",
    "dist_to_nearest_int",
    "factorize",
    "gen_prime",
    "is_prime",
    "mod_inverse",
    "primitive_root",
    "to_fraction",
]


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class NotInvertibleError(DomainError):
    """Raised by :func:`mod_inverse` when ``gcd(a, q) != 1``."""


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        raise TypeError("floats are not accepted where exact rationals are required")
    return Fraction(x)


def centered_rep(a: int, q: int) -> int:
    """Residue of ``a`` modulo ``q`` in the half-open interval (-q/2, q/2]."""
    if q <= 0:
        raise DomainError(f"modulus must be positive, got {q}")
    r = a % q
    if 2 * r > q:
        r -= q
    return r


def dist_to_nearest_int(x) -> Fraction:
    """Distance from ``x`` to the nearest integer, as an exact rational in [0, 1/2]."""
    x = to_fraction(x)
    frac = x - (x.numerator // x.denominator)
    return min(frac, 1 - frac)


def mod_inverse(a: int, q: int) -> int:
    if q <= 1:
        raise DomainError(f"modulus must exceed 1, got {q}")
    if math.gcd(a, q) != 1:
        raise NotInvertibleError(f"{a} is not invertible modulo {q}")
    return pow(a, -1, q)


# --------------------------------------------------------------------------
# seeded streams

class Stream:
    """Counter-based random stream (Philox) keyed by a master seed and a path.

    Two streams built from the same ``(seed, *path)`` produce identical draws,
    regardless of which other streams were created in between, so trial
    ``i`` of an experiment can be replayed in isolation.
    """

    def __init__(self, seed: int, *path: int):
        if seed < 0 or any(p < 0 for p in path):
            raise DomainError("seed and path components must be nonnegative")
        self.seed = seed
        self.path = tuple(path)
        ss = np.random.SeedSequence(entropy=seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def child(self, *path: int) -> "Stream":
        return Stream(self.seed, *self.path, *path)

    def randbits(self, k: int) -> int:
        if k <= 0:
            return 0
        nwords = (k + 31) // 32
        words = self._gen.integers(0, 1 << 32, size=nwords, dtype=np.uint64)
        v = 0
        for w in words.tolist():
            v = (v << 32) | w
        return v >> (32 * nwords - k)

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise DomainError("randbelow needs a positive bound")
        k = n.bit_length()
        while True:
            v = self.randbits(k)
            if v < n:
                return v

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed interval [lo, hi]."""
        if hi < lo:
            raise DomainError(f"empty range [{lo}, {hi}]")
        return lo + self.randbelow(hi - lo + 1)

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]


# --------------------------------------------------------------------------
# primality and factorization

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
# deterministic witness set for n < 3.3e24, covers every n < 2**64
_DET_BASES = _SMALL_PRIMES
_MR_ROUNDS = 64


def _mr_witness(n: int, d: int, s: int, a: int) -> bool:
    """True if ``a`` proves ``n`` composite."""
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return False
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def is_prime(n: int) -> bool:
    """Miller-Rabin: deterministic below 2**64, 64 pseudo-random rounds above.

    The bases used above 2**64 are drawn from a stream keyed by ``n`` itself,
    so the verdict is reproducible.
    """
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < 1 << 64:
        return not any(_mr_witness(n, d, s, a) for a in _DET_BASES)
    stream = Stream(n)
    for _ in range(_MR_ROUNDS):
        a = stream.randint(2, n - 2)
        if _mr_witness(n, d, s, a):
            return False
    return True


def gen_prime(bits: int, rng: Stream) -> int:
    """Probable prime with exactly ``bits`` bits."""
    if bits < 2:
        raise DomainError("a prime needs at least 2 bits")
    if bits == 2:
        return 2 + rng.randbits(1)
    top = 1 << (bits - 1)
    while True:
        n = rng.randbits(bits) | top | 1
        if is_prime(n):
            return n


def _pollard_brent(n: int) -> int:
    """Nontrivial factor of composite odd ``n``; restarts with c = 1, 2, 3, ..."""
    c = 0
    while True:
        c += 1
        y, r, g, q = 2, 1, 1, 1
        x = ys = 2
        m = 128
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


_TRIAL_LIMIT = 10**6


def factorize(n: int) -> dict[int, int]:
    """Prime factorization ``{p: e}`` of ``n >= 1``.

    Trial division up to 10**6, then Pollard-Brent rho on what remains.
    """
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p = 5
    while p * p <= n and p <= _TRIAL_LIMIT:
        for cand in (p, p + 2):
            while n % cand == 0:
                out[cand] = out.get(cand, 0) + 1
                n //= cand
        p += 6
    if n == 1:
        return out
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        r = math.isqrt(m)
        if r * r == m:
            stack += [r, r]
            continue
        f = _pollard_brent(m)
        stack += [f, m // f]
    return dict(sorted(out.items()))


def primitive_root(q: int) -> int:
    """Smallest generator of the multiplicative group modulo the prime ``q``."""
    if not is_prime(q):
        raise DomainError(f"{q} is not prime")
    if q == 2:
        return 1
    exps = [(q - 1) // ell for ell in factorize(q - 1)]
    g = 2
    while any(pow(g, e, q) == 1 for e in exps):
        g += 1
    return g
