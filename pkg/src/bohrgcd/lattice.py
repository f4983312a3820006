"""Exact lattice toolkit: Gram-Schmidt, integral LLL, enumeration, minima, duals.

Bases are lists of row vectors with rational entries.  Three gauges are
supported for enumeration and minima:

* ``None``: the Euclidean norm (radii are passed squared),
* :class:`WeightedBox`: ``max_i |x_i| / w_i``,
* :class:`WeightedCross`: ``sum_i w_i |x_i|``, the polar body of the box with
  the same weights.

No floating point is used anywhere; enumeration is an exhaustive
Fincke-Pohst search over an LLL-reduced basis followed by exact filtering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from gmpy2 import divexact, mpz

from .core import DomainError, to_fraction

__all__ = [
    "Basis",
    "BudgetExceededError",
    "DegenerateBasisError",
    "GSOData",
    "Minima",
    "WeightedBox",
    "WeightedCross",
    "dual_basis",
    "enumerate_shortest",
    "first_minimum",
    "gso",
    "is_lll_reduced",
    "lll_reduce",
    "successive_minima",
    "transference_product",
]

DEFAULT_DELTA = Fraction(99, 100)
ENUM_MAX_DIM = 20
EXACT_MINIMA_MAX_DIM = 10


class DegenerateBasisError(DomainError):
    """The rows are linearly dependent."""


class BudgetExceededError(RuntimeError):
    """A search would exceed its declared size budget."""


class Basis:
    """Immutable full-rank lattice basis, rows of exact rationals."""

    __slots__ = ("rows", "d", "n")

    def __init__(self, rows: Sequence[Sequence]):
        rows = tuple(tuple(to_fraction(x) for x in r) for r in rows)
        if not rows:
            raise DomainError("empty basis")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise DomainError("ragged basis")
        self.rows = rows
        self.d = len(rows)
        self.n = n

    @classmethod
    def from_int_rows(cls, rows: Sequence[Sequence[int]]) -> "Basis":
        return cls(rows)

    def __len__(self) -> int:
        return self.d

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, i):
        return self.rows[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Basis) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        body = ", ".join("(" + ", ".join(str(x) for x in r) + ")" for r in self.rows)
        return f"Basis([{body}])"

    @property
    def is_integral(self) -> bool:
        return all(x.denominator == 1 for r in self.rows for x in r)

    def denominator(self) -> int:
        return math.lcm(*(x.denominator for r in self.rows for x in r))

    def int_rows(self) -> list[list[int]]:
        if not self.is_integral:
            raise DomainError("basis has non-integral entries")
        return [[x.numerator for x in r] for r in self.rows]

    def scale_columns(self, factors: Sequence) -> "Basis":
        f = [to_fraction(x) for x in factors]
        return Basis([[x * c for x, c in zip(r, f)] for r in self.rows])


@dataclass(frozen=True)
class GSOData:
    mu: tuple[tuple[Fraction, ...], ...]
    bstar_sq: tuple[Fraction, ...]
    bstar: tuple[tuple[Fraction, ...], ...]


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def gso(basis: Basis) -> GSOData:
    """Exact Gram-Schmidt orthogonalization.  ``mu`` has unit diagonal."""
    d = basis.d
    bstar: list[list[Fraction]] = []
    bsq: list[Fraction] = []
    mu = [[Fraction(0)] * d for _ in range(d)]
    for i, b in enumerate(basis.rows):
        v = list(b)
        for j in range(i):
            m = _dot(b, bstar[j]) / bsq[j]
            mu[i][j] = m
            if m:
                v = [x - m * y for x, y in zip(v, bstar[j])]
        mu[i][i] = Fraction(1)
        nsq = _dot(v, v)
        if nsq == 0:
            raise DegenerateBasisError(f"row {i} depends on the previous rows")
        bstar.append(v)
        bsq.append(nsq)
    return GSOData(
        mu=tuple(tuple(r) for r in mu),
        bstar_sq=tuple(bsq),
        bstar=tuple(tuple(r) for r in bstar),
    )


# --------------------------------------------------------------------------
# integral LLL (Cohen, Algorithm 2.6.7 with exact subdeterminants)

def _lll_int(b: list[list[int]], num: int, den: int) -> list[list[int]]:
    """Integral LLL (Cohen, Alg. 2.6.7) with Lovasz constant num/den.

    All state is integral: ``dd`` holds Gram determinants and ``lam`` the
    scaled Gram-Schmidt coefficients, so every division below is exact.
    Arithmetic runs on gmpy2 integers, which is several times faster than
    Python ints at the sizes Coppersmith lattices produce.
    """
    n = len(b)
    if n <= 1:
        if n == 1 and not any(b[0]):
            raise DegenerateBasisError("zero vector")
        return [list(r) for r in b]
    b = [[mpz(x) for x in r] for r in b]
    # dd[i + 1] = Gram determinant of b[0..i]; lam[k][j] = dd[j + 1] * mu[k][j]
    dd = [mpz(1)] * (n + 1)
    lam = [[mpz(0)] * n for _ in range(n)]
    for k in range(n):
        bk = b[k]
        for j in range(k + 1):
            u = sum((x * y for x, y in zip(bk, b[j])), mpz(0))
            lk, lj = lam[k], lam[j]
            for i in range(j):
                u = divexact(dd[i + 1] * u - lk[i] * lj[i], dd[i])
            if j < k:
                lk[j] = u
            else:
                if u == 0:
                    raise DegenerateBasisError(f"row {k} depends on the previous rows")
                dd[k + 1] = u

    def red(k: int, l: int) -> None:
        lk = lam[k]
        dl = dd[l + 1]
        if 2 * abs(lk[l]) > dl:
            q = (2 * lk[l] + dl) // (2 * dl)
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            lk[l] -= q * dl
            ll = lam[l]
            for i in range(l):
                lk[i] -= q * ll[i]

    k = 1
    while k < n:
        red(k, k - 1)
        lkk = lam[k][k - 1]
        if den * (dd[k + 1] * dd[k - 1] + lkk * lkk) < num * dd[k] * dd[k]:
            b[k], b[k - 1] = b[k - 1], b[k]
            lk, lk1 = lam[k], lam[k - 1]
            for j in range(k - 1):
                lk[j], lk1[j] = lk1[j], lk[j]
            B = divexact(dd[k - 1] * dd[k + 1] + lkk * lkk, dd[k])
            dk, dk1 = dd[k], dd[k + 1]
            for i in range(k + 1, n):
                li = lam[i]
                t = li[k]
                li[k] = divexact(dk1 * li[k - 1] - lkk * t, dk)
                li[k - 1] = divexact(B * t + lkk * li[k], dk1)
            dd[k] = B
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return [[int(x) for x in r] for r in b]


def lll_reduce(basis: Basis, delta=DEFAULT_DELTA) -> Basis:
    """LLL-reduce ``basis`` with Lovasz parameter ``delta`` in (1/4, 1).

    Rational bases are scaled by the common denominator, reduced with the
    integral algorithm and scaled back, so the result is exact.
    """
    delta = to_fraction(delta)
    if not Fraction(1, 4) < delta < 1:
        raise DomainError(f"delta must lie in (1/4, 1), got {delta}")
    D = basis.denominator()
    rows = [[(x * D).numerator for x in r] for r in basis.rows]
    red = _lll_int(rows, delta.numerator, delta.denominator)
    if D == 1:
        return Basis(red)
    return Basis([[Fraction(x, D) for x in r] for r in red])


def is_lll_reduced(basis: Basis, delta=DEFAULT_DELTA) -> bool:
    """Check size reduction and the Lovasz condition exactly."""
    delta = to_fraction(delta)
    g = gso(basis)
    for i in range(basis.d):
        for j in range(i):
            if abs(g.mu[i][j]) > Fraction(1, 2):
                return False
    for i in range(1, basis.d):
        if g.bstar_sq[i] < (delta - g.mu[i][i - 1] ** 2) * g.bstar_sq[i - 1]:
            return False
    return True


# --------------------------------------------------------------------------
# gauges

@dataclass(frozen=True)
class WeightedBox:
    """Box ``{x : |x_i| <= w_i}``; gauge ``max_i |x_i| / w_i``."""

    weights: tuple[Fraction, ...]

    def __init__(self, weights: Sequence):
        w = tuple(to_fraction(x) for x in weights)
        if any(x <= 0 for x in w):
            raise DomainError("box weights must be positive")
        object.__setattr__(self, "weights", w)

    @classmethod
    def unit(cls, d: int) -> "WeightedBox":
        return cls([1] * d)

    def gauge(self, v) -> Fraction:
        return max((abs(to_fraction(x)) / w for x, w in zip(v, self.weights)), default=Fraction(0))

    def polar(self) -> "WeightedCross":
        return WeightedCross(self.weights)

    # scaled coordinates turn the gauge into the sup norm
    def _scale(self):
        return [1 / w for w in self.weights]

    def _euclid_sq(self, radius: Fraction) -> Fraction:
        return len(self.weights) * radius * radius


@dataclass(frozen=True)
class WeightedCross:
    """Weighted cross-polytope ``{y : sum_i w_i |y_i| <= 1}``, polar of the box."""

    weights: tuple[Fraction, ...]

    def __init__(self, weights: Sequence):
        w = tuple(to_fraction(x) for x in weights)
        if any(x <= 0 for x in w):
            raise DomainError("weights must be positive")
        object.__setattr__(self, "weights", w)

    def gauge(self, v) -> Fraction:
        return sum((w * abs(to_fraction(x)) for x, w in zip(v, self.weights)), Fraction(0))

    def polar(self) -> WeightedBox:
        return WeightedBox(self.weights)

    def _scale(self):
        return list(self.weights)

    def _euclid_sq(self, radius: Fraction) -> Fraction:
        return radius * radius


def _gauge_value(gauge, v) -> Fraction:
    """Squared norm for the Euclidean gauge, the gauge itself otherwise."""
    if gauge is None:
        return sum((x * x for x in v), Fraction(0))
    return gauge.gauge(v)


# --------------------------------------------------------------------------
# Fincke-Pohst enumeration

def _fp_enumerate(rows: list[tuple[Fraction, ...]], radius_sq: Fraction):
    """Yield every nonzero lattice vector of Euclidean norm^2 <= radius_sq."""
    d = len(rows)
    g = gso(Basis(rows))
    mu, B = g.mu, g.bstar_sq
    x = [0] * d
    centers = [Fraction(0)] * d
    partial = [Fraction(0)] * (d + 1)

    def isqrt_frac(f: Fraction) -> int:
        # floor(sqrt(f)) for f >= 0
        return math.isqrt(f.numerator * f.denominator) // f.denominator

    def level(i: int):
        rem = radius_sq - partial[i + 1]
        if rem < 0:
            return
        c = -sum((x[j] * mu[j][i] for j in range(i + 1, d)), Fraction(0))
        centers[i] = c
        s = isqrt_frac(rem / B[i]) + 1
        lo = math.ceil(c - s)
        hi = math.floor(c + s)
        for xi in range(lo, hi + 1):
            diff = xi - c
            val = partial[i + 1] + diff * diff * B[i]
            if val > radius_sq:
                continue
            x[i] = xi
            partial[i] = val
            if i == 0:
                if any(x):
                    yield tuple(x)
            else:
                yield from level(i - 1)
        x[i] = 0

    for coeffs in level(d - 1):
        v = [Fraction(0)] * len(rows[0])
        for cf, r in zip(coeffs, rows):
            if cf:
                v = [a + cf * b for a, b in zip(v, r)]
        yield tuple(v)


def _sign_normalize(v):
    for x in v:
        if x > 0:
            return tuple(v)
        if x < 0:
            return tuple(-y for y in v)
    return tuple(v)


def _search(basis: Basis, gauge, bound: Fraction, value_bound: Fraction):
    """Vectors with ``_gauge_value <= value_bound``; ``bound`` is the Euclidean
    radius^2 in scaled coordinates covering the gauge ball."""
    if basis.d > ENUM_MAX_DIM:
        raise BudgetExceededError(f"enumeration limited to dimension {ENUM_MAX_DIM}, got {basis.d}")
    if gauge is None:
        scale = None
        work = basis
    else:
        scale = gauge._scale()
        work = basis.scale_columns(scale)
    red = lll_reduce(work)
    found = set()
    for v in _fp_enumerate(list(red.rows), bound):
        if scale is not None:
            v = tuple(a / s for a, s in zip(v, scale))
        v = _sign_normalize(v)
        if v in found:
            continue
        if _gauge_value(gauge, v) <= value_bound:
            found.add(v)
    return found


def enumerate_shortest(basis: Basis, radius_sq, gauge=None) -> list[tuple[Fraction, ...]]:
    """All nonzero lattice vectors whose gauge is at most ``sqrt(radius_sq)``.

    Each vector is reported once, with its first nonzero coordinate positive.
    The result is sorted by gauge value, then lexicographically.
    """
    radius_sq = to_fraction(radius_sq)
    if radius_sq < 0:
        return []
    if gauge is None:
        found = _search(basis, None, radius_sq, radius_sq)
        key = lambda v: (_gauge_value(None, v), v)
    else:
        candidates = _search(basis, gauge, _euclid_sq_from_sq(gauge, radius_sq), _sqrt_upper(radius_sq))
        found = {v for v in candidates if gauge.gauge(v) ** 2 <= radius_sq}
        key = lambda v: (gauge.gauge(v), v)
    return sorted(found, key=key)


def _sqrt_upper(f: Fraction) -> Fraction:
    """Rational r with r >= sqrt(f)."""
    r = math.isqrt(f.numerator * f.denominator)
    if r * r != f.numerator * f.denominator:
        r += 1
    return Fraction(r, f.denominator)


def _euclid_sq_from_sq(gauge, radius_sq: Fraction) -> Fraction:
    if isinstance(gauge, WeightedBox):
        return len(gauge.weights) * radius_sq
    return radius_sq


# --------------------------------------------------------------------------
# minima

@dataclass(frozen=True)
class Minima:
    """Successive minima; ``lower == upper == values`` in exact mode."""

    mode: str
    lower: tuple[Fraction, ...]
    upper: tuple[Fraction, ...]
    vectors: tuple[tuple[Fraction, ...], ...] = ()

    @property
    def values(self) -> tuple[Fraction, ...]:
        if self.mode != "exact":
            raise ValueError("only bounds are available in approximate mode")
        return self.lower


def _independent_greedy(vectors, d):
    """Greedy pick of linearly independent vectors in the given order."""
    picked = []
    echelon: list[tuple[int, list[Fraction]]] = []
    for v in vectors:
        w = list(v)
        for piv, row in echelon:
            if w[piv]:
                f = w[piv] / row[piv]
                w = [a - f * b for a, b in zip(w, row)]
        piv = next((i for i, a in enumerate(w) if a), None)
        if piv is None:
            continue
        echelon.append((piv, w))
        picked.append(v)
        if len(picked) == d:
            break
    return picked


def _sqrt_lower(f: Fraction, bits: int = 64) -> Fraction:
    scale = 1 << bits
    return Fraction(math.isqrt(f.numerator * scale * scale // f.denominator), scale)


def successive_minima(basis: Basis, box: WeightedBox | WeightedCross) -> Minima:
    """Successive minima of the lattice with respect to ``box``.

    Exact (enumeration) for ``d <= 10``.  Above that, certified bounds from
    the LLL-reduced basis: the sorted basis gauges bound ``lambda_i`` from
    above, and the LLL inequality ``|b_j| <= 2^((d-1)/2) lambda_i`` (j <= i)
    combined with norm equivalence bounds it from below.
    """
    d = basis.d
    if d > EXACT_MINIMA_MAX_DIM:
        return _approx_minima(basis, box)
    scale = box._scale()
    red = lll_reduce(basis.scale_columns(scale))
    rows = [tuple(a / s for a, s in zip(r, scale)) for r in red.rows]
    rho = max(box.gauge(r) for r in rows)
    found = _search(basis, box, box._euclid_sq(rho), rho)
    ordered = sorted(found, key=lambda v: (box.gauge(v), v))
    picked = _independent_greedy(ordered, d)
    if len(picked) < d:
        raise DegenerateBasisError("lattice does not have full rank")
    vals = tuple(box.gauge(v) for v in picked)
    return Minima("exact", vals, vals, tuple(picked))


def _approx_minima(basis: Basis, box) -> Minima:
    d = basis.d
    scale = box._scale()
    red = lll_reduce(basis.scale_columns(scale))
    rows = [tuple(a / s for a, s in zip(r, scale)) for r in red.rows]
    gauges = sorted(box.gauge(r) for r in rows)
    # Euclidean lengths in scaled coordinates, prefix maxima
    lens = [_sqrt_lower(sum((x * x for x in r), Fraction(0))) for r in red.rows]
    pref, best = [], Fraction(0)
    for L in lens:
        best = max(best, L)
        pref.append(best)
    lll_factor = _sqrt_upper(Fraction(2 ** (d - 1)))
    if isinstance(box, WeightedBox):
        equiv = _sqrt_upper(Fraction(d))  # sup >= l2 / sqrt(d)
    else:
        equiv = Fraction(1)  # l1 >= l2
    lower = tuple(p / (lll_factor * equiv) for p in pref)
    lower = tuple(min(lo, up) for lo, up in zip(lower, gauges))
    return Minima("approximate", lower, tuple(gauges))


def first_minimum(basis: Basis, gauge) -> tuple[Fraction, tuple[Fraction, ...]]:
    """Exact first minimum under ``gauge`` and one vector attaining it."""
    scale = gauge._scale()
    red = lll_reduce(basis.scale_columns(scale))
    rows = [tuple(a / s for a, s in zip(r, scale)) for r in red.rows]
    rho = min(gauge.gauge(r) for r in rows)
    found = _search(basis, gauge, gauge._euclid_sq(rho), rho)
    best = min(found, key=lambda v: (gauge.gauge(v), v))
    return gauge.gauge(best), best


# --------------------------------------------------------------------------
# duality

def _inverse(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(mat)
    a = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise DegenerateBasisError("singular basis matrix")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [r[n:] for r in a]


def dual_basis(basis: Basis) -> Basis:
    """Rows ``d_i`` with ``<d_i, b_j> = [i == j]`` (square bases only)."""
    if basis.d != basis.n:
        raise DomainError("dual basis needs a square basis")
    inv = _inverse([list(r) for r in basis.rows])
    # rows of the inverse transpose
    return Basis([[inv[j][i] for j in range(basis.d)] for i in range(basis.d)])


def transference_product(basis: Basis, box: WeightedBox) -> Fraction:
    """``lambda_d(L, B) * lambda_1(L*, B*)`` with ``B*`` the weighted cross-polytope."""
    if basis.d > EXACT_MINIMA_MAX_DIM:
        raise BudgetExceededError(f"exact minima limited to dimension {EXACT_MINIMA_MAX_DIM}")
    lam_d = successive_minima(basis, box).values[-1]
    lam1_dual, _ = first_minimum(dual_basis(basis), box.polar())
    return lam_d * lam1_dual
