"""Exhaustive counts of trivial Bohr sets and of the congruence systems that
bound them.

Residues are always judged through centered representatives: ``|x| <= h``
means the residue of ``x`` in (-q/2, q/2] has absolute value at most ``h``.
Each counter here has an independently coded direct scan in
:mod:`bohrgcd.bohr_oracles` used by the tests.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .core import DomainError, Stream, is_prime, mod_inverse, to_fraction
from .lattice import BudgetExceededError
from .polynomials import MultiPoly

__all__ = [
    "AgcdBohrSpec",
    "GeneralBohrSpec",
    "MonomialBohrSpec",
    "agcd_exponents",
    "agcd_poly",
    "check_main_reduction",
    "count_J",
    "count_U_agcd",
    "count_U_general",
    "count_V",
    "count_V_agcd",
    "count_nontrivial",
    "estimate_U_agcd",
    "estimate_U_general",
    "is_trivial",
    "minimal_reduction_constant",
    "pole_slack",
    "reduction_coeffs",
    "reduction_constant",
    "reduction_identity",
    "relation_vector",
    "shape_ratio",
    "theorem_box_family",
]

CENSUS_Q_CAP = 10**4
AGCD_BUDGET = 10**9
MAX_REDUCTION_C = 64


def _check_prime(q: int) -> None:
    if not is_prime(q):
        raise DomainError(f"{q} is not prime")


def _abs_centered(v: np.ndarray, q: int) -> np.ndarray:
    v = v % q
    return np.minimum(v, q - v)


# --------------------------------------------------------------------------
# specs

def _rank_mod(rows: list[list[int]], q: int) -> int:
    a = [[x % q for x in r] for r in rows]
    rank = 0
    ncols = max((len(r) for r in a), default=0)
    a = [r + [0] * (ncols - len(r)) for r in a]
    for col in range(ncols):
        piv = next((i for i in range(rank, len(a)) if a[i][col]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][col], -1, q)
        a[rank] = [x * inv % q for x in a[rank]]
        for i in range(len(a)):
            if i != rank and a[i][col]:
                f = a[i][col]
                a[i] = [(x - f * y) % q for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class GeneralBohrSpec:
    """Polynomials over F_q as coefficient tuples, lowest degree first."""

    q: int
    f: tuple[tuple[int, ...], ...]
    h: tuple[int, ...]

    def __post_init__(self):
        _check_prime(self.q)
        f = tuple(tuple(int(c) % self.q for c in fj) for fj in self.f)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "h", tuple(int(x) for x in self.h))
        if not f or len(f) != len(self.h):
            raise DomainError("need one width per polynomial")
        if any(x < 1 for x in self.h):
            raise DomainError("widths must be >= 1")
        if _rank_mod([list(fj) for fj in f], self.q) != len(f):
            raise DomainError("polynomials must be linearly independent over F_q")

    @property
    def n(self) -> int:
        return len(self.f)

    @property
    def degree(self) -> int:
        return max(max((i for i, c in enumerate(fj) if c), default=0) for fj in self.f)

    def values(self, u: int) -> list[int]:
        out = []
        for fj in self.f:
            v = 0
            for c in reversed(fj):
                v = (v * u + c) % self.q
            out.append(v)
        return out

    def value_table(self) -> np.ndarray:
        """Array of shape (n, q) with f_j(u) mod q."""
        q = self.q
        u = np.arange(q, dtype=np.int64)
        tab = np.zeros((self.n, q), dtype=np.int64)
        for j, fj in enumerate(self.f):
            v = np.zeros(q, dtype=np.int64)
            for c in reversed(fj):
                v = (v * u + c) % q
            tab[j] = v
        return tab


@dataclass(frozen=True)
class MonomialBohrSpec:
    """f_j(X) = a_j X^k_j.  Entries are kept sorted by width (stable)."""

    q: int
    a: tuple[int, ...]
    k: tuple[int, ...]
    h: tuple[int, ...]

    def __post_init__(self):
        _check_prime(self.q)
        if not (len(self.a) == len(self.k) == len(self.h)) or not self.a:
            raise DomainError("a, k, h must be nonempty and of equal length")
        if any(ai % self.q == 0 for ai in self.a):
            raise DomainError("coefficients must be nonzero modulo q")
        if any(ki <= 0 for ki in self.k) or len(set(self.k)) != len(self.k):
            raise DomainError("exponents must be positive and distinct")
        if any(hi < 1 for hi in self.h):
            raise DomainError("widths must be >= 1")
        trip = sorted(zip(self.h, self.a, self.k), key=lambda x: x[0])
        object.__setattr__(self, "h", tuple(int(t[0]) for t in trip))
        object.__setattr__(self, "a", tuple(int(t[1]) for t in trip))
        object.__setattr__(self, "k", tuple(int(t[2]) for t in trip))

    @property
    def n(self) -> int:
        return len(self.a)

    def general(self) -> GeneralBohrSpec:
        f = []
        for ai, ki in zip(self.a, self.k):
            c = [0] * (ki + 1)
            c[ki] = ai
            f.append(tuple(c))
        return GeneralBohrSpec(self.q, tuple(f), self.h)


def _as_general(spec) -> GeneralBohrSpec:
    return spec.general() if isinstance(spec, MonomialBohrSpec) else spec


# --------------------------------------------------------------------------
# parametric Bohr sets

def is_trivial(spec, u: int) -> bool:
    """True iff no s in [1, q-1] puts every s*f_j(u) within h_j of 0."""
    g = _as_general(spec)
    if not 0 <= u < g.q:
        raise DomainError(f"u must lie in [0, {g.q - 1}]")
    s = np.arange(1, g.q, dtype=np.int64)
    ok = np.ones(g.q - 1, dtype=bool)
    for v, hj in zip(g.values(u), g.h):
        ok &= _abs_centered(s * v, g.q) <= hj
    return not ok.any()


def _nontrivial_mask(g: GeneralBohrSpec) -> np.ndarray:
    """Boolean array over u in F_q: the Bohr set at u has a nonzero element."""
    q = g.q
    tab = g.value_table()
    s = np.arange(1, q, dtype=np.int64)
    out = np.zeros(q, dtype=bool)
    chunk = max(1, 4_000_000 // q)
    for start in range(0, q, chunk):
        sl = slice(start, min(q, start + chunk))
        ok = np.ones((sl.stop - sl.start, q - 1), dtype=bool)
        for j in range(g.n):
            ok &= _abs_centered(np.outer(tab[j, sl], s), q) <= g.h[j]
        out[sl] = ok.any(axis=1)
    return out


def _census_guard(q: int, cap: int | None) -> None:
    cap = CENSUS_Q_CAP if cap is None else cap
    if q > cap:
        raise BudgetExceededError(f"q = {q} exceeds the census cap {cap}; use the sampling estimator")


def count_U_general(spec, cap: int | None = None) -> int:
    """Number of u in F_q whose Bohr set is trivial."""
    g = _as_general(spec)
    _census_guard(g.q, cap)
    return int(g.q - _nontrivial_mask(g).sum())


def count_nontrivial(spec, cap: int | None = None) -> int:
    """Number of u in F_q whose congruence system has a solution with s != 0."""
    g = _as_general(spec)
    _census_guard(g.q, cap)
    return int(_nontrivial_mask(g).sum())


def estimate_U_general(spec, samples: int, rng: Stream) -> tuple[float, float]:
    """Sampled estimate of :func:`count_U_general` and its standard error."""
    g = _as_general(spec)
    hits = sum(is_trivial(g, rng.randbelow(g.q)) for _ in range(samples))
    p = hits / samples
    return g.q * p, g.q * math.sqrt(p * (1 - p) / samples)


def count_V(spec, cap: int | None = None) -> int:
    """Solutions (u, x_1..x_n) of x_1 f_j(u)/f_1(u) = x_j with u != 0,
    f_1(u) != 0 and 1 <= |x_j| <= h_j."""
    g = _as_general(spec)
    _census_guard(g.q, cap)
    q = g.q
    tab = g.value_table()
    h1 = g.h[0]
    x1 = np.concatenate([np.arange(-h1, 0), np.arange(1, h1 + 1)]).astype(np.int64)
    x1 = x1[(x1 % q) != 0]
    total = 0
    for u in range(1, q):
        f1 = int(tab[0, u])
        if f1 == 0:
            continue
        inv = pow(f1, -1, q)
        ok = np.ones(x1.shape, dtype=bool)
        for j in range(1, g.n):
            xj = _abs_centered(x1 * (int(tab[j, u]) * inv % q), q)
            ok &= (xj >= 1) & (xj <= g.h[j])
        total += int(ok.sum())
    return total


def pole_slack(spec) -> int:
    """#{u : u = 0 or some f_j(u) = 0}; at most deg * n + 1."""
    g = _as_general(spec)
    tab = g.value_table()
    bad = (tab == 0).any(axis=0)
    bad[0] = True
    return int(bad.sum())


# --------------------------------------------------------------------------
# the three-term hyperbola count

def count_J(q: int, lam, r: Sequence[int], h: Sequence[int], cap: int | None = None) -> int:
    """#{(y1, y2, y3): 0 < |y_i| <= h_i, lam * y1^r1 y2^r2 y3^r3 = 1 mod q}.

    Negative exponents act through inverses; y_i divisible by q never count.
    """
    _check_prime(q)
    _census_guard(q, cap)
    lam = to_fraction(lam)
    lam_mod = lam.numerator * mod_inverse(lam.denominator % q, q) % q
    if len(r) != 3 or len(h) != 3:
        raise DomainError("count_J takes exactly three exponents and widths")
    hist = []
    for ri, hi in zip(r, h):
        ys = np.concatenate([np.arange(-hi, 0), np.arange(1, hi + 1)]).astype(np.int64) % q
        ys = ys[ys != 0]
        e = ri % (q - 1)
        vals = [pow(int(y), e, q) for y in ys]
        hist.append(np.bincount(np.array(vals, dtype=np.int64), minlength=q))
    if lam_mod == 0:
        return 0
    # y3^r3 must equal (lam * v1 * v2)^-1
    inv = np.zeros(q, dtype=np.int64)
    inv[1:] = [pow(v, -1, q) for v in range(1, q)]
    v2 = np.arange(q, dtype=np.int64)
    total = 0
    for v1 in np.nonzero(hist[0])[0]:
        target = inv[(lam_mod * int(v1) % q) * v2 % q]
        total += int(hist[0][v1]) * int((hist[1] * hist[2][target] * (target != 0)).sum())
    return total


def relation_vector(k: Sequence[int]) -> tuple[int, int, int]:
    """Shortest nonzero r with r1 + r2 + r3 = 0 and k.r = 0.

    The solutions form a rank-one lattice, so the answer is its primitive
    generator, signed so that the first coordinate is positive.
    """
    k1, k2, k3 = k
    if len({k1, k2, k3}) != 3:
        raise DomainError("exponents must be distinct")
    v = (k3 - k2, k1 - k3, k2 - k1)
    g = math.gcd(*v)
    v = tuple(x // g for x in v)
    return v if v[0] > 0 else tuple(-x for x in v)


# --------------------------------------------------------------------------
# the approximate-gcd systems

def agcd_exponents(m: int, t: int) -> list[tuple[int, ...]]:
    """Exponent tuples with 1 <= |e| <= t in lexicographic order."""
    return sorted(e for e in itertools.product(range(t + 1), repeat=m) if 1 <= sum(e) <= t)


@dataclass(frozen=True)
class AgcdBohrSpec:
    q: int
    m: int
    t: int
    r: tuple[int, ...]
    ell: int
    X: Mapping[tuple[int, ...], Fraction]

    def __post_init__(self):
        _check_prime(self.q)
        object.__setattr__(self, "r", tuple(int(x) for x in self.r))
        if self.m < 1 or self.t < 1 or self.ell < 1:
            raise DomainError("need m, t, ell >= 1")
        if len(self.r) != self.m:
            raise DomainError("r must have length m")
        if any(not 1 <= ri < self.ell for ri in self.r) and self.ell > 1:
            raise DomainError("need 1 <= r_i < ell")
        X = {tuple(e): to_fraction(v) for e, v in dict(self.X).items()}
        if set(X) != set(agcd_exponents(self.m, self.t)):
            raise DomainError("X must be indexed by all e with 1 <= |e| <= t")
        if any(v < 0 for v in X.values()):
            raise DomainError("box sizes must be nonnegative")
        object.__setattr__(self, "X", X)

    def exponents(self) -> list[tuple[int, ...]]:
        return agcd_exponents(self.m, self.t)

    def scaled(self, c) -> "AgcdBohrSpec":
        c = to_fraction(c)
        return AgcdBohrSpec(self.q, self.m, self.t, self.r, self.ell, {e: c * v for e, v in self.X.items()})

    def ratio_condition(self) -> bool:
        """X_{e + unit_i} >= r_i X_e whenever both indices are present."""
        for e in self.exponents():
            for i in range(self.m):
                e2 = e[:i] + (e[i] + 1,) + e[i + 1:]
                if e2 in self.X and self.X[e2] < self.r[i] * self.X[e]:
                    return False
        return True


def theorem_box_family(q: int, H: int, ell: int, m: int, t: int, r: Sequence[int]) -> AgcdBohrSpec:
    """X_e = q H^|e| / ell."""
    X = {e: Fraction(q * H ** sum(e), ell) for e in agcd_exponents(m, t)}
    return AgcdBohrSpec(q, m, t, tuple(r), ell, X)


def agcd_poly(e: Sequence[int], r: Sequence[int], ell: int) -> MultiPoly:
    """f_e(y) = (prod (ell y_i + r_i)^e_i - prod r_i^e_i) / ell over Z."""
    m = len(r)
    ys = MultiPoly.gens(m)
    prod = MultiPoly.const(1, m)
    for i in range(m):
        prod = prod * (ys[i].scale(ell) + r[i]) ** e[i]
    num = prod - math.prod(ri**ei for ri, ei in zip(r, e))
    return num.exact_div(MultiPoly.const(ell, m))


def _agcd_guard(spec: AgcdBohrSpec, budget: int | None) -> None:
    budget = AGCD_BUDGET if budget is None else budget
    ops = (spec.q - 1) ** (spec.m + 1) * len(spec.exponents())
    if ops > budget:
        raise BudgetExceededError(f"census needs {ops} operations, budget {budget}")


def _poly_table(poly: MultiPoly, q: int, m: int) -> np.ndarray:
    """Values mod q of an integer polynomial on [1, q-1]^m, shape (q-1,)*m."""
    grids = np.meshgrid(*([np.arange(1, q, dtype=np.int64)] * m), indexing="ij")
    out = np.zeros(grids[0].shape, dtype=np.int64)
    for e, c in poly.terms.items():
        term = np.full(out.shape, c % q, dtype=np.int64)
        for g, k in zip(grids, e):
            for _ in range(k):
                term = term * g % q
        out = (out + term) % q
    return out


def _count_system(tables: list[np.ndarray], bounds: list[int], q: int) -> int:
    """#{(s, y): |s * table_e[y]| <= bound_e for all e}, s in [1, q-1]."""
    flat = [tb.reshape(-1) for tb in tables]
    total = 0
    for s in range(1, q):
        ok = None
        for tb, bd in zip(flat, bounds):
            good = _abs_centered(tb * s, q) <= bd
            ok = good if ok is None else ok & good
        total += int(ok.sum())
    return total


def _floor_bounds(spec: AgcdBohrSpec) -> list[int]:
    return [math.floor(spec.X[e]) for e in spec.exponents()]


def count_U_agcd(spec: AgcdBohrSpec, budget: int | None = None) -> int:
    """#{(s, y) in [1, q-1]^(1+m) : |s f_e(y) mod q| <= X_e for 1 <= |e| <= t}."""
    _agcd_guard(spec, budget)
    tables = [_poly_table(agcd_poly(e, spec.r, spec.ell), spec.q, spec.m) for e in spec.exponents()]
    return _count_system(tables, _floor_bounds(spec), spec.q)


def count_V_agcd(spec: AgcdBohrSpec, budget: int | None = None) -> int:
    """Same boxes for the monomial system s y^e = x_e."""
    _agcd_guard(spec, budget)
    m = spec.m
    tables = []
    for e in spec.exponents():
        mono = MultiPoly(m, {tuple(e): 1})
        tables.append(_poly_table(mono, spec.q, m))
    return _count_system(tables, _floor_bounds(spec), spec.q)


def estimate_U_agcd(spec: AgcdBohrSpec, samples: int, rng: Stream) -> tuple[float, float]:
    """Sampled estimate of :func:`count_U_agcd` and its standard error."""
    q = spec.q
    polys = [(agcd_poly(e, spec.r, spec.ell), math.floor(spec.X[e])) for e in spec.exponents()]
    hits = 0
    for _ in range(samples):
        s = rng.randint(1, q - 1)
        y = [rng.randint(1, q - 1) for _ in range(spec.m)]
        if all(abs(_centered_int(s * p.eval_int(y), q)) <= bd for p, bd in polys):
            hits += 1
    frac = hits / samples
    N = (q - 1) ** (spec.m + 1)
    return N * frac, N * math.sqrt(frac * (1 - frac) / samples)


def _centered_int(a: int, q: int) -> int:
    r = a % q
    return r - q if 2 * r > q else r


# --------------------------------------------------------------------------
# reduction to the monomial system

def reduction_coeffs(e0: Sequence[int], r: Sequence[int], ell: int) -> dict[tuple[int, ...], int]:
    """Integers c_e with ell^(|e0|-1) y^e0 = sum_{0 < e <= e0} c_e f_e(y).

    c_{e0} = 1 and, recursively,
    c_{e1} = -sum_{e : e1 <= e, 0 < |e| < |e0|} c_{e1, e} prod C(e0_i, e_i) r_i^(e0_i - e_i).
    """
    e0 = tuple(e0)
    if sum(e0) < 1 or any(x < 0 for x in e0) or len(e0) != len(r):
        raise DomainError("need a nonnegative exponent tuple with |e0| >= 1")
    return dict(_reduction(e0, tuple(r)))


_REDUCTION_CACHE: dict = {}


def _reduction(e0: tuple, r: tuple) -> dict:
    key = (e0, r)
    if key in _REDUCTION_CACHE:
        return _REDUCTION_CACHE[key]
    out = {e0: 1}
    n0 = sum(e0)
    for e in itertools.product(*(range(x + 1) for x in e0)):
        if not 0 < sum(e) < n0:
            continue
        w = math.prod(math.comb(a, b) * ri ** (a - b) for a, b, ri in zip(e0, e, r))
        for e1, c in _reduction(e, r).items():
            out[e1] = out.get(e1, 0) - c * w
    out = {e: c for e, c in out.items() if c}
    _REDUCTION_CACHE[key] = out
    return out


def reduction_identity(e0: Sequence[int], r: Sequence[int], ell: int) -> bool:
    """Check the identity of :func:`reduction_coeffs` by polynomial expansion."""
    m = len(r)
    coeffs = reduction_coeffs(e0, r, ell)
    lhs = MultiPoly(m, {tuple(e0): ell ** (sum(e0) - 1)})
    rhs = MultiPoly(m)
    for e, c in coeffs.items():
        rhs = rhs + agcd_poly(e, r, ell).scale(c)
    return lhs == rhs


def reduction_constant(e0: Sequence[int], r: Sequence[int], ell: int) -> Fraction:
    """max_e |c_e| / prod r_i^(e0_i - e_i), the measured implied constant."""
    coeffs = reduction_coeffs(e0, r, ell)
    return max(Fraction(abs(c), math.prod(ri ** (a - b) for ri, a, b in zip(r, e0, e))) for e, c in coeffs.items())


def check_main_reduction(uspec: AgcdBohrSpec, c, budget: int | None = None) -> bool:
    """count_U_agcd(X) <= count_V_agcd(c X)."""
    return count_U_agcd(uspec, budget) <= count_V_agcd(uspec.scaled(c), budget)


def minimal_reduction_constant(uspec: AgcdBohrSpec, c_max: int = MAX_REDUCTION_C, budget: int | None = None) -> int | None:
    """Smallest integer c in [1, c_max] passing :func:`check_main_reduction`."""
    u = count_U_agcd(uspec, budget)
    for c in range(1, c_max + 1):
        if u <= count_V_agcd(uspec.scaled(c), budget):
            return c
    return None


# --------------------------------------------------------------------------
# diagnostics

def shape_ratio(spec: MonomialBohrSpec, cap: int | None = None) -> float:
    """#nontrivial / (h1 h2 h3 / q + h2^3 / q + h2) for a three-term spec."""
    if spec.n != 3:
        raise DomainError("the shape ratio is defined for n = 3")
    h1, h2, h3 = spec.h
    q = spec.q
    denom = h1 * h2 * h3 / q + h2**3 / q + h2
    return count_nontrivial(spec, cap) / denom
