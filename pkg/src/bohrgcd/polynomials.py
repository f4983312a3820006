"""Sparse multivariate integer polynomials and the root-finding they need.

A :class:`MultiPoly` maps exponent tuples to nonzero Python ints.  Besides
ring arithmetic this module provides coefficient vectorization under a fixed
monomial order, a Jacobian-rank test for algebraic independence, Sylvester
resultants, exact integer-root isolation and a small box-constrained system
solver.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import DomainError, Stream, to_fraction
from .lattice import BudgetExceededError

__all__ = [
    "MonomialOrder",
    "MultiPoly",
    "RootBudgetError",
    "SolveResult",
    "jacobian_independent",
    "jacobian_rank",
    "poly_to_vector",
    "resultant",
    "solve_system_box",
    "univ_integer_roots",
    "vector_to_poly",
]


class MultiPoly:
    """Immutable polynomial in ``nvars`` variables with integer coefficients."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], int] | None = None):
        self.nvars = nvars
        clean: dict[tuple[int, ...], int] = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != nvars or any(x < 0 for x in e):
                raise DomainError(f"bad exponent {e} for {nvars} variables")
            if c:
                clean[e] = int(c)
        self.terms = clean
        self._hash = None

    # construction ---------------------------------------------------------
    @classmethod
    def const(cls, c: int, nvars: int) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, i: int, nvars: int) -> "MultiPoly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    @classmethod
    def gens(cls, nvars: int) -> list["MultiPoly"]:
        return [cls.var(i, nvars) for i in range(nvars)]

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "MultiPoly":
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._hash = None
        return p

    # basic queries ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, var: int) -> int:
        return max((e[var] for e in self.terms), default=-1)

    def depends_on(self, var: int) -> bool:
        return self.degree_in(var) > 0

    def coefficient(self, exps: Sequence[int]) -> int:
        return self.terms.get(tuple(exps), 0)

    def content(self) -> int:
        return math.gcd(*self.terms.values()) if self.terms else 0

    def leading(self) -> tuple[tuple[int, ...], int]:
        e = max(self.terms)
        return e, self.terms[e]

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = MultiPoly.const(other, self.nvars)
        return isinstance(other, MultiPoly) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"MultiPoly({self.nvars}, {self.terms!r})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise DomainError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
            return other
        if isinstance(other, int):
            return MultiPoly.const(other, self.nvars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return MultiPoly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[tuple[int, ...], int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly._raw(self.nvars, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def scale(self, k: int) -> "MultiPoly":
        if not k:
            return MultiPoly(self.nvars)
        return MultiPoly._raw(self.nvars, {e: c * k for e, c in self.terms.items()})

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise DomainError("negative power")
        result = MultiPoly.const(1, self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def exact_div(self, other: "MultiPoly") -> "MultiPoly":
        """Quotient when ``other`` divides ``self`` exactly; raises otherwise."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lead_e, lead_c = other.leading()
        rem = dict(self.terms)
        quo: dict[tuple[int, ...], int] = {}
        while rem:
            e = max(rem)
            c = rem[e]
            de = tuple(a - b for a, b in zip(e, lead_e))
            if any(x < 0 for x in de) or c % lead_c:
                raise DomainError("division is not exact")
            qc = c // lead_c
            quo[de] = qc
            for e2, c2 in other.terms.items():
                k = tuple(a + b for a, b in zip(de, e2))
                v = rem.get(k, 0) - qc * c2
                if v:
                    rem[k] = v
                else:
                    rem.pop(k, None)
        return MultiPoly._raw(self.nvars, quo)

    # evaluation ---------------------------------------------------------
    def __call__(self, *point):
        return self.eval(point)

    def eval(self, point: Sequence) -> Fraction:
        """Exact value at a point of rationals (or ints)."""
        if len(point) != self.nvars:
            raise DomainError(f"expected {self.nvars} coordinates, got {len(point)}")
        pt = [to_fraction(x) for x in point]
        if all(x.denominator == 1 for x in pt):
            return Fraction(self.eval_int([x.numerator for x in pt]))
        total = Fraction(0)
        for e, c in self.terms.items():
            term = Fraction(c)
            for x, k in zip(pt, e):
                if k:
                    term *= x**k
            total += term
        return total

    def eval_int(self, point: Sequence[int]) -> int:
        total = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term *= x**k
            total += term
        return total

    def substitute(self, var: int, value: int) -> "MultiPoly":
        """Set variable ``var`` to an integer; ``nvars`` is kept."""
        out: dict[tuple[int, ...], int] = {}
        for e, c in self.terms.items():
            k = e[var]
            e2 = e[:var] + (0,) + e[var + 1:]
            out[e2] = out.get(e2, 0) + c * value**k
        return MultiPoly._raw(self.nvars, {e: c for e, c in out.items() if c})

    def diff(self, var: int) -> "MultiPoly":
        out = {}
        for e, c in self.terms.items():
            k = e[var]
            if k:
                out[e[:var] + (k - 1,) + e[var + 1:]] = c * k
        return MultiPoly._raw(self.nvars, out)

    def coeffs_in(self, var: int) -> list["MultiPoly"]:
        """Coefficients as a polynomial in ``var``, lowest degree first."""
        deg = self.degree_in(var)
        parts: list[dict] = [dict() for _ in range(deg + 1)]
        for e, c in self.terms.items():
            parts[e[var]][e[:var] + (0,) + e[var + 1:]] = c
        return [MultiPoly._raw(self.nvars, p) for p in parts]

    def univariate_coeffs(self) -> list[int]:
        """Dense coefficient list (lowest first) of a polynomial in at most one
        variable that actually occurs."""
        used = [i for i in range(self.nvars) if self.depends_on(i)]
        if len(used) > 1:
            raise DomainError("polynomial is not univariate")
        var = used[0] if used else 0
        deg = max(self.degree_in(var), 0)
        out = [0] * (deg + 1)
        for e, c in self.terms.items():
            out[e[var]] += c
        return out

    @classmethod
    def from_univariate(cls, coeffs: Sequence[int], var: int = 0, nvars: int = 1) -> "MultiPoly":
        terms = {}
        for k, c in enumerate(coeffs):
            if c:
                e = [0] * nvars
                e[var] = k
                terms[tuple(e)] = c
        return cls._raw(nvars, terms)


# --------------------------------------------------------------------------
# vectorization

class MonomialOrder:
    """All exponent tuples with total degree <= ``t``, sorted lexicographically.

    Tuples compare position-wise with earlier positions more significant, so
    for two variables and ``t = 1`` the order is (0,0) < (0,1) < (1,0).
    """

    def __init__(self, nvars: int, t: int):
        if nvars < 1 or t < 0:
            raise DomainError("need nvars >= 1 and t >= 0")
        self.nvars = nvars
        self.t = t
        self.monomials = tuple(
            sorted(e for e in itertools.product(range(t + 1), repeat=nvars) if sum(e) <= t)
        )
        self.index = {e: i for i, e in enumerate(self.monomials)}

    def __len__(self) -> int:
        return len(self.monomials)

    def __iter__(self):
        return iter(self.monomials)

    def __eq__(self, other) -> bool:
        return isinstance(other, MonomialOrder) and (self.nvars, self.t) == (other.nvars, other.t)

    def __hash__(self) -> int:
        return hash((self.nvars, self.t))


def poly_to_vector(p: MultiPoly, order: MonomialOrder) -> list[int]:
    if p.nvars != order.nvars:
        raise DomainError("nvars mismatch")
    if p.degree() > order.t:
        raise DomainError(f"degree {p.degree()} exceeds the cap {order.t}")
    v = [0] * len(order)
    for e, c in p.terms.items():
        v[order.index[e]] = c
    return v


def vector_to_poly(v: Sequence[int], order: MonomialOrder) -> MultiPoly:
    if len(v) != len(order):
        raise DomainError("vector length does not match the monomial order")
    return MultiPoly(order.nvars, {e: int(c) for e, c in zip(order.monomials, v) if c})


# --------------------------------------------------------------------------
# Jacobian criterion

JACOBIAN_POINTS = 3
JACOBIAN_COORD_BITS = 30


def _int_rank(rows: list[list[int]]) -> int:
    """Rank over Q by fraction-free elimination."""
    a = [list(r) for r in rows]
    nr = len(a)
    nc = len(a[0]) if a else 0
    rank = 0
    prev = 1
    for col in range(nc):
        piv = next((r for r in range(rank, nr) if a[r][col]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][col]
        for r in range(rank + 1, nr):
            a[r] = [(p * x - a[r][col] * y) // prev for x, y in zip(a[r], a[rank])]
        prev = p
        rank += 1
        if rank == nr:
            break
    return rank


def jacobian_rank(polys: Sequence[MultiPoly], rng: Stream, points: int = JACOBIAN_POINTS) -> int:
    """Largest rank of the Jacobian of ``polys`` over ``points`` random points."""
    if not polys:
        return 0
    m = polys[0].nvars
    grads = [[p.diff(j) for j in range(m)] for p in polys]
    best = 0
    for _ in range(points):
        pt = [rng.randint(1, 1 << JACOBIAN_COORD_BITS) for _ in range(m)]
        mat = [[g.eval_int(pt) for g in row] for row in grads]
        best = max(best, _int_rank(mat))
        if best == min(len(polys), m):
            break
    return best


def jacobian_independent(polys: Sequence[MultiPoly], rng: Stream) -> bool:
    """Algebraic independence of ``m`` polynomials in ``m`` variables.

    A full-rank Jacobian at one point certifies independence; "dependent" is
    reported only when all random points give a rank deficiency.
    """
    if not polys:
        return True
    m = polys[0].nvars
    if len(polys) != m or any(p.nvars != m for p in polys):
        raise DomainError("need exactly nvars polynomials")
    return jacobian_rank(polys, rng) == m


# --------------------------------------------------------------------------
# resultants

def _bareiss_det(mat: list[list], zero, one, div) -> object:
    n = len(mat)
    a = [list(r) for r in mat]
    sign = 1
    prev = one
    for k in range(n - 1):
        piv = next((r for r in range(k, n) if a[r][k] != zero), None)
        if piv is None:
            return zero
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = div(akk * row_i[j] - aik * row_k[j], prev)
        prev = akk
    det = a[n - 1][n - 1]
    return -det if sign < 0 else det


def _sylvester(pc: list, qc: list, zero) -> list[list]:
    """Sylvester matrix from coefficient lists (lowest degree first)."""
    n, m = len(pc) - 1, len(qc) - 1
    size = n + m
    rows = []
    hi_p = pc[::-1]
    hi_q = qc[::-1]
    for i in range(m):
        rows.append([zero] * i + hi_p + [zero] * (size - n - 1 - i))
    for i in range(n):
        rows.append([zero] * i + hi_q + [zero] * (size - m - 1 - i))
    return rows


def _interpolate(xs: list[int], ys: list[int]) -> list[int]:
    """Integer-coefficient polynomial through the points (Newton form)."""
    n = len(xs)
    coef = [Fraction(y) for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = [Fraction(0)] * n
    # expand Newton basis from the highest coefficient down
    for i in range(n - 1, -1, -1):
        shifted = [Fraction(0)] + poly[:-1]
        poly = [s - xs[i] * p for s, p in zip(shifted, poly)]
        poly[0] += coef[i]
    out = []
    for c in poly:
        if c.denominator != 1:
            raise ArithmeticError("interpolated resultant is not integral")
        out.append(c.numerator)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def resultant(p: MultiPoly, q: MultiPoly, var: int, method: str = "auto") -> MultiPoly:
    """Sylvester resultant of ``p`` and ``q`` with respect to variable ``var``.

    ``method="bareiss"`` runs fraction-free elimination on the polynomial
    Sylvester matrix.  ``method="interpolate"`` (the ``auto`` choice when a
    single other variable remains) evaluates that variable at enough integer
    points, takes integer Sylvester determinants by the same elimination and
    interpolates.
    """
    if p.nvars != q.nvars:
        raise DomainError("nvars mismatch")
    if not p.depends_on(var) or not q.depends_on(var):
        raise DomainError(f"both polynomials must involve variable {var}")
    nv = p.nvars
    pc, qc = p.coeffs_in(var), q.coeffs_in(var)
    others = [i for i in range(nv) if i != var and (p.depends_on(i) or q.depends_on(i))]
    if method == "auto":
        method = "interpolate" if len(others) <= 1 else "bareiss"
    if method == "interpolate" and len(others) > 1:
        raise DomainError("interpolation needs at most one remaining variable")
    if method == "bareiss" or not others:
        zero = MultiPoly(nv)
        mat = _sylvester(pc, qc, zero)
        det = _bareiss_det(mat, zero, MultiPoly.const(1, nv), lambda a, b: a.exact_div(b))
        return det
    x = others[0]
    n, m = len(pc) - 1, len(qc) - 1
    dx_p = max(c.degree_in(x) for c in pc)
    dx_q = max(c.degree_in(x) for c in qc)
    bound = max(m * dx_p + n * dx_q, 0)
    xs = [i - bound // 2 for i in range(bound + 1)]
    ys = []
    for x0 in xs:
        pv = [c.substitute(x, x0).eval_int([0] * nv) for c in pc]
        qv = [c.substitute(x, x0).eval_int([0] * nv) for c in qc]
        mat = _sylvester(pv, qv, 0)
        ys.append(_bareiss_det(mat, 0, 1, lambda a, b: a // b))
    coeffs = _interpolate(xs, ys)
    return MultiPoly.from_univariate(coeffs, var=x, nvars=nv)


# --------------------------------------------------------------------------
# integer roots

def _taylor_shift(c: list[int], a: int) -> list[int]:
    """Coefficients of p(x + a)."""
    c = list(c)
    n = len(c)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            c[j] += a * c[j + 1]
    return c


def _descartes_bound(c: list[int], a: int, b: int) -> int:
    """Sign variations bounding the number of roots of p in the open (a, b)."""
    shifted = _taylor_shift(c, a)  # p(a + y)
    w = b - a
    scaled = [x * w**i for i, x in enumerate(shifted)]  # p(a + w y), y in (0, 1)
    rev = scaled[::-1]  # y^n p(a + w / y) ... then y -> y + 1 maps (0, inf) to (0, 1)
    rev = _taylor_shift(rev, 1)
    signs = [x > 0 for x in rev if x]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def _horner(c: list[int], x: int) -> int:
    v = 0
    for a in reversed(c):
        v = v * x + a
    return v


def _cauchy_bound(c: list[int]) -> int:
    lead = abs(c[-1])
    return 1 + max((-(-abs(x) // lead) for x in c[:-1]), default=0)


def univ_integer_roots(p: MultiPoly | Sequence[int], bound: int) -> list[int]:
    """All integers ``z`` with ``|z| <= bound`` and ``p(z) = 0``.

    Real roots are isolated by bisection on integer intervals, discarding an
    interval once Descartes' rule of signs shows it root-free; intervals of
    width one have their endpoints tested exactly.
    """
    c = p.univariate_coeffs() if isinstance(p, MultiPoly) else [int(x) for x in p]
    while c and c[-1] == 0:
        c.pop()
    if not c:
        raise DomainError("the zero polynomial has every integer as a root")
    roots: set[int] = set()
    # strip the root at zero
    k = 0
    while c[k] == 0:
        k += 1
    if k:
        if bound >= 0:
            roots.add(0)
        c = c[k:]
    if len(c) == 1:
        return sorted(roots)
    L = min(bound, _cauchy_bound(c))
    if L < 1:
        return sorted(roots)
    for z in (-L, L):
        if _horner(c, z) == 0:
            roots.add(z)
    stack = [(-L, L)]
    while stack:
        a, b = stack.pop()
        if b - a <= 1:
            continue
        if _descartes_bound(c, a, b) == 0:
            continue
        mid = (a + b) // 2
        if _horner(c, mid) == 0:
            roots.add(mid)
        stack.append((a, mid))
        stack.append((mid, b))
    return sorted(roots)


# --------------------------------------------------------------------------
# systems in a box

class RootBudgetError(BudgetExceededError):
    def __init__(self, msg: str, trace: list[str]):
        super().__init__(msg)
        self.trace = list(trace)


class SolveResult(list):
    """List of integer points with the strategy trace attached."""

    def __init__(self, points: Iterable, trace: list[str]):
        super().__init__(points)
        self.trace = trace


def _scan(polys, box, budget, trace):
    vol = math.prod(hi - lo + 1 for lo, hi in box)
    if vol > budget:
        trace.append(f"scan refused: volume {vol} > budget {budget}")
        raise RootBudgetError(f"box volume {vol} exceeds budget {budget}", trace)
    trace.append(f"exhaustive scan over {vol} points")
    ranges = [range(lo, hi + 1) for lo, hi in box]
    return [pt for pt in itertools.product(*ranges) if all(p.eval_int(pt) == 0 for p in polys)]


def _roots_in(p: MultiPoly, lo: int, hi: int) -> list[int]:
    return [z for z in univ_integer_roots(p, max(abs(lo), abs(hi))) if lo <= z <= hi]


def _solve_univariate(polys, lo, hi, budget, trace):
    live = [p for p in polys if not p.is_zero()]
    if not live:
        return [pt[0] for pt in _scan([], [(lo, hi)], budget, trace)]
    cands = None
    for p in live:
        if p.is_constant():
            return []
        r = set(_roots_in(p, lo, hi))
        cands = r if cands is None else cands & r
    return sorted(cands)


def solve_system_box(polys: Sequence[MultiPoly], box: Sequence[tuple[int, int]], budget: int = 10**6) -> SolveResult:
    """Integer points of ``box`` where every polynomial vanishes.

    One variable: integer root isolation.  Two variables: resultant
    elimination of the second variable then back-substitution.  Otherwise, or
    when elimination degenerates, an exhaustive scan if the box holds at most
    ``budget`` points; beyond that :class:`RootBudgetError` with the trace.
    """
    if not polys:
        raise DomainError("empty system")
    m = polys[0].nvars
    if any(p.nvars != m for p in polys) or len(box) != m:
        raise DomainError("polynomials and box must share the number of variables")
    trace: list[str] = []
    live = [p for p in polys if not p.is_zero()]
    if any(p.is_constant() for p in live):
        trace.append("nonzero constant in system")
        return SolveResult([], trace)
    if m == 1:
        trace.append("univariate root isolation")
        pts = [(z,) for z in _solve_univariate(live, box[0][0], box[0][1], budget, trace)]
        return SolveResult(pts, trace)
    if m == 2 and live:
        pts = _solve_bivariate(live, box, budget, trace)
        return SolveResult(pts, trace)
    trace.append(f"{m} variables: no elimination strategy")
    return SolveResult(_scan(live, box, budget, trace), trace)


def _solve_bivariate(polys, box, budget, trace):
    (lo0, hi0), (lo1, hi1) = box
    xcands = None
    only_x = [p for p in polys if not p.depends_on(1)]
    for p in only_x:
        r = set(_roots_in(p, lo0, hi0))
        xcands = r if xcands is None else xcands & r
        trace.append("x-only polynomial gives direct candidates")
    bezout = None
    if xcands is None:
        with_y = [p for p in polys if p.depends_on(1)]
        for p, q in itertools.combinations(with_y, 2):
            res = resultant(p, q, 1)
            if res.is_zero():
                trace.append("resultant vanished (common factor), trying next pair")
                continue
            bezout = p.degree() * q.degree()
            trace.append(f"resultant in x of degree {res.degree()}")
            if res.is_constant():
                return []
            xcands = set(_roots_in(res, lo0, hi0))
            break
    if xcands is None:
        trace.append("elimination failed")
        return _scan(polys, box, budget, trace)
    pts = []
    for x0 in sorted(xcands):
        subs = [p.substitute(0, x0) for p in polys]
        ys = _solve_univariate(subs, lo1, hi1, budget, trace)
        pts.extend((x0, y0) for y0 in ys)
    if bezout is not None and len(pts) > bezout:
        trace.append(f"warning: {len(pts)} solutions exceed the Bezout count {bezout}")
    return pts
