"""Coppersmith-style lattice attack on the approximate common divisor problem.

Given ``a0 = p*q`` and ``a_i = p*b_i + r_i`` with small ``|r_i| <= X_i``, the
shift polynomials

    f_e(x) = a0^max(k - |e|, 0) * prod_i (X_i x_i + a_i)^e_i,   |e| <= t,

all vanish modulo ``p^k`` at ``x_i = -r_i / X_i``.  Their coefficient vectors
span a lattice whose short vectors give polynomials vanishing at ``-r`` over
the integers; solving those and checking ``gcd(a0, a_i - r_i)`` recovers the
offsets.

The module also carries the dual-lattice diagnostics for the unscaled lattice
generated by ``a0^max(u - |alpha|, 0) * prod_i (a_i + x_i)^alpha_i``.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2

from .core import DomainError, Stream, centered_rep, gen_prime, to_fraction
from .lattice import (
    DEFAULT_DELTA,
    EXACT_MINIMA_MAX_DIM,
    Basis,
    BudgetExceededError,
    WeightedCross,
    dual_basis,
    first_minimum,
    lll_reduce,
)
from .polynomials import (
    MonomialOrder,
    MultiPoly,
    jacobian_rank,
    poly_to_vector,
    solve_system_box,
)

__all__ = [
    "AgcdInstance",
    "AgcdResult",
    "CopperParams",
    "InfeasibleError",
    "Planted",
    "ShiftSystem",
    "SolveConfig",
    "assumption_rate",
    "build_shift_system",
    "dual_from_params",
    "dual_generators",
    "dual_membership",
    "dual_param_roundtrip",
    "dual_box_weights",
    "feasibility",
    "feasibility_margin",
    "first_minimum_window",
    "exact_power_floor",
    "generate_instance",
    "independence_check",
    "lattice_invariants",
    "planted_dual_vector",
    "select_params",
    "solve_agcd",
]

T_MAX = 8
DIM_CAP = 45


class InfeasibleError(DomainError):
    """No parameters satisfy the lattice bound; carries the best margin (bits)."""

    def __init__(self, msg: str, margin: float | None = None, params: "CopperParams | None" = None):
        super().__init__(msg)
        self.margin = margin
        self.params = params


# --------------------------------------------------------------------------
# instances and parameters

@dataclass(frozen=True)
class Planted:
    p: int
    q: int
    b: tuple[int, ...]
    r: tuple[int, ...]


@dataclass(frozen=True)
class AgcdInstance:
    a0: int
    a: tuple[int, ...]
    X: tuple[int, ...]
    beta: Fraction
    planted: Planted | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        object.__setattr__(self, "X", tuple(int(x) for x in self.X))
        object.__setattr__(self, "beta", to_fraction(self.beta))
        if self.a0 <= 0:
            raise DomainError("a0 must be positive")
        if not self.a or len(self.a) != len(self.X):
            raise DomainError("a and X must be nonempty and of equal length")
        if any(x < 1 for x in self.X):
            raise DomainError("root bounds X_i must be >= 1")
        if not 0 < self.beta < 1:
            raise DomainError("beta must lie in (0, 1)")
        pl = self.planted
        if pl is not None:
            if pl.p * pl.q != self.a0:
                raise DomainError("planted p*q differs from a0")
            if len(pl.b) != self.m or len(pl.r) != self.m:
                raise DomainError("planted b and r must have length m")
            for ai, bi, ri, xi in zip(self.a, pl.b, pl.r, self.X):
                if abs(ri) > xi:
                    raise DomainError(f"planted offset {ri} exceeds its bound {xi}")
                if ai != pl.p * bi + ri:
                    raise DomainError("planted data inconsistent: a_i != p*b_i + r_i")

    @property
    def m(self) -> int:
        return len(self.a)

    def common_divisor(self, r: Sequence[int]) -> int:
        return math.gcd(self.a0, *(ai - ri for ai, ri in zip(self.a, r)))

    def accepts(self, r: Sequence[int]) -> bool:
        """Box membership plus gcd(a0, a_i - r_i) >= a0^beta, compared exactly."""
        if len(r) != self.m or any(abs(ri) > xi for ri, xi in zip(r, self.X)):
            return False
        g = self.common_divisor(r)
        return g ** self.beta.denominator >= self.a0 ** self.beta.numerator


@dataclass(frozen=True)
class CopperParams:
    m: int
    t: int
    k: int

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("m must be >= 1")
        if not 1 <= self.k <= self.t:
            raise DomainError(f"need 1 <= k <= t, got k={self.k}, t={self.t}")

    @property
    def dim(self) -> int:
        return math.comb(self.t + self.m, self.m)


def exact_power_floor(base: int, exponent) -> int:
    """floor(base^exponent) for a nonnegative rational exponent, exactly."""
    exponent = to_fraction(exponent)
    if exponent < 0 or base < 1:
        raise DomainError("need base >= 1 and a nonnegative exponent")
    root, _ = gmpy2.iroot(gmpy2.mpz(base) ** exponent.numerator, exponent.denominator)
    return int(root)


def generate_instance(bits: int, m: int, H: int | None, beta, rng: Stream,
                      h_exp=None, h_base: str = "p") -> AgcdInstance:
    """Planted instance: distinct ``bits``-bit primes with ``p > q``,
    ``b_j`` uniform in [1, q] and ``r_j`` uniform in [1, H].

    With ``h_exp`` the bound is H = floor(B^h_exp) where B is ``p`` or ``a0``
    according to ``h_base``.
    """
    p = gen_prime(bits, rng)
    q = p
    while q == p:
        q = gen_prime(bits, rng)
    p, q = max(p, q), min(p, q)
    if h_exp is not None:
        if h_base not in ("p", "a0"):
            raise DomainError("h_base must be 'p' or 'a0'")
        H = exact_power_floor(p if h_base == "p" else p * q, h_exp)
    if H is None or H < 1:
        raise DomainError("H must be >= 1")
    b = tuple(rng.randint(1, q) for _ in range(m))
    r = tuple(rng.randint(1, H) for _ in range(m))
    a = tuple(p * bj + rj for bj, rj in zip(b, r))
    return AgcdInstance(p * q, a, (H,) * m, to_fraction(beta), Planted(p, q, b, r))


# --------------------------------------------------------------------------
# the shift lattice

@dataclass(frozen=True)
class ShiftRow:
    e: tuple[int, ...]
    poly: MultiPoly
    vector: tuple[int, ...]


@dataclass
class ShiftSystem:
    params: CopperParams
    order: MonomialOrder
    rows: list[ShiftRow]
    basis: Basis
    a0: int
    a: tuple[int, ...]
    X: tuple[int, ...]

    def unscaled_basis(self, u: int | None = None) -> Basis:
        """Basis of the lattice before the substitution x_i -> X_i x_i, with
        ``a0`` exponent ``u`` (default ``k``, which gives exactly the shift
        lattice with all X_i = 1)."""
        return Basis(dual_generators(self.a0, self.a, self.params.t, self.params.k if u is None else u))


def _shift_poly(a0: int, a: Sequence[int], scale: Sequence[int], e: Sequence[int], ell: int) -> MultiPoly:
    m = len(a)
    xs = MultiPoly.gens(m)
    f = MultiPoly.const(a0**ell, m)
    for i in range(m):
        if e[i]:
            f = f * (xs[i].scale(scale[i]) + a[i]) ** e[i]
    return f


def build_shift_system(instance: AgcdInstance, params: CopperParams) -> ShiftSystem:
    if params.m != instance.m:
        raise DomainError("params.m differs from the instance")
    order = MonomialOrder(params.m, params.t)
    rows = []
    for e in order:
        f = _shift_poly(instance.a0, instance.a, instance.X, e, max(params.k - sum(e), 0))
        rows.append(ShiftRow(e, f, tuple(poly_to_vector(f, order))))
    basis = Basis.from_int_rows([r.vector for r in rows])
    return ShiftSystem(params, order, rows, basis, instance.a0, instance.a, instance.X)


def lattice_invariants(params: CopperParams, X: Sequence[int], a0: int) -> tuple[int, int]:
    """Dimension and determinant of the shift lattice in closed form."""
    m, t, k = params.m, params.t, params.k
    dim = math.comb(t + m, m)
    # sum over |e| <= t of e_i is C(t+m, m+1) for each i, likewise for k
    ex_num = dim * t
    ea_num = math.comb(k + m, m) * k
    assert ex_num % (m + 1) == 0 and ea_num % (m + 1) == 0
    return dim, math.prod(X) ** (ex_num // (m + 1)) * a0 ** (ea_num // (m + 1))


def _feasibility_sides(params, a0, beta, X):
    """Integers (lhs, rhs) with lhs < rhs iff the lattice bound holds.

    The bound dim^(1/2) 2^(dim/4) det^(1/N) < a0^(k beta) with N = dim+1-m is
    raised to the power 4*N*den(beta)."""
    beta = to_fraction(beta)
    dim, det = lattice_invariants(params, X, a0)
    N = dim + 1 - params.m
    b1, b2 = beta.numerator, beta.denominator
    lhs = dim ** (2 * N * b2) * 2 ** (dim * N * b2) * det ** (4 * b2)
    rhs = a0 ** (4 * params.k * b1 * N)
    return lhs, rhs, 4 * N * b2


def _log2(n: int) -> float:
    if n <= 0:
        return float("-inf")
    s = max(n.bit_length() - 64, 0)
    return math.log2(n >> s) + s


def feasibility_margin(params: CopperParams, a0: int, beta, X: Sequence[int]) -> float:
    """log2(a0^(k beta)) minus log2 of the lattice bound; positive iff feasible."""
    beta = to_fraction(beta)
    dim, det = lattice_invariants(params, X, a0)
    N = dim + 1 - params.m
    lhs = 0.5 * math.log2(dim) + dim / 4 + _log2(det) / N
    return params.k * float(beta) * _log2(a0) - lhs


def feasibility(params: CopperParams, a0: int, beta, X: Sequence[int]) -> bool:
    margin = feasibility_margin(params, a0, beta, X)
    if abs(margin) > 1e-6 * max(1.0, _log2(a0) * params.k):
        return margin > 0
    lhs, rhs, _ = _feasibility_sides(params, a0, beta, X)
    return lhs < rhs


def select_params(a0: int, beta, m: int, X: Sequence[int], t_max: int = T_MAX, dim_cap: int = DIM_CAP) -> CopperParams:
    """Feasible (t, k) of least dimension, ties broken by smaller t then k."""
    grid = [CopperParams(m, t, k) for t in range(1, t_max + 1) for k in range(1, t + 1)]
    grid = [p for p in grid if p.dim <= dim_cap]
    grid.sort(key=lambda p: (p.dim, p.t, p.k))
    best = None
    for p in grid:
        if feasibility(p, a0, beta, X):
            return p
        mg = feasibility_margin(p, a0, beta, X)
        if best is None or mg > best[0]:
            best = (mg, p)
    margin, bp = best if best else (None, None)
    raise InfeasibleError(
        f"no feasible (t, k) with t <= {t_max}, dim <= {dim_cap}; best margin {margin:.2f} bits at {bp}",
        margin,
        bp,
    )


# --------------------------------------------------------------------------
# the pipeline

@dataclass
class SolveConfig:
    t: int | None = None
    k: int | None = None
    delta: Fraction = DEFAULT_DELTA
    budget: int = 10**6
    seed: int = 0
    t_max: int = T_MAX
    dim_cap: int = DIM_CAP
    scan_factor: int = 3

    def __post_init__(self):
        if (self.t is None) != (self.k is None):
            raise DomainError("give both t and k or neither")
        self.delta = to_fraction(self.delta)


class AgcdResult(list):
    """Recovered offset vectors (sorted) plus pipeline diagnostics."""

    def __init__(self, roots, **info):
        super().__init__(roots)
        self.params: CopperParams = info.get("params")
        self.feasible: bool = info.get("feasible", False)
        self.n_short: int = info.get("n_short", 0)
        self.independent: bool = info.get("independent", False)
        self.leading_independent: bool = info.get("leading_independent", False)
        self.certified: bool = info.get("certified", False)
        self.mode: str = info.get("mode", "")
        self.trace: list[str] = info.get("trace", [])
        self.timings: dict[str, float] = info.get("timings", {})


def _vector_poly(v: Sequence[int], order: MonomialOrder, X: Sequence[int]) -> MultiPoly:
    """Polynomial P with P(z) = Q_v(z / X); integral since column j of the
    lattice is divisible by X^j."""
    terms = {}
    for c, e in zip(v, order.monomials):
        if c:
            s = math.prod(x**k for x, k in zip(X, e))
            qc, rem = divmod(int(c), s)
            if rem:
                raise ArithmeticError("lattice vector not divisible by the column scaling")
            terms[e] = qc
    return MultiPoly(order.nvars, terms)


def _short_enough(v: Sequence[int], a0: int, k: int, beta: Fraction) -> bool:
    """||v||_1 < a0^(k beta): then the polynomial's value at the true root is
    a multiple of p^k smaller than p^k in absolute value, hence zero."""
    l1 = sum(abs(int(x)) for x in v)
    return l1 ** beta.denominator < a0 ** (k * beta.numerator)


def _reduced_candidates(instance: AgcdInstance, params: CopperParams, delta) -> tuple[ShiftSystem, list]:
    system = build_shift_system(instance, params)
    # shorter rows first saves swaps; the lattice is unchanged
    rows = sorted(system.basis.int_rows(), key=lambda r: sum(x * x for x in r))
    red = lll_reduce(Basis.from_int_rows(rows), delta).int_rows()
    red.sort(key=lambda r: sum(x * x for x in r))
    return system, red


def _select_independent(polys: list[MultiPoly], m: int, rng: Stream) -> list[int]:
    """Greedy indices of polynomials whose Jacobian keeps full row rank."""
    chosen: list[int] = []
    for i, p in enumerate(polys):
        if p.is_constant():
            continue
        if jacobian_rank([polys[j] for j in chosen] + [p], rng) == len(chosen) + 1:
            chosen.append(i)
            if len(chosen) == m:
                break
    return chosen


def solve_agcd(instance: AgcdInstance, config: SolveConfig | None = None) -> AgcdResult:
    """All offset vectors ``r`` in the box with gcd(a0, a_i - r_i) >= a0^beta
    that the lattice exposes.

    Without explicit ``t, k`` the parameters come from :func:`select_params`
    (which raises :class:`InfeasibleError`).  Explicit parameters skip the
    a-priori bound; each reduced vector is then certified individually by the
    l1 test and every candidate is still checked by the gcd.
    """
    cfg = config or SolveConfig()
    timings: dict[str, float] = {}
    trace: list[str] = []
    m = instance.m
    t0 = time.perf_counter()
    if cfg.t is None:
        params = select_params(instance.a0, instance.beta, m, instance.X, cfg.t_max, cfg.dim_cap)
    else:
        params = CopperParams(m, cfg.t, cfg.k)
    feasible = feasibility(params, instance.a0, instance.beta, instance.X)
    trace.append(f"params t={params.t} k={params.k} dim={params.dim} feasible={feasible}")
    timings["params"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    system, red = _reduced_candidates(instance, params, cfg.delta)
    timings["lll"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    depth = min(cfg.scan_factor * params.dim, len(red))
    vecs = red[:depth]
    short = [_short_enough(v, instance.a0, params.k, instance.beta) for v in vecs]
    n_short = sum(short)
    polys = [_vector_poly(v, system.order, instance.X) for v in vecs]
    rng = Stream(cfg.seed)
    short_idx = [i for i in range(depth) if short[i]]
    chosen = _select_independent([polys[i] for i in short_idx], m, rng)
    chosen = [short_idx[i] for i in chosen]
    independent = len(chosen) == m
    # greedy selection keeps the first m short vectors exactly when they are independent
    leading_independent = chosen == short_idx[:m] and independent
    certified = independent
    if independent:
        mode = "independent"
        system_polys = [polys[i] for i in chosen] + [polys[i] for i in short_idx if i not in chosen]
    else:
        # fill up from the remaining reduced vectors; candidates stay gcd-checked
        rest = [i for i in range(depth) if i not in chosen]
        extra = _select_independent([polys[i] for i in chosen] + [polys[i] for i in rest], m, rng)
        ext = [([*chosen] + rest)[i] for i in extra]
        if len(ext) == m and m > 1:
            mode = "extended"
            system_polys = [polys[i] for i in ext]
            trace.append(f"only {len(chosen)} independent short vectors; extended with longer ones")
        else:
            mode = "single"
            first = short_idx[0] if short_idx else 0
            system_polys = [polys[first]]
            trace.append("falling back to the shortest vector's root set")
    timings["select"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    box = [(-x, x) for x in instance.X]
    sols = solve_system_box(system_polys, box, cfg.budget)
    trace.extend(sols.trace)
    roots = sorted({tuple(-z for z in pt) for pt in sols if instance.accepts(tuple(-z for z in pt))})
    timings["roots"] = time.perf_counter() - t0
    return AgcdResult(
        roots,
        params=params,
        feasible=feasible,
        n_short=n_short,
        independent=independent,
        leading_independent=leading_independent,
        certified=certified,
        mode=mode,
        trace=trace,
        timings=timings,
    )


def independence_check(instance: AgcdInstance, params: CopperParams, seed: int = 0, delta=DEFAULT_DELTA) -> bool:
    """Do the first m short-enough reduced vectors give independent polynomials?"""
    system, red = _reduced_candidates(instance, params, delta)
    short = [v for v in red if _short_enough(v, instance.a0, params.k, instance.beta)][: instance.m]
    if len(short) < instance.m:
        return False
    polys = [_vector_poly(v, system.order, instance.X) for v in short]
    return jacobian_rank(polys, Stream(seed)) == instance.m


def assumption_rate(bits: int, m: int, H: int, beta, params: CopperParams, trials: int, seed: int):
    """Fraction of planted trials passing :func:`independence_check`, with
    per-trial records ``(trial, passed)``."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    records = []
    for i in range(trials):
        inst = generate_instance(bits, m, H, beta, Stream(seed, i))
        records.append((i, independence_check(inst, params, seed)))
    return Fraction(sum(ok for _, ok in records), trials), records


# --------------------------------------------------------------------------
# dual diagnostics

def dual_generators(a0: int, a: Sequence[int], t: int, u: int) -> list[list[int]]:
    """Coefficient vectors of a0^max(0, u - |alpha|) * prod (a_i + x_i)^alpha_i
    for |alpha| <= t, in the monomial order."""
    if u < 0:
        raise DomainError("u must be >= 0")
    m = len(a)
    order = MonomialOrder(m, t)
    ones = [1] * m
    return [poly_to_vector(_shift_poly(a0, a, ones, al, max(0, u - sum(al))), order) for al in order]


def _multi_binom(j, g) -> int:
    return math.prod(math.comb(ji, gi) for ji, gi in zip(j, g))


def dual_from_params(kv: dict, a0: int, a: Sequence[int], t: int, u: int) -> list[Fraction]:
    """The dual vector parametrized by integers ``kv[gamma]``:

    y_j = a0^-u * sum_{gamma <= j} (-1)^|j - gamma| a0^min(u, |gamma|) k_gamma
          * prod_i C(j_i, gamma_i) a_i^(j_i - gamma_i).
    """
    order = MonomialOrder(len(a), t)
    out = []
    for j in order:
        s = 0
        for g in itertools.product(*(range(ji + 1) for ji in j)):
            c = kv.get(g, 0)
            if c:
                sign = -1 if (sum(j) - sum(g)) % 2 else 1
                s += (sign * a0 ** min(u, sum(g)) * c * _multi_binom(j, g)
                      * math.prod(ai ** (ji - gi) for ai, ji, gi in zip(a, j, g)))
        out.append(Fraction(s, a0**u))
    return out


def _params_from_dual(y: Sequence, a0: int, a: Sequence[int], t: int, u: int) -> dict | None:
    """Solve the triangular closed-form system for the k's; None if some k is
    not an integer."""
    order = MonomialOrder(len(a), t)
    kv: dict = {}
    for j, yj in zip(order.monomials, y):
        s = to_fraction(yj) * a0**u
        for g in itertools.product(*(range(ji + 1) for ji in j)):
            if g == j:
                continue
            sign = -1 if (sum(j) - sum(g)) % 2 else 1
            s -= (sign * a0 ** min(u, sum(g)) * kv[g] * _multi_binom(j, g)
                  * math.prod(ai ** (ji - gi) for ai, ji, gi in zip(a, j, g)))
        kj = s / a0 ** min(u, sum(j))
        if kj.denominator != 1:
            return None
        kv[j] = kj.numerator
    return kv


def dual_membership(y: Sequence, system: ShiftSystem, u: int = 1) -> bool:
    """Integral pairing with every generator of the unscaled lattice."""
    gens = dual_generators(system.a0, system.a, system.params.t, u)
    if len(y) != len(gens):
        raise DomainError("dimension mismatch")
    y = [to_fraction(x) for x in y]
    return all(sum((c * yi for c, yi in zip(g, y)), Fraction(0)).denominator == 1 for g in gens)


def dual_param_roundtrip(system: ShiftSystem, u: int = 1, samples: int = 100, seed: int = 0) -> bool:
    """Both directions of the closed-form description of the dual lattice.

    (a) every dual-basis row has integer parameters reproducing it exactly;
    (b) random integer parameters always give dual lattice members.
    """
    a0, a, t = system.a0, system.a, system.params.t
    gens = Basis(dual_generators(a0, a, t, u))
    for y in dual_basis(gens).rows:
        kv = _params_from_dual(y, a0, a, t, u)
        if kv is None or dual_from_params(kv, a0, a, t, u) != list(y):
            return False
    rng = Stream(seed)
    order = system.order
    for _ in range(samples):
        kv = {g: rng.randint(-10**6, 10**6) for g in order}
        if not dual_membership(dual_from_params(kv, a0, a, t, u), system, u):
            return False
    return True


def planted_dual_vector(instance: AgcdInstance, t: int, u: int = 1) -> list[Fraction]:
    """y_j = centered(prod (-r_i)^j_i mod p) / p, a short vector of the dual."""
    if instance.planted is None:
        raise DomainError("instance has no planted data")
    if u < 1:
        raise DomainError("the planted vector lies in the dual only for u >= 1")
    p, r = instance.planted.p, instance.planted.r
    order = MonomialOrder(instance.m, t)
    return [
        Fraction(centered_rep(math.prod((-ri) ** ji for ri, ji in zip(r, j)), p), p)
        for j in order
    ]


def dual_box_weights(X: Sequence[int], t: int) -> list[Fraction]:
    """Half-widths 1/X^j of the box for the unscaled lattice; the polar gauge
    is then sum_j |y_j| / X^j."""
    order = MonomialOrder(len(X), t)
    return [Fraction(1, math.prod(x**k for x, k in zip(X, j))) for j in order]


@dataclass
class MinimumWindow:
    lower: Fraction
    upper: Fraction | None
    shortest: tuple = field(default=())


def first_minimum_window(instance: AgcdInstance, params: CopperParams) -> MinimumWindow:
    """Exact first dual minimum (u = 1) and the planted vector's gauge."""
    if params.dim > EXACT_MINIMA_MAX_DIM:
        raise BudgetExceededError(f"dimension {params.dim} exceeds {EXACT_MINIMA_MAX_DIM}")
    gens = Basis(dual_generators(instance.a0, instance.a, params.t, 1))
    gauge = WeightedCross(dual_box_weights(instance.X, params.t))
    lower, vec = first_minimum(dual_basis(gens), gauge)
    upper = None
    if instance.planted is not None:
        upper = gauge.gauge(planted_dual_vector(instance, params.t, 1))
    return MinimumWindow(lower, upper, tuple(vec))
