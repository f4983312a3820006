import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bohrgcd import bohr_oracles as orc
from bohrgcd.bohr import (
    AgcdBohrSpec,
    GeneralBohrSpec,
    MonomialBohrSpec,
    agcd_exponents,
    agcd_poly,
    check_main_reduction,
    count_J,
    count_nontrivial,
    count_U_agcd,
    count_U_general,
    count_V,
    count_V_agcd,
    estimate_U_general,
    is_trivial,
    minimal_reduction_constant,
    pole_slack,
    reduction_coeffs,
    reduction_identity,
    relation_vector,
    shape_ratio,
    theorem_box_family,
)
from bohrgcd.core import DomainError, Stream
from bohrgcd.lattice import BudgetExceededError

FIX = MonomialBohrSpec(5, (1, 1, 1), (1, 2, 3), (1, 1, 1))


def test_is_trivial_examples():
    assert is_trivial(FIX, 2)
    assert not is_trivial(FIX, 4)
    assert not is_trivial(FIX, 0)
    wide = MonomialBohrSpec(7, (1, 2, 3), (1, 2, 3), (3, 3, 3))
    assert not any(is_trivial(wide, u) for u in range(7))


def test_count_U_examples():
    assert count_U_general(FIX) == 2
    assert [u for u in range(5) if is_trivial(FIX, u)] == [2, 3]
    assert count_U_general(MonomialBohrSpec(11, (1, 3, 5), (1, 2, 3), (5, 5, 5))) == 0
    scaled = MonomialBohrSpec(5, (3, 3, 3), (1, 2, 3), (1, 1, 1))
    assert count_U_general(scaled) == 2


def test_count_V_single_polynomial():
    q, h = 7, 2
    spec = GeneralBohrSpec(q, ((0, 1, 1),), (h,))  # f = u + u^2, pole at u = q - 1
    poles = sum(1 for u in range(1, q) if (u + u * u) % q == 0)
    assert count_V(spec) == (q - 1 - poles) * 2 * h
    assert count_V(spec) == orc.scan_V(q, spec.f, spec.h)


def test_count_V_fixture_matches_scan():
    g = FIX.general()
    assert count_V(FIX) == orc.scan_V(5, g.f, g.h) == 4


def test_count_J_examples():
    assert count_J(5, 1, (1, -2, 1), (1, 1, 1)) == 4
    for q in (5, 7, 11):
        h = ((q - 1) // 2,) * 3
        assert count_J(q, 1, (1, -2, 1), h) == orc.scan_J(q, 1, (1, -2, 1), h)
    # the special case is y1 y3 = y2^2
    q, h = 13, (3, 4, 5)
    direct = sum(
        1 for y1, y2, y3 in itertools.product(*[[y for y in range(-hi, hi + 1) if y] for hi in h])
        if (y1 * y3 - y2 * y2) % q == 0
    )
    assert count_J(q, 1, (1, -2, 1), h) == direct


@pytest.mark.parametrize("k,want", [((1, 2, 3), (1, -2, 1)), ((2, 5, 8), (1, -2, 1)), ((1, 2, 4), (2, -3, 1))])
def test_relation_vector_examples(k, want):
    assert relation_vector(k) == want


def test_relation_vector_is_shortest():
    for k in itertools.permutations(range(1, 7), 3):
        r = relation_vector(k)
        assert sum(r) == 0 and sum(a * b for a, b in zip(r, k)) == 0
        n2 = sum(x * x for x in r)
        for c in itertools.product(range(-5, 6), repeat=3):
            if any(c) and sum(c) == 0 and sum(a * b for a, b in zip(c, k)) == 0:
                assert sum(x * x for x in c) >= n2


def _single(q, X1, ell=1, r=1):
    return AgcdBohrSpec(q, 1, 1, (r,), ell, {(1,): Fraction(X1)})


def test_count_U_agcd_examples():
    assert count_U_agcd(_single(5, 1)) == 8
    full = theorem_box_family(7, 7, 1, 2, 2, (1, 1))
    assert count_U_agcd(full) == 6**3
    assert count_V_agcd(full) == 6**3


def test_count_U_agcd_zero_box_matches_scan():
    q = 7
    X = {e: Fraction(3) for e in agcd_exponents(1, 2)}
    X[(2,)] = Fraction(0)
    spec = AgcdBohrSpec(q, 1, 2, (2,), 3, X)
    assert count_U_agcd(spec) == orc.scan_U_agcd(q, 1, 2, (2,), 3, X)


def test_count_V_agcd_examples():
    assert count_V_agcd(_single(5, 1)) == count_U_agcd(_single(5, 1))
    X = {(1,): Fraction(1), (2,): Fraction(3)}
    spec = AgcdBohrSpec(7, 1, 2, (1,), 2, X)
    assert count_V_agcd(spec) == orc.scan_V_agcd(7, 1, 2, X)


def test_reduction_coeff_examples():
    assert reduction_coeffs((1,), (2,), 3) == {(1,): 1}
    r, ell = 2, 3
    assert reduction_coeffs((2,), (r,), ell) == {(2,): 1, (1,): -2 * r}
    for e0 in ((1, 1), (2, 1), (0, 2)):
        assert reduction_identity(e0, (1, 2), 3)


def test_check_main_reduction_examples():
    spec = theorem_box_family(13, 2, 3, 1, 2, (2,))
    c = minimal_reduction_constant(spec)
    assert c is not None and c <= 8
    assert check_main_reduction(spec, c)
    full = theorem_box_family(11, 11, 1, 1, 2, (1,))
    assert check_main_reduction(full, 1)
    assert check_main_reduction(_single(11, 2, ell=3, r=1), 1)


def test_spec_validation():
    with pytest.raises(DomainError):
        MonomialBohrSpec(6, (1,), (1,), (1,))
    with pytest.raises(DomainError):
        MonomialBohrSpec(5, (5, 1), (1, 2), (1, 1))
    with pytest.raises(DomainError):
        MonomialBohrSpec(5, (1, 1), (2, 2), (1, 1))
    with pytest.raises(DomainError):
        GeneralBohrSpec(5, ((1, 1), (2, 2)), (1, 1))
    with pytest.raises(DomainError):
        AgcdBohrSpec(7, 1, 1, (3,), 3, {(1,): 1})


def test_census_cap():
    big = MonomialBohrSpec(10007, (1, 1, 1), (1, 2, 3), (1, 1, 1))
    with pytest.raises(BudgetExceededError):
        count_U_general(big, cap=10**4)
    est, se = estimate_U_general(big, 50, Stream(0))
    assert 0 <= est <= 10007 and se >= 0


def test_shape_ratio_reports():
    spec = MonomialBohrSpec(101, (1, 1, 1), (1, 2, 3), (2, 3, 4))
    ratio = shape_ratio(spec)
    assert ratio == count_nontrivial(spec) / (2 * 3 * 4 / 101 + 27 / 101 + 3)


PRIMES = [5, 7, 11, 13, 17, 19, 23, 29, 31]


@st.composite
def monomial_specs(draw):
    q = draw(st.sampled_from(PRIMES))
    k = draw(st.lists(st.integers(1, 6), min_size=3, max_size=3, unique=True))
    a = draw(st.lists(st.integers(1, q - 1), min_size=3, max_size=3))
    h = draw(st.lists(st.integers(1, q // 2), min_size=3, max_size=3))
    return MonomialBohrSpec(q, tuple(a), tuple(k), tuple(h))


@given(monomial_specs())
def test_U_and_V_match_scans(spec):
    g = spec.general()
    assert count_U_general(spec) == orc.scan_U(spec.q, g.f, g.h)
    assert count_V(spec) == orc.scan_V(spec.q, g.f, g.h)


@given(monomial_specs())
def test_nontrivial_bounded_by_V_plus_poles(spec):
    assert count_nontrivial(spec) <= count_V(spec) + pole_slack(spec)
    assert pole_slack(spec) <= spec.general().degree * spec.n + 1


@given(monomial_specs(), st.permutations(range(3)))
def test_permutation_invariance(spec, perm):
    other = MonomialBohrSpec(spec.q, tuple(spec.a[i] for i in perm), tuple(spec.k[i] for i in perm),
                             tuple(spec.h[i] for i in perm))
    assert count_U_general(other) == count_U_general(spec)


@given(monomial_specs(), st.integers(1, 10**6))
def test_common_scaling_invariance(spec, c):
    if c % spec.q == 0:
        return
    scaled = MonomialBohrSpec(spec.q, tuple(a * c for a in spec.a), spec.k, spec.h)
    assert count_U_general(scaled) == count_U_general(spec)


@given(monomial_specs())
def test_zero_never_trivial(spec):
    assert not is_trivial(spec, 0)


@given(st.sampled_from(PRIMES), st.integers(-3, 3), st.integers(1, 3), st.data())
def test_count_J_matches_scan(q, r1, h1, data):
    r = (r1, data.draw(st.integers(-3, 3)), data.draw(st.integers(-3, 3)))
    h = (h1, data.draw(st.integers(1, 4)), data.draw(st.integers(1, 4)))
    lam = Fraction(data.draw(st.integers(1, 50)), data.draw(st.integers(1, q - 1)))
    assert count_J(q, lam, r, h) == orc.scan_J(q, lam, r, h)


@st.composite
def agcd_specs(draw, max_q=13):
    q = draw(st.sampled_from([p for p in PRIMES if p <= max_q]))
    m = draw(st.integers(1, 2))
    t = draw(st.integers(1, 2 if m == 1 else 1))
    ell = draw(st.integers(2, 5))
    r = tuple(draw(st.integers(1, ell - 1)) for _ in range(m))
    X = {e: Fraction(draw(st.integers(0, 3 * q)), draw(st.integers(1, 3))) for e in agcd_exponents(m, t)}
    return AgcdBohrSpec(q, m, t, r, ell, X)


@given(agcd_specs())
def test_agcd_counts_match_scans(spec):
    assert count_U_agcd(spec) == orc.scan_U_agcd(spec.q, spec.m, spec.t, spec.r, spec.ell, spec.X)
    assert count_V_agcd(spec) == orc.scan_V_agcd(spec.q, spec.m, spec.t, spec.X)


@given(st.integers(1, 2).flatmap(lambda m: st.tuples(
    st.lists(st.integers(0, 4), min_size=m, max_size=m),
    st.lists(st.integers(1, 5), min_size=m, max_size=m),
    st.integers(1, 6))))
def test_reduction_identity_property(args):
    e0, r, ell = args
    if not 1 <= sum(e0) <= 4:
        return
    assert reduction_identity(tuple(e0), tuple(r), ell)


def test_agcd_poly_is_integral():
    for e in agcd_exponents(2, 3):
        p = agcd_poly(e, (2, 3), 5)
        assert p.eval_int([0, 0]) == 0
