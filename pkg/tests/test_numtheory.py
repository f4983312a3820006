import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bohrgcd.core import DomainError
from bohrgcd.numtheory import (
    CharacterTable,
    fourth_moment_exact,
    fourth_moment_float,
    moment_ratio,
    omega,
    omega_sieve,
    phi,
    phi_sieve,
    sum_omega_ap,
    sum_tau_power,
    sum_z_over_phi,
    tau,
    tau_power_sieve,
)
from bohrgcd.suites import primes_in


@pytest.mark.parametrize("n,w,t,f", [(12, 2, 6, 4), (1, 0, 1, 1), (10403, 2, 4, 10200)])
def test_arithmetic_function_examples(n, w, t, f):
    assert (omega(n), tau(n), phi(n)) == (w, t, f)


def test_sum_z_over_phi_examples():
    assert sum_z_over_phi(1) == 1
    assert sum_z_over_phi(3) == Fraction(9, 2)
    direct = sum(Fraction(z, phi(z)) for z in range(1, 501))
    assert sum_z_over_phi(500) == direct


def test_sum_z_over_phi_average_nondecreasing_trend():
    # the average approaches its limit from below with small oscillation
    vals = [float(sum_z_over_phi(Z) / Z) for Z in (100, 1000, 10**4, 10**5)]
    assert vals == sorted(vals)


def test_sum_tau_power_examples():
    assert sum_tau_power(1, 3) == 1
    assert sum_tau_power(6, 1) == 14
    assert sum_tau_power(3, 2) == 7
    assert sum_tau_power(300, 1) == sum(tau(z) for z in range(1, 301))
    assert sum_tau_power(300, 3) == sum(tau(z**3) for z in range(1, 301))


def test_sum_omega_ap_examples():
    with pytest.raises(DomainError):
        sum_omega_ap(2, 2, 0)
    assert sum_omega_ap(10, 1, 0) == 11
    assert sum_omega_ap(9, 4, 1) == 2


def test_fourth_moment_examples():
    assert fourth_moment_exact(5, 2) == 8
    assert fourth_moment_float(5, 2) == pytest.approx(8.0, abs=1e-9)
    assert fourth_moment_float(7, 3) == pytest.approx(fourth_moment_exact(7, 3), rel=1e-9)
    for q in (3, 5, 7, 101, 211):
        assert fourth_moment_exact(q, 1) == q - 2
        assert fourth_moment_float(q, 1) == pytest.approx(q - 2, abs=1e-6)
    ex = fourth_moment_exact(101, 10)
    assert abs(fourth_moment_float(101, 10) - ex) <= 1e-6 * ex


def test_moment_ratio_examples():
    for q in primes_in(101, 400)[:50]:
        assert moment_ratio(q, math.isqrt(q)) <= 10
    q = 101
    assert moment_ratio(q, 1) == pytest.approx((q - 2) / (q * math.log(q) ** 2))
    assert moment_ratio(q, 1) < 1


def test_moment_brute_force_character_sums():
    q, H = 13, 4
    tab = CharacterTable(q)
    total = 0.0
    for j in range(1, q - 1):
        s = sum(tab.chi(j, y) for y in range(1, H + 1))
        total += abs(s) ** 4
    assert total == pytest.approx(fourth_moment_exact(q, H), rel=1e-9)


def test_sieves_match_direct():
    Z = 500
    ph, om, tp = phi_sieve(Z), omega_sieve(Z), tau_power_sieve(Z, 2)
    for z in range(1, Z + 1):
        assert (ph[z], om[z], tp[z]) == (phi(z), omega(z), tau(z * z))


coprime_pairs = st.tuples(st.integers(1, 10**6), st.integers(1, 10**6)).filter(lambda ab: math.gcd(*ab) == 1)


@given(coprime_pairs)
def test_multiplicativity(ab):
    a, b = ab
    assert tau(a * b) == tau(a) * tau(b)
    assert phi(a * b) == phi(a) * phi(b)
    assert omega(a * b) == omega(a) + omega(b)


@given(st.sampled_from(primes_in(3, 200)), st.data())
def test_fourth_moment_structure(q, data):
    H = data.draw(st.integers(1, q - 1))
    m = fourth_moment_exact(q, H)
    assert m >= 0
    assert (m + H**4) % (q - 1) == 0


@given(st.sampled_from(primes_in(3, 300)), st.data())
def test_character_multiplicativity(q, data):
    tab = CharacterTable(q)
    j = data.draw(st.integers(0, q - 2))
    a = data.draw(st.integers(1, q - 1))
    b = data.draw(st.integers(1, q - 1))
    assert tab.chi(j, a * b) == pytest.approx(tab.chi(j, a) * tab.chi(j, b), abs=1e-9)
    assert pow(tab.g, tab.dlog(a), q) == a
