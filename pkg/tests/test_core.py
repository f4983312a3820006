import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bohrgcd.core import (
    DomainError,
    NotInvertibleError,
    Stream,
    centered_rep,
    dist_to_nearest_int,
    factorize,
    gen_prime,
    is_prime,
    mod_inverse,
    primitive_root,
)


@pytest.mark.parametrize("a,q,want", [(7, 5, 2), (3, 5, -2), (5052, 101, 2)])
def test_centered_rep_examples(a, q, want):
    assert centered_rep(a, q) == want


def test_centered_rep_rejects_bad_modulus():
    with pytest.raises(DomainError):
        centered_rep(3, 0)


@pytest.mark.parametrize("x,want", [(Fraction(1, 3), Fraction(1, 3)), (Fraction(7, 4), Fraction(1, 4)),
                                    (Fraction(-2, 101), Fraction(2, 101))])
def test_dist_to_nearest_int_examples(x, want):
    assert dist_to_nearest_int(x) == want


@pytest.mark.parametrize("a,q,want", [(2, 5, 3), (1, 97, 1), (12, 101, 59)])
def test_mod_inverse_examples(a, q, want):
    assert mod_inverse(a, q) == want


def test_mod_inverse_not_invertible():
    with pytest.raises(NotInvertibleError):
        mod_inverse(6, 9)


@pytest.mark.parametrize("q,g", [(5, 2), (7, 3), (101, 2)])
def test_primitive_root_examples(q, g):
    assert primitive_root(q) == g


def test_primitive_root_needs_prime():
    with pytest.raises(DomainError):
        primitive_root(15)


def test_gen_prime_small_and_ranges():
    assert gen_prime(2, Stream(1)) in (2, 3)
    for seed in range(5):
        p = gen_prime(8, Stream(seed))
        assert 128 <= p <= 255 and is_prime(p)


def test_gen_prime_reproducible():
    a = gen_prime(80, Stream(7))
    assert a == gen_prime(80, Stream(7))
    assert a.bit_length() == 80 and is_prime(a)


def test_stream_paths_are_independent_of_creation_order():
    first = Stream(3, 5).randbits(64)
    Stream(3, 4).randbits(64)
    assert Stream(3, 5).randbits(64) == first
    assert Stream(3, 5).randbits(64) != Stream(3, 6).randbits(64)


def test_is_prime_against_trial_division():
    small = [n for n in range(2, 2000) if all(n % d for d in range(2, int(n**0.5) + 1))]
    assert [n for n in range(2000) if is_prime(n)] == small
    # Carmichael numbers and a strong pseudoprime to base 2
    for n in (561, 1105, 2047, 3215031751):
        assert not is_prime(n)


def test_factorize_roundtrip():
    n = 10403 * 2**5 * 999983
    f = factorize(n)
    assert f == {2: 5, 101: 1, 103: 1, 999983: 1}


@given(st.integers(-10**30, 10**30), st.integers(1, 10**12))
def test_centered_rep_property(a, q):
    r = centered_rep(a, q)
    assert (r - a) % q == 0
    assert -q < 2 * r <= q


@given(st.integers(-10**6, 10**6), st.integers(1, 10**6), st.integers(-50, 50))
def test_dist_to_nearest_int_properties(a, q, n):
    x = Fraction(a, q)
    d = dist_to_nearest_int(x)
    assert 0 <= d <= Fraction(1, 2)
    assert dist_to_nearest_int(x + n) == d
    assert d == Fraction(abs(centered_rep(a, q)), q)


@given(st.integers(2, 10**9), st.integers(1, 10**9))
def test_mod_inverse_involution(q, a):
    if math.gcd(a, q) != 1:
        return
    inv = mod_inverse(a, q)
    assert 1 <= inv <= q - 1 or q == 2
    assert inv * a % q == 1 % q
    assert mod_inverse(inv, q) == a % q


@pytest.mark.parametrize("q", [3, 5, 7, 11, 101, 211, 65537])
def test_primitive_root_order(q):
    g = primitive_root(q)
    for ell in factorize(q - 1):
        assert pow(g, (q - 1) // ell, q) != 1
    # smallest such generator
    for c in range(2, g):
        assert any(pow(c, (q - 1) // ell, q) == 1 for ell in factorize(q - 1))
