from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from feynwalk.gaussian import GaussianRational, I_HALF, ONE, ONE_MINUS_I, ZERO

ints = st.integers(-10 ** 6, 10 ** 6)
exps = st.integers(0, 12)
gauss = st.builds(GaussianRational, ints, ints, exps)


def as_pair(z):
    return Fraction(z.re, 2 ** z.k), Fraction(z.im, 2 ** z.k)


@given(gauss, gauss)
def test_add_mul_match_fraction_arithmetic(a, b):
    (ar, ai), (br, bi) = as_pair(a), as_pair(b)
    assert as_pair(a + b) == (ar + br, ai + bi)
    assert as_pair(a - b) == (ar - br, ai - bi)
    assert as_pair(a * b) == (ar * br - ai * bi, ar * bi + ai * br)


@given(gauss, st.integers(0, 6))
def test_equality_ignores_representation(a, s):
    b = a.rescaled(a.k + s)
    assert a == b and hash(a) == hash(b)
    assert a.reduced() == a


@given(gauss)
def test_conjugate_and_norm(a):
    re, im = as_pair(a)
    assert a.norm2() == re * re + im * im
    assert as_pair(a * a.conjugate()) == (a.norm2(), 0)


def test_constants():
    assert I_HALF + I_HALF + ONE_MINUS_I == ONE
    assert complex(I_HALF) == 0.5j
    assert not ZERO and ONE


def test_from_fractions_and_errors():
    z = GaussianRational.from_fractions(Fraction(-1, 2), -2)
    assert (z.re, z.im, z.k) == (-1, -4, 1)
    with pytest.raises(ValueError):
        GaussianRational.from_fractions(Fraction(1, 3), 0)
    with pytest.raises(ValueError):
        GaussianRational(1, 0, 1).rescaled(0)
    with pytest.raises(ValueError):
        GaussianRational(1, 0, -1)
