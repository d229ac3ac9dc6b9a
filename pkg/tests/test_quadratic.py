import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from beurling.quadratic import QuadraticIrrational as Q

small = st.fractions(min_value=-50, max_value=50, max_denominator=50)


def test_normalises_square_factors():
    q = Q(0, 1, 8)  # sqrt8 = 2 sqrt2
    assert (q.p, q.q, q.D) == (0, 2, 2)
    assert Q(1, 1, 9).is_rational and Q(1, 1, 9) == 4


def test_parse_forms():
    assert Q.parse("sqrt2") == Q(0, 1, 2)
    assert Q.parse("3*sqrt5") == Q(0, 3, 5)
    assert Q.parse("1/2+1/2*sqrt5") == Q(Fraction(1, 2), Fraction(1, 2), 5)
    assert Q.parse("1-sqrt2") == Q(1, -1, 2)
    assert Q.parse("-sqrt3") == Q(0, -1, 3)
    assert Q.parse("7/3") == Fraction(7, 3)


def test_conjugate_and_product_is_norm():
    a = Q(3, 2, 7)
    n = a * a.conjugate()
    assert n.is_rational and n.p == 9 - 4 * 7


@given(small, small, st.sampled_from([2, 3, 5, 6, 7]))
def test_sign_matches_high_precision_float(p, q, D):
    x = Q(p, q, D)
    # oracle: exact integer comparison of p^2 and q^2 D is encoded in sign(); compare with float where safe
    v = float(p) + float(q) * math.sqrt(D)
    if abs(v) > 1e-9:
        assert x.sign() == (1 if v > 0 else -1)


@given(small, small, small, small)
def test_ring_operations_are_exact(p1, q1, p2, q2):
    a, b = Q(p1, q1, 2), Q(p2, q2, 2)
    assert (a + b) - b == a
    assert (a * b).p == p1 * p2 + 2 * q1 * q2
    assert (a * b).q == p1 * q2 + q1 * p2
    assert (a < b) == ((b - a).sign() > 0)


def test_mixed_fields_rejected():
    with pytest.raises(ValueError):
        Q(0, 1, 2) + Q(0, 1, 3)


def test_exact_sign_where_float_fails():
    # 665857/470832 is a convergent of sqrt2 with error ~1.6e-12
    x = Q(Fraction(-665857, 470832), 1, 2)
    assert x.sign() == -1
    y = Q(Fraction(-1393, 985), 1, 2)
    assert y.sign() == 1
