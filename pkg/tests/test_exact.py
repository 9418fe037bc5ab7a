import logging
import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from src.schemas.base import LogValue, PosExact, parse_rational
from src.utils.errors import ExactDomainError
from src.utils.exact import (
    approx_le,
    exp_of,
    factor_positive,
    log_of,
    lv_add,
    lv_log_of_rational,
    lv_neg,
    pe_eq,
    pe_inv,
    pe_mul_pow,
    pos_exact,
    pos_exact_from_json,
    pos_exact_to_json,
    to_float,
)

positive_rationals = st.builds(Fraction, st.integers(1, 10**6), st.integers(1, 10**6))
exponents = st.builds(Fraction, st.integers(-12, 12), st.integers(1, 12))


def test_factor_positive_examples():
    assert factor_positive(Fraction(12, 5)).as_dict() == {2: 2, 3: 1, 5: -1}
    assert factor_positive(Fraction(36, 60)).as_dict() == {3: 1, 5: -1}
    assert factor_positive(1).is_empty()


@pytest.mark.parametrize("value", [0, -3, Fraction(-1, 2)])
def test_factor_non_positive_raises(value):
    with pytest.raises(ExactDomainError):
        factor_positive(value)


def test_parse_rational_formats():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational([3, 4]) == Fraction(3, 4)
    assert parse_rational(2) == Fraction(2)
    with pytest.raises(ValueError):
        parse_rational(0.5)
    with pytest.raises(ValueError):
        parse_rational(True)


def test_prime_map_is_canonical():
    a = pos_exact({3: Fraction(1, 4), 2: Fraction(1, 6), 7: 0})
    b = PosExact.model_validate([[2, 1, 6], [3, 1, 4]])
    assert a.entries == ((2, Fraction(1, 6)), (3, Fraction(1, 4)))
    assert pe_eq(a, b)
    assert hash(a) == hash(b)


def test_non_prime_key_rejected():
    with pytest.raises(ValidationError):
        pos_exact({4: 1})


def test_mirror_weight_matches_high_precision_oracle():
    weight = pos_exact({2: Fraction(1, 6), 3: Fraction(1, 4), 5: Fraction(-5, 12)})
    oracle = (sympy.Integer(2) ** sympy.Rational(1, 6) * sympy.Integer(3) ** sympy.Rational(1, 4)
              * sympy.Integer(5) ** sympy.Rational(-5, 12)).evalf(40)
    assert to_float(weight) == pytest.approx(float(oracle), rel=1e-15)


def test_log_value_float_matches_oracle():
    value = lv_add(lv_log_of_rational(Fraction(5, 2), Fraction(1, 6)),
                   lv_log_of_rational(Fraction(5, 3), Fraction(1, 4)))
    expected = math.log(5 / 2) / 6 + math.log(5 / 3) / 4
    assert isinstance(value, LogValue)
    assert to_float(value) == pytest.approx(expected, rel=1e-14)


def test_to_float_saturates_on_overflow(caplog):
    with caplog.at_level(logging.WARNING):
        assert to_float(pos_exact({2: 5000})) == math.inf
    assert "overflows" in caplog.text


def test_json_triples():
    weight = pos_exact({5: Fraction(-5, 12), 2: Fraction(1, 6)})
    text = pos_exact_to_json(weight)
    assert text == "[[2, 1, 6], [5, -5, 12]]"
    assert pe_eq(pos_exact_from_json(text), weight)


def test_approx_le_margin():
    two, three = factor_positive(2), factor_positive(3)
    assert approx_le(two, three)
    assert not approx_le(three, two)
    assert approx_le(two, two)


@given(positive_rationals, positive_rationals)
def test_factorization_is_multiplicative(x, y):
    product = pe_mul_pow([(factor_positive(x), 1), (factor_positive(y), 1)])
    assert pe_eq(product, factor_positive(x * y))


@given(positive_rationals)
def test_inverse_cancels(x):
    assert pe_mul_pow([(factor_positive(x), 1), (pe_inv(factor_positive(x)), 1)]).is_empty()


@given(positive_rationals, exponents)
def test_log_exp_round_trip(x, r):
    value = pe_mul_pow([(factor_positive(x), r)])
    assert pe_eq(exp_of(log_of(value)), value)
    assert lv_add(log_of(value), lv_neg(log_of(value))).is_empty()


@settings(max_examples=50)
@given(positive_rationals, exponents)
def test_float_view_matches_power(x, r):
    value = pe_mul_pow([(factor_positive(x), r)])
    assert to_float(value) == pytest.approx(float(x) ** float(r), rel=1e-12)


@given(positive_rationals, positive_rationals)
def test_equality_is_exact(x, y):
    assert pe_eq(factor_positive(x), factor_positive(y)) == (x == y)


small_exponents = st.builds(Fraction, st.integers(-3, 3), st.integers(1, 6))
products = st.lists(st.tuples(positive_rationals, small_exponents), min_size=1, max_size=3)
nonzero_shift = st.builds(Fraction, st.integers(1, 3), st.integers(1, 6)).flatmap(
    lambda r: st.sampled_from([r, -r]))


def _close(a: PosExact, b: PosExact) -> bool:
    fa, fb = to_float(a), to_float(b)
    return abs(fa - fb) <= 1e-10 * max(fa, fb)


@settings(max_examples=10_000, deadline=None)
@given(products, st.sampled_from([2, 3, 5, 7]), nonzero_shift)
def test_equality_is_an_equivalence_matching_floats(terms, prime, shift):
    a = pe_mul_pow([(factor_positive(x), r) for x, r in terms])
    b = pe_mul_pow([(factor_positive(x), r) for x, r in reversed(terms)])
    c = exp_of(log_of(b))
    moved = pe_mul_pow([(a, 1), (pos_exact({prime: shift}), 1)])

    assert pe_eq(a, a)
    assert pe_eq(a, b) and pe_eq(b, a)
    assert pe_eq(b, c) and pe_eq(a, c)
    assert pe_eq(a, b) == _close(a, b)
    assert not pe_eq(a, moved) and not pe_eq(moved, a)
    assert pe_eq(a, moved) == _close(a, moved)
