"""
Tests for exact coefficient arithmetic
"""
import os
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import qscalars
from core.coeffs import (
    ONE, ZERO, PhasedScalar, SparseSeries, ExpVector, canonical, from_canonical,
    q, qnum, qscalar, qscalar_arith, series_mul, series_exp, partition_series,
    GROUND_TYPES, binomial_series, colored_partition_count, specialize_q_one, render,
)
from core.errors import DivisionByZeroError, VariableMismatchError, ResidualPhaseError


# ======================================================
# 🔢 q-NUMBERS
# ======================================================

def test_qnum_small_values():
    assert qnum(0) == ZERO
    assert qnum(1) == ONE
    assert qscalar_arith(qnum(2), q + q ** -1, 'eq')


def test_qnum_three_expands():
    assert not (qnum(3) - (q ** 2 + 1 + q ** -2))


@pytest.mark.parametrize("n", range(-20, 21))
def test_qnum_odd_and_recurrence(n):
    assert not (qnum(-n) + qnum(n))
    assert not (qnum(n + 1) - ((q + q ** -1) * qnum(n) - qnum(n - 1)))


def test_qnum_is_quotient():
    for n in range(1, 6):
        assert not (qnum(n) - (q ** n - q ** -n) / (q - q ** -1))


# ======================================================
# ➕ FIELD AXIOMS
# ======================================================

def test_difference_of_squares():
    assert qscalar_arith((q - q ** -1) * (q + q ** -1), q ** 2 - q ** -2, 'eq')
    assert qscalar_arith(qnum(2), qnum(2), 'div') == ONE


def test_division_by_zero_raises():
    with pytest.raises(DivisionByZeroError):
        qscalar_arith(ONE, ZERO, 'div')


@settings(max_examples=40, deadline=None)
@given(qscalars(), qscalars(), qscalars())
def test_field_axioms(a, b, c):
    assert not ((a * b) * c - a * (b * c))
    assert not (a * (b + c) - (a * b + a * c))
    if a:
        assert not (a * (ONE / a) - ONE)


@settings(max_examples=40, deadline=None)
@given(qscalars())
def test_canonical_idempotent(x):
    pair = canonical(x)
    again = canonical(from_canonical(pair))
    assert again == pair
    assert not (from_canonical(pair) - x)


def test_canonical_zero_and_denominator_normalized():
    assert canonical(ZERO) == ((), ((0, Fraction(1)),))
    num, den = canonical(qscalar(2) / (3 * q + 6))
    assert den[0] == (0, Fraction(1))


def test_render_is_stable():
    assert render(qnum(2)) == render(q + q ** -1)


def test_specialize_q_one():
    assert specialize_q_one(qnum(3)) == Fraction(3)


@pytest.mark.skipif('SYMPY_GROUND_TYPES' in os.environ, reason="ground types forced by the environment")
def test_rationals_run_on_gmpy():
    pytest.importorskip('gmpy2')
    assert GROUND_TYPES == 'gmpy'


# ======================================================
# 🌀 PHASED SCALARS
# ======================================================

def test_phase_of_one_is_minus_sign():
    assert PhasedScalar.monomial(1, phase=Fraction(1)) == PhasedScalar.monomial(-1)


def test_fractional_powers_combine():
    quarter = PhasedScalar.monomial(1, q_exponent=Fraction(1, 4))
    assert quarter * quarter == PhasedScalar.monomial(1, q_exponent=Fraction(1, 2))
    assert (quarter * quarter * quarter * quarter).as_qscalar() == q


def test_phases_cancel():
    third = PhasedScalar.monomial(1, phase=Fraction(1, 3))
    assert (third * PhasedScalar.monomial(1, phase=Fraction(-1, 3))).as_qscalar() == ONE
    with pytest.raises(ResidualPhaseError):
        third.as_qscalar()


@pytest.mark.parametrize('q_exponent,phase', [(0, 0), (Fraction(3, 4), 0), (Fraction(-1, 4), Fraction(1, 2)),
                                              (Fraction(5, 2), Fraction(2, 3))])
def test_single_key_inverse(q_exponent, phase):
    x = PhasedScalar.monomial(qnum(3), q_exponent=q_exponent, phase=phase)
    assert (x * x.inverse()).as_qscalar() == ONE


def test_inverse_needs_one_key():
    mixed = PhasedScalar.monomial(1) + PhasedScalar.monomial(1, q_exponent=Fraction(1, 4))
    with pytest.raises(ResidualPhaseError):
        mixed.inverse()
    with pytest.raises(DivisionByZeroError):
        PhasedScalar.zero().inverse()


# ======================================================
# 📏 SERIES
# ======================================================

def test_series_product_truncates():
    a = SparseSeries('z', {0: 1, 1: 1}, 0, 2)
    b = SparseSeries('z', {0: 1, 1: -1}, 0, 2)
    assert series_mul(a, b) == SparseSeries('z', {0: 1, 2: -1}, 0, 2)


def test_rational_exponents_add():
    half = SparseSeries('z', {Fraction(1, 2): 1}, 0, 2)
    assert series_mul(half, half).coefficient(1) == ONE


def test_geometric_series_inverse():
    geometric = SparseSeries('q', {n: 1 for n in range(5)}, 0, 4)
    one_minus = SparseSeries('q', {0: 1, 1: -1}, 0, 4)
    assert series_mul(geometric, one_minus) == SparseSeries('q', {0: 1}, 0, 4)


def test_variable_mismatch():
    with pytest.raises(VariableMismatchError):
        series_mul(SparseSeries('z', {0: 1}, 0, 1), SparseSeries('w', {0: 1}, 0, 1))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=1, max_size=6),
       st.lists(st.integers(-3, 3), min_size=1, max_size=6),
       st.integers(0, 4))
def test_truncation_commutes_with_product(xs, ys, cut):
    a = SparseSeries('q', dict(enumerate(xs)), 0, 5)
    b = SparseSeries('q', dict(enumerate(ys)), 0, 5)
    assert series_mul(a.truncate(cut), b.truncate(cut)) == series_mul(a, b).truncate(cut)


def test_partition_series_coefficients():
    series = partition_series(6, 4)
    assert [series.coefficient(n) for n in range(5)] == [qscalar(c) for c in (1, 6, 27, 98, 315)]
    assert colored_partition_count(2, 6) == 27


def test_series_exp_matches_geometric():
    # exp(-log(1 - t)) = 1/(1 - t)
    log_term = SparseSeries('t', {n: Fraction(1, n) for n in range(1, 5)}, 0, 4)
    assert series_exp(log_term) == SparseSeries('t', {n: 1 for n in range(5)}, 0, 4)


def test_binomial_series_negative_exponent():
    series = binomial_series(1, -1, 3)
    assert series == SparseSeries('t', {n: 1 for n in range(4)}, 0, 3)


def test_exp_vector_drops_zeros():
    v = ExpVector({'z': Fraction(1, 2), 'w': 0})
    assert v.items() == (('z', Fraction(1, 2)),)
    assert (v - v) == ExpVector()
