"""
Tests for the contraction table and its cross-check against the Fock engine
"""
from fractions import Fraction

import pytest

from core import ope_oracle
from core.errors import IndexRangeError, UnknownPairError, WindowTooLargeError
from core.fock import cartan_data
from core.ope_oracle import (
    UNIT, FieldSymbol, contract_pair, crosscheck_table, crosscheck_two_point, parse_symbol, table_pairs,
)
from core.reports import all_passed

HALF = Fraction(1, 2)


def failures(reports):
    return [(r.parameters, r.failures[:2]) for r in reports if not r.passed]


# ======================================================
# 🔤 SYMBOLS
# ======================================================

def test_module_summary_is_one_line():
    assert len(ope_oracle.__doc__.strip().splitlines()) == 1


def test_parse_symbol():
    symbol = parse_symbol('-H*1;1/2@1')
    assert symbol == FieldSymbol('Hstar', 1, HALF, Fraction(1), -1)
    assert symbol.describe() == '-H*1;1/2@1'
    assert parse_symbol('B2N') == FieldSymbol('B2N')
    assert parse_symbol('c2@-1').arg_shift == -1


def test_parse_symbol_rejects_garbage():
    with pytest.raises(UnknownPairError):
        parse_symbol('Z3')
    with pytest.raises(IndexRangeError):
        parse_symbol('H')


# ======================================================
# 📋 TABLE
# ======================================================

@pytest.mark.parametrize('N', [1, 2])
def test_cartan_exponents(N):
    a = cartan_data(N).a
    for i in range(1, 2 * N):
        for j in range(1, 2 * N):
            prefactor = contract_pair(FieldSymbol('H', i), FieldSymbol('H', j), N)
            if a[i - 1][j - 1]:
                assert prefactor.binomials == ((0, a[i - 1][j - 1]),)
                assert prefactor.z_power == a[i - 1][j - 1]
            else:
                assert prefactor == UNIT


def test_dual_pairing_is_diagonal():
    assert contract_pair(FieldSymbol('H', 1), FieldSymbol('Hstar', 2), 2) == UNIT
    prefactor = contract_pair(FieldSymbol('H', 1, HALF), FieldSymbol('Hstar', 1, HALF), 2)
    assert prefactor.binomials == ((1, 1),)


def test_signs_flip_the_exponent():
    prefactor = contract_pair(FieldSymbol('c', 1, arg_shift=Fraction(1)), FieldSymbol('c', 1, sign=-1), 1)
    assert prefactor.z_power == -1
    assert prefactor.q_power == -1
    assert prefactor.binomials == ((-1, -1),)


def test_uncovered_pairs():
    with pytest.raises(UnknownPairError):
        contract_pair(FieldSymbol('B1'), FieldSymbol('Hstar', 1), 1)
    with pytest.raises(UnknownPairError):
        contract_pair(FieldSymbol('H', 2), FieldSymbol('H', 1), 1)
    with pytest.raises(IndexRangeError):
        contract_pair(FieldSymbol('Hstar', 2), FieldSymbol('H', 1), 1)
    with pytest.raises(IndexRangeError):
        contract_pair(FieldSymbol('c', 2), FieldSymbol('c', 1), 1)


# ======================================================
# 🔍 CROSS-CHECK
# ======================================================

def test_table_matches_engine_rank_one():
    reports = crosscheck_table(1, 3)
    assert len(reports) == len(table_pairs(1))
    assert all_passed(reports), failures(reports)
    assert all(r.details['covered'] for r in reports)
    assert all(r.checked_dim > 0 for r in reports)


@pytest.mark.parametrize('A, B', [
    (FieldSymbol('H', 1, HALF), FieldSymbol('H', 2, -HALF, Fraction(1))),
    (FieldSymbol('H', 2, HALF), FieldSymbol('Hstar', 2, HALF)),
    (FieldSymbol('c', 1, arg_shift=Fraction(1)), FieldSymbol('c', 1, sign=-1)),
    (FieldSymbol('c', 1), FieldSymbol('c', 2)),
])
def test_rank_two_pairs(A, B):
    report = crosscheck_two_point(A, B, 2, 2)
    assert report.passed, report.failures


def test_uncovered_pair_is_reported():
    report = crosscheck_two_point(FieldSymbol('B1'), FieldSymbol('Hstar', 1), 1, 2)
    assert report.details['covered'] is False
    assert report.checked_dim == 0


def test_order_guard():
    with pytest.raises(WindowTooLargeError):
        crosscheck_two_point(FieldSymbol('H', 1), FieldSymbol('H', 1), 1, 3, D=2)
