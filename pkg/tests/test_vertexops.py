"""
Tests for the vertex operators and their relation suites
"""
from fractions import Fraction

import pytest

from core.currents import ZERO_OPERATOR, current_algebra
from core.errors import IndexRangeError, WindowTooLargeError
from core.fock import FockState, LatticePoint, bracket, compare_on_states, enumerate_basis
from core.reports import RelationReport, all_passed
from core.vertexops import (
    FZ_PAIRS, ExchangeWindow, MikiOperator, VERTEX_KINDS, build_vertex, charge_displacement, contraction_poles,
    energy, fractional_parts, graded_product_sign, half_norm, miki_and_rs, two_point, vacuum_two_point,
    verify_vertex_brackets, verify_fz, verify_nf_parity, verify_vertex_eta, vertex_family,
)


def failures(reports):
    return [(r.relation, r.parameters, r.failures[:2]) for r in reports if not r.passed]


# ======================================================
# 📐 STRUCTURE
# ======================================================

@pytest.mark.parametrize('kind', VERTEX_KINDS)
def test_component_parities_alternate(kind):
    assert [c.parity for c in build_vertex(kind, 2)] == [0, 1, 0, 1]


def test_seed_charges_rank_one():
    assert charge_displacement('phi', 1) == LatticePoint.of([0, -1], [1])
    assert charge_displacement('phi_star', 1) == LatticePoint.of([1, 0], [0])
    assert charge_displacement('psi', 1) == LatticePoint.of([-1, 0], [0])
    assert charge_displacement('psi_star', 1) == LatticePoint.of([0, 1], [-1])


def test_lowered_component_charge():
    # phi_1 = -[phi_2, f_1]_(q^-1) carries the charge of f_1 on top of phi_2
    assert charge_displacement('phi', 1, 1) == LatticePoint.of([-1, 0], [0])
    assert charge_displacement('psi_star', 1, 1) == LatticePoint.of([1, 0], [0])


def test_component_index_range():
    family = vertex_family('phi', 1)
    with pytest.raises(IndexRangeError):
        family.component(0)
    with pytest.raises(IndexRangeError):
        family.component(3)
    with pytest.raises(IndexRangeError):
        vertex_family('chi', 1)


def test_energy_grading():
    origin = LatticePoint.origin(1)
    assert energy(FockState.of(origin)) == 0
    assert half_norm((0, -1, 1)) == 0
    assert half_norm((1, 0, 0)) == Fraction(1, 2)
    assert vertex_family('phi', 1).seed().kappa == 0
    assert vertex_family('psi_star', 1).seed().kappa == -1
    assert vertex_family('phi_star', 1).seed().kappa == Fraction(-1, 2)


def test_seed_self_contraction_pole():
    seed = vertex_family('phi', 1).seed().spec
    assert contraction_poles(seed, seed) == {Fraction(2): 1}


def test_fractional_exponents_appear_at_rank_two():
    seed = vertex_family('phi', 1).seed().spec
    assert fractional_parts(seed, seed) == {}
    seed = vertex_family('phi', 2).seed().spec
    assert fractional_parts(seed, seed) == {Fraction(1): Fraction(1, 2)}


def test_vacuum_two_point_matches_fock_engine():
    seed = vertex_family('phi', 1).seed()
    origin = LatticePoint.origin(1)
    bra = FockState.of(origin.shifted(seed.charge).shifted(seed.charge))
    expected, _ = two_point(seed, seed, bra, FockState.of(origin), 3)
    closed, _ = vacuum_two_point(seed.spec, seed.spec, origin, 3)
    assert expected
    assert set(closed) == set(expected)
    assert all((closed[key] - expected[key]).is_zero() for key in expected)


def test_graded_product_sign():
    assert graded_product_sign(1, 1, 1, 1) == 1
    assert graded_product_sign(2, 1, 2, 1) == -1
    assert graded_product_sign(2, 1, 1, 1) == 1
    assert graded_product_sign(2, 2, 1, 2) == 1


# ======================================================
# ✅ OPERATOR-LEVEL RELATIONS
# ======================================================

def test_top_component_anticommutes_with_e():
    algebra = current_algebra(1)
    phi_top = vertex_family('phi', 1).component(2)
    basis = enumerate_basis([LatticePoint.origin(1)], 2)
    states = basis.up_to_degree(1)
    report = RelationReport('phi2-e1')
    for exponent in (-1, 0, 1):
        compare_on_states(bracket(phi_top.coefficient(exponent), algebra.e(1)), ZERO_OPERATOR, states, report)
    assert report.passed
    assert report.checked_dim > 0


def test_nf_parity_rank_one():
    reports = verify_nf_parity(1, 2)
    assert all_passed(reports), failures(reports)
    assert len(reports) == 8


def test_nf_parity_radius_widens_window():
    narrow = sum(r.checked_dim for r in verify_nf_parity(1, 1, radius=0))
    wide = sum(r.checked_dim for r in verify_nf_parity(1, 1, radius=1))
    assert 0 < narrow < wide


def test_vertex_eta_rank_one():
    reports = verify_vertex_eta(1, 2)
    assert all_passed(reports), failures(reports)


def test_vertex_brackets_rank_one():
    reports = verify_vertex_brackets(1, 2)
    assert reports
    assert all_passed(reports), failures(reports)
    assert all(r.checked_dim > 0 for r in reports)


@pytest.mark.slow
def test_vertex_brackets_rank_two():
    reports = verify_vertex_brackets(2, 2)
    assert all_passed(reports), failures(reports)


@pytest.mark.slow
def test_nf_parity_rank_two():
    reports = verify_nf_parity(2, 2)
    assert all_passed(reports), failures(reports)


# ======================================================
# 🔁 EXCHANGE RELATIONS
# ======================================================

def test_phi_exchange_top_components():
    report = verify_fz('phi_phi', 1, 3, ExchangeWindow(depth=3), indices=[(2, 2)])
    assert report.passed, report.failures
    assert report.checked_dim > 0


def test_psistar_phi_exchange_top_components():
    report = verify_fz('psistar_phi', 1, 3, ExchangeWindow(depth=3), indices=[(2, 2)])
    assert report.passed, report.failures
    assert report.checked_dim > 0


def test_flipped_exchange_sign_fails():
    report = verify_fz('phi_phi', 1, 3, ExchangeWindow(depth=3), indices=[(2, 2)], flip_sign=True)
    assert not report.passed


@pytest.mark.parametrize('pair', FZ_PAIRS)
def test_exchange_relations_rank_one(pair):
    report = verify_fz(pair, 1, 3, ExchangeWindow(depth=3))
    assert report.passed, report.failures[:3]
    assert report.checked_dim > 0
    assert report.details['indices'] == [[i, j] for i in (1, 2) for j in (1, 2)]
    assert report.details['printed_factor_matches']
    assert report.details['fractional_exponents'] == {}


@pytest.mark.slow
@pytest.mark.parametrize('pair', FZ_PAIRS)
def test_exchange_relations_rank_two(pair):
    window = ExchangeWindow(ket_degree=1, depth=2)
    report = verify_fz(pair, 2, 2, window, indices=[(3, 3), (3, 4), (4, 3), (4, 4)])
    assert report.passed, report.failures[:3]
    assert report.checked_dim >= 20
    assert report.details['fractional_exponents']


def test_exchange_window_guard():
    with pytest.raises(WindowTooLargeError):
        verify_fz('phi_phi', 1, 2, ExchangeWindow(depth=3))
    with pytest.raises(IndexRangeError):
        verify_fz('phi_psi', 1, 2)


# ======================================================
# 🎼 L-OPERATORS
# ======================================================

def test_l_operator_structure():
    L = MikiOperator(1, 2, 2, 1, 3)
    assert L.charge == (0, 0, 0)
    assert L.kappa == -1
    assert L.parity == 0
    mixed = MikiOperator(-1, 1, 2, 1, 3)
    assert mixed.parity == 1


def test_l_plus_is_normalized_at_its_pole():
    L = MikiOperator(1, 1, 1, 1, 3)
    pole, order = L.normalization
    assert pole == 1
    assert order == L.poles[Fraction(1)] >= 1
    assert len(L.denominator(skip=pole)) == len(L.denominator()) - order


def test_rll_relations_rank_one():
    report = miki_and_rs(1, 2)
    assert report.relation == 'rs'
    assert report.parameters == {'N': 1, 'depth': 2}
    assert report.passed, report.failures[:3]
    assert report.checked_dim >= 10
    assert any(entry.startswith('L+1') for entry in report.details['pole_normalized'])
