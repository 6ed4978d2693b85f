"""
Tests for the Drinfeld currents and the Chevalley generators
"""
import pytest

from core.coeffs import ONE
from core.currents import (
    CurrentAlgebra, GeneratorId, current_mode, extended_cartan, standard_window,
    verify_chevalley, verify_drinfeld, verify_eta_compatibility,
)
from core.errors import IndexRangeError
from core.fock import (
    LatticePoint, LinComb, a_color, bracket, compare_on_states, enumerate_basis,
    identity_operator,
)
from core.reports import RelationReport, all_passed


def failures(reports):
    return [(r.relation, r.parameters, r.failures[:2]) for r in reports if not r.passed]


# ======================================================
# 📐 STRUCTURE
# ======================================================

def test_extended_cartan_rank_one():
    assert extended_cartan(1) == [[0, 0, -2], [0, 0, 2], [-2, 2, 0]]


def test_extended_cartan_matches_finite_part():
    algebra = CurrentAlgebra(2)
    extended = extended_cartan(2)
    for i in range(1, 5):
        for j in range(1, 5):
            assert extended[i][j] == algebra.combo.cartan.a[i - 1][j - 1]


def test_cocycles_rank_two():
    algebra = CurrentAlgebra(2)
    assert not any(algebra.cocycle(1, 1))
    assert algebra.cocycle(1, 2)[a_color(1)] == -1
    assert algebra.cocycle(-1, 2)[a_color(1)] == 1
    assert algebra.cocycle(1, 3)[a_color(1)] == 1
    assert algebra.cocycle(1, 3)[a_color(3)] == 0


def test_dropped_cocycle_is_trivial():
    algebra = CurrentAlgebra(2, drop_cocycle=(1, 3))
    assert not any(algebra.cocycle(1, 3))
    assert algebra.cocycle(-1, 3)[a_color(1)] == -1


def test_current_charges():
    algebra = CurrentAlgebra(1)
    assert algebra.x_field(1, 1).charge == (1, -1, 1)
    assert algebra.x_field(-1, 1).charge == (-1, 1, -1)


def test_difference_form_has_two_terms():
    algebra = CurrentAlgebra(2)
    assert len(algebra.x_field(-1, 1).terms) == 2
    assert len(algebra.x_field(1, 2).terms) == 2
    assert len(algebra.x_field(1, 3).terms) == 1
    assert len(algebra.x_field(-1, 2).terms) == 1


def test_index_range():
    algebra = CurrentAlgebra(1)
    with pytest.raises(IndexRangeError):
        algebra.X(1, 2, 0)
    with pytest.raises(IndexRangeError):
        algebra.H(3, 1)
    with pytest.raises(IndexRangeError):
        algebra.operator(GeneratorId('H', 1, 0))


def test_standard_window_radius():
    algebra = CurrentAlgebra(1)
    assert standard_window(algebra, 0) == [LatticePoint.origin(1)]
    assert len(standard_window(algebra, 1)) == 3


def test_zero_mode_generators_materialize():
    basis = enumerate_basis([LatticePoint.of([1, 0], [0])], 1)
    matrix = current_mode(GeneratorId('Chevalley_h', 1), basis)
    assert matrix.nonzero_count() == len(basis)


# ======================================================
# ✅ RELATIONS AT RANK ONE
# ======================================================

def test_drinfeld_relations_rank_one():
    reports = verify_drinfeld(1, 2, M=1)
    assert reports
    assert all_passed(reports), failures(reports)
    assert {r.relation for r in reports} >= {'HH', 'HX', 'X+X-', 'XX-null', 'psi-zero'}


def test_chevalley_relations_rank_one():
    reports = verify_chevalley(1, 2)
    assert all_passed(reports), failures(reports)


def test_wider_radius_checks_more_states():
    narrow = sum(r.checked_dim for r in verify_chevalley(1, 1, radius=0))
    wide = sum(r.checked_dim for r in verify_chevalley(1, 1, radius=1))
    assert 0 < narrow < wide


def test_capped_states_are_reported(monkeypatch):
    monkeypatch.setattr('core.currents.CHECKED_FOCK_STATES_LIMIT', 3)
    reports = verify_chevalley(1, 1)
    assert all_passed(reports), failures(reports)
    capped = [r.details['states_capped'] for r in reports if 'states_capped' in r.details]
    assert capped
    assert all(limit == 3 and total > 3 for limit, total in capped)
    assert all(r.checked_dim <= 3 for r in reports)


def test_affine_generators_close_on_h0():
    algebra = CurrentAlgebra(1)
    basis = enumerate_basis([LatticePoint.origin(1)], 2)
    expected = LinComb([(ONE, algebra.q_bracket_h(0))])
    report = compare_on_states(bracket(algebra.e(0), algebra.f(0)), expected, basis.states, RelationReport('e0f0'))
    assert report.passed, report.failures


def test_eta_compatibility_rank_one():
    reports = verify_eta_compatibility(1, 2)
    assert all_passed(reports), failures(reports)


def test_eta_xi_anticommute_on_origin():
    algebra = CurrentAlgebra(1)
    basis = enumerate_basis([LatticePoint.origin(1)], 2)
    report = compare_on_states(bracket(algebra.eta(1), algebra.xi(1)), identity_operator(),
                               basis.states, RelationReport('eta-xi'))
    assert report.passed


# ======================================================
# 🧪 COCYCLE MUTATION
# ======================================================

def _first_third_anticommutator(algebra):
    basis = enumerate_basis([LatticePoint.origin(2)], 1)
    lhs = bracket(algebra.X(1, 1, -1), algebra.X(1, 3, -1))
    return compare_on_states(lhs, LinComb([]), basis.states, RelationReport('X1X3'))


def test_odd_currents_anticommute_with_cocycle():
    assert _first_third_anticommutator(CurrentAlgebra(2)).passed


def test_dropped_cocycle_breaks_anticommutation():
    report = _first_third_anticommutator(CurrentAlgebra(2, drop_cocycle=(1, 3)))
    assert not report.passed
    assert report.residual_nonzero > 0


# ======================================================
# 🐢 RANK TWO
# ======================================================

@pytest.mark.slow
def test_drinfeld_relations_rank_two():
    reports = verify_drinfeld(2, 2, M=1)
    assert all_passed(reports), failures(reports)
    assert any(r.relation == 'Serre' for r in reports)


@pytest.mark.slow
def test_chevalley_relations_rank_two():
    reports = verify_chevalley(2, 2)
    assert all_passed(reports), failures(reports)


@pytest.mark.slow
def test_eta_compatibility_rank_two():
    reports = verify_eta_compatibility(2, 2)
    assert all_passed(reports), failures(reports)


@pytest.mark.slow
def test_drinfeld_suite_detects_dropped_cocycle():
    reports = verify_drinfeld(2, 1, M=1, drop_cocycle=(1, 3))
    failed = [r for r in reports if not r.passed]
    assert any(r.relation == 'XX-null' and (r.parameters['i'], r.parameters['ip']) == (1, 3) for r in failed)
