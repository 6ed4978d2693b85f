"""
Tests for the Fock-space engine
"""
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from core.coeffs import ONE, PLAIN_KEY, q, qnum, qscalar
from core.errors import IndexRangeError
from core.fock import (
    FockState, LatticePoint, LinComb, OscillatorLabel, OscillatorMode, a_color, bracket,
    c_color, cartan_data, colored_multisets, combo_coefficients, compare_on_states,
    enumerate_basis, exp_field, exp_vertex_mode, field_c, field_H, field_H_plus,
    capped_states, guarded_states, identity_operator, materialize, oscillator_action, oscillator_mode,
    oscillator_norm, vector_difference, basis_vector, apply_field_coefficient,
)
from core.reports import RelationReport


def unit(N, color, mode):
    return FockState.of(LatticePoint.origin(N), (((color, mode), 1),))


# ======================================================
# 📐 CARTAN DATA
# ======================================================

def test_cartan_rank_one():
    data = cartan_data(1)
    assert data.a == ((0, 2), (2, 0))
    assert data.a_inv == ((0, Fraction(1, 2)), (Fraction(1, 2), 0))


def test_cartan_rank_two_entries():
    a = cartan_data(2).a
    assert (a[0][0], a[0][1], a[0][3], a[1][2], a[1][3], a[2][3], a[3][3]) == (0, 1, 2, -1, -2, 2, 0)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_cartan_symmetric_and_inverse(N):
    data = cartan_data(N)
    n = 2 * N
    for i in range(n):
        for j in range(n):
            assert data.a[i][j] == data.a[j][i]
            product = sum(data.a[i][k] * data.a_inv[k][j] for k in range(n))
            assert product == (1 if i == j else 0)


def test_cartan_rank_two_inverse():
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    assert cartan_data(2).a_inv == (
        (half, half, 0, quarter),
        (half, 0, -half, 0),
        (0, -half, -half, quarter),
        (quarter, 0, quarter, 0),
    )


def test_cartan_rejects_zero_rank():
    with pytest.raises(ValueError):
        cartan_data(0)


# ======================================================
# 🧷 COMPOSITE OSCILLATORS
# ======================================================

def test_first_composite_is_sum_of_two_oscillators():
    combo = combo_coefficients(2)
    assert combo.A(1, 3)[:4] == (ONE, ONE, 0, 0)
    assert combo.A(2, 1)[:4] == (0, -ONE, -ONE, 0)


def test_last_composite_carries_q_factor():
    combo = combo_coefficients(2)
    factor = (q ** 2 + q ** -2) / 2
    assert not (combo.A(4, 2)[1] + factor)
    assert combo.A_zero(4)[:4] == (1, -1, 1, -1)


@pytest.mark.parametrize("n", [1, 2, -1])
def test_composite_commutators_follow_cartan_matrix(n):
    combo = combo_coefficients(2)
    a = combo.cartan.a
    for i in range(1, 5):
        for j in range(1, 5):
            left, right = combo.A(i, n), combo.A(j, -n)
            value = sum((left[b] * right[b] * oscillator_norm(2, b, n) for b in range(6)), qscalar(0))
            assert not (value - qnum(a[i - 1][j - 1] * n) * qnum(n) / n)


@pytest.mark.parametrize("n", [1, 2])
def test_dual_pairing_is_diagonal(n):
    combo = combo_coefficients(2)
    for i in range(1, 4):
        for j in range(1, 4):
            expected = qnum(n) ** 2 / n if i == j else qscalar(0)
            assert not (combo.pairing(i, j, n) - expected)


def test_dual_charges_pair_with_zero_modes():
    combo = combo_coefficients(2)
    for i in range(1, 5):
        for j in range(1, 5):
            # [A*^j_0, Q_(A^i)] = delta_ij
            value = sum(x * y for x, y in zip(combo.A_star_zero(j), combo.Q_A(i)))
            assert value == (1 if i == j else 0)


def test_composite_index_range():
    with pytest.raises(IndexRangeError):
        combo_coefficients(1).A(3, 1)


# ======================================================
# 🌐 BASES
# ======================================================

@pytest.mark.parametrize("D, count", [(0, 1), (1, 7), (2, 28), (3, 132)])
def test_basis_counts_rank_two(D, count):
    basis = enumerate_basis([LatticePoint.origin(2)], D)
    assert len(basis) == count


def test_basis_enumeration_is_reproducible():
    window = [LatticePoint.of([1, 0, 0, 0], [0, 0]), LatticePoint.origin(2)]
    first = enumerate_basis(window, 2)
    second = enumerate_basis(list(reversed(window)), 2)
    assert first.states == second.states
    assert first.fingerprint() == second.fingerprint()
    assert first.states[0].lattice == LatticePoint.origin(2)


def test_basis_sorted_by_degree_within_lattice():
    basis = enumerate_basis([LatticePoint.origin(1)], 3)
    degrees = [s.degree for s in basis.states]
    assert degrees == sorted(degrees)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 4), st.integers(1, 4))
def test_multiset_degrees(degree, colors):
    for occupation in colored_multisets(degree, colors):
        assert sum(mode * mult for (_, mode), mult in occupation) == degree


# ======================================================
# 🎻 OSCILLATORS
# ======================================================

def test_annihilator_contracts_with_sign():
    basis = enumerate_basis([LatticePoint.origin(1)], 1)
    vacuum = basis.states[0]
    first = oscillator_mode(OscillatorLabel('a', 1, 1), 1).apply_state(unit(1, a_color(1), 1))
    second = oscillator_mode(OscillatorLabel('a', 2, 1), 1).apply_state(unit(1, a_color(2), 1))
    assert first == {(vacuum, PLAIN_KEY): ONE}
    assert second == {(vacuum, PLAIN_KEY): -ONE}


def test_zero_mode_is_charge():
    lattice = LatticePoint.of([Fraction(3, 2), 0], [0])
    state = FockState.of(lattice)
    image = oscillator_mode(OscillatorLabel('a', 1, 0), 1).apply_state(state)
    assert image == {(state, PLAIN_KEY): qscalar(Fraction(3, 2))}


def test_creation_shifts_degree():
    basis = enumerate_basis([LatticePoint.origin(1)], 3)
    matrix = oscillator_action(OscillatorLabel('c', 1, -2), basis)
    assert matrix.degree_shift == 2
    assert matrix.dropped > 0


@pytest.mark.parametrize("N", [1, 2])
def test_oscillator_commutators_on_guarded_states(N):
    basis = enumerate_basis([LatticePoint.origin(N)], 3)
    for n in (1, 2):
        states, _, _ = guarded_states(basis, n)
        for color in range(3 * N):
            coeffs = tuple(ONE if b == color else 0 for b in range(3 * N))
            lowering = OscillatorMode(N, coeffs, n)
            raising = OscillatorMode(N, coeffs, -n)
            expected = LinComb([(oscillator_norm(N, color, n), identity_operator())])
            report = compare_on_states(bracket(lowering, raising), expected, states, RelationReport('osc'))
            assert report.passed
            assert report.checked_dim == len(states)


def test_guarded_states_reports_cap():
    basis = enumerate_basis([LatticePoint.origin(1)], 3)
    total = len(basis.up_to_degree(2))
    states, guard, capped = guarded_states(basis, 1, limit=5)
    assert guard == 2
    assert len(states) == 5
    assert capped == (5, total)
    states, _, capped = guarded_states(basis, 1, limit=total)
    assert len(states) == total
    assert capped is None


def test_capped_states_keeps_order():
    states, capped = capped_states(list(range(10)), 4)
    assert states == [0, 1, 2, 3]
    assert capped == (4, 10)
    assert capped_states([], 4) == ([], None)


# ======================================================
# 🌊 NORMAL-ORDERED EXPONENTIALS
# ======================================================

def test_c_exponential_shifts_charge_from_vacuum():
    combo = combo_coefficients(2)
    eta = exp_field(field_c(combo, 1), parity=1, mode_offset=1, label='eta1')
    vacuum = FockState.of(LatticePoint.origin(2))
    image = eta.coefficient(0).apply_state(vacuum)
    shifted = FockState.of(LatticePoint.of([0, 0, 0, 0], [1, 0]))
    assert image == {(shifted, PLAIN_KEY): ONE}


def test_c_exponential_creates_oscillators():
    combo = combo_coefficients(1)
    eta = exp_field(field_c(combo, 1), parity=1, mode_offset=1)
    vacuum = FockState.of(LatticePoint.origin(1))
    image = eta.coefficient(1).apply_state(vacuum)
    created = FockState.of(LatticePoint.of([0, 0], [1]), (((c_color(1, 1), 1), 1),))
    # exp(sum c_-n z^n / [n]) at first order
    assert image == {(created, PLAIN_KEY): ONE}


def test_eta_xi_anticommute_to_identity():
    combo = combo_coefficients(1)
    eta = exp_field(field_c(combo, 1), parity=1, mode_offset=1).mode(0)
    xi = exp_field(-field_c(combo, 1), parity=1).mode(0)
    basis = enumerate_basis([LatticePoint.origin(1)], 2)
    report = compare_on_states(bracket(eta, xi), identity_operator(), basis.states, RelationReport('eta-xi'))
    assert report.passed, report.failures


def test_eta_squares_to_zero():
    combo = combo_coefficients(1)
    eta = exp_field(field_c(combo, 1), parity=1, mode_offset=1).mode(0)
    basis = enumerate_basis([LatticePoint.origin(1)], 2)
    for state in basis.states:
        assert eta.apply(eta.apply_state(state)) == {}


def test_psi_zero_mode_is_q_power():
    combo = combo_coefficients(1)
    psi = exp_field(field_H_plus(combo, 1))
    state = FockState.of(LatticePoint.of([1, 0], [0]))
    assert psi.mode(0).apply_state(state) == {(state, PLAIN_KEY): q}


def test_exp_mode_matrix_records_offset_and_charge():
    combo = combo_coefficients(1)
    spec = exp_field(field_H(combo, 1, Fraction(-1, 2)) + field_c(combo, 1), parity=1, mode_offset=1)
    basis = enumerate_basis([LatticePoint.of([0, 0], [Fraction(1, 3)])], 1)
    matrix = exp_vertex_mode(spec, 0, basis)
    assert matrix.exp_offset['z'] == Fraction(1, 3)
    assert spec.charge[:3] == (1, -1, 1)


def test_apply_field_coefficient_matches_operator():
    combo = combo_coefficients(1)
    spec = exp_field(field_H(combo, 1, Fraction(1, 2)) - field_c(combo, 1), parity=1)
    state = FockState.of(LatticePoint.origin(1), (((0, 1), 1), ((2, 1), 1)))
    direct = apply_field_coefficient(spec, basis_vector(state), -1)
    assert vector_difference(direct, spec.coefficient(-1).apply_state(state)) == {}
    assert direct


def test_materialize_counts_dropped_entries():
    combo = combo_coefficients(1)
    basis = enumerate_basis([LatticePoint.origin(1)], 1)
    eta = exp_field(field_c(combo, 1), parity=1, mode_offset=1).mode(0)
    matrix = materialize(eta, basis)
    # every image lives on the shifted lattice point, outside the basis
    assert matrix.nonzero_count() == 0
    assert matrix.dropped > 0
