"""
Tests for the graded R-matrix
"""
import pytest

from core.coeffs import ZERO, q
from core.rmatrix import (
    QQ_UZ, build_rmatrix, check_conservation, check_gybe, check_initial_condition,
    check_unitarity_crossing, count_nonzero, embed, graded_permutation, identity,
    mutate_rmatrix, pair_index, parity, rmatrix_entry, rmatrix_numerator,
    specialize_rmatrix_q_one, supertranspose,
)

FIELD = QQ_UZ.field
U, Z = FIELD.gens
Q = U ** 2


def test_parity_pattern():
    assert [parity(j) for j in range(1, 5)] == [0, 1, 0, 1]


def test_entry_table_rank_one():
    assert rmatrix_entry(1, 1, 1, 1, Z) == FIELD.one
    assert not (rmatrix_entry(2, 2, 2, 2, Z) - (Z / Q - Q) / (Z * Q - 1 / Q))
    assert not (rmatrix_entry(1, 2, 1, 2, Z) - (Z - 1) / (Z * Q - 1 / Q))
    # exchange into an increasing pair carries no z, into a decreasing pair one power of z
    assert not (rmatrix_entry(2, 1, 1, 2, Z) - (Q - 1 / Q) / (Z * Q - 1 / Q))
    assert not (rmatrix_entry(1, 2, 2, 1, Z) - Z * (Q - 1 / Q) / (Z * Q - 1 / Q))
    assert not rmatrix_entry(1, 2, 2, 2, Z)


def test_odd_exchange_sign():
    # both vectors odd: 2 and 4 for N = 2
    assert not (rmatrix_entry(4, 2, 2, 4, Z) + (Q - 1 / Q) / (Z * Q - 1 / Q))


def test_numerators_rank_one():
    assert rmatrix_numerator(1, 1, 1, 1) == (-q ** -1, q)
    assert rmatrix_numerator(2, 2, 2, 2) == (-q, q ** -1)
    assert rmatrix_numerator(2, 1, 1, 2) == (q - q ** -1, ZERO)
    assert rmatrix_numerator(1, 2, 2, 1) == (ZERO, q - q ** -1)
    assert rmatrix_numerator(1, 2, 2, 2) == (ZERO, ZERO)


def test_odd_exchange_numerator_sign():
    assert rmatrix_numerator(4, 2, 2, 4) == (-(q - q ** -1), ZERO)


@pytest.mark.parametrize("N", [1, 2])
def test_entry_count(N):
    n = 2 * N
    R = build_rmatrix(N)
    # n diagonal plus n(n-1) direct and n(n-1) exchange entries
    assert len(R.entries) == n + 2 * n * (n - 1)


@pytest.mark.parametrize("N", [1, 2])
def test_conservation(N):
    assert check_conservation(build_rmatrix(N)).passed


@pytest.mark.parametrize("N", [1, 2])
def test_initial_condition_is_graded_permutation(N):
    assert check_initial_condition(N).passed


def test_rank_one_ybe():
    report = check_gybe(1)
    assert report.passed
    assert report.details['entries_checked'] == 64


@pytest.mark.slow
def test_rank_two_ybe():
    assert check_gybe(2).passed


@pytest.mark.parametrize("N", [1, 2])
def test_unitarity_and_crossing(N):
    unitarity, crossing = check_unitarity_crossing(N)
    assert unitarity.passed
    assert crossing.passed


def test_mutated_entry_breaks_ybe():
    R = mutate_rmatrix(build_rmatrix(1), (2, 1, 1, 2))
    assert R.mutations == frozenset({(2, 1, 1, 2)})
    assert not check_gybe(1, R).passed


def test_mutation_is_involutive():
    R = mutate_rmatrix(mutate_rmatrix(build_rmatrix(1), (2, 1, 1, 2)), (2, 1, 1, 2))
    assert not R.mutations
    assert check_gybe(1, R).passed


def test_mutated_entry_breaks_unitarity():
    R = build_rmatrix(1, mutate={(2, 1, 1, 2)})
    unitarity, _ = check_unitarity_crossing(1, R)
    assert not unitarity.passed


def test_graded_permutation_squares_to_one():
    P = graded_permutation(2)
    assert count_nonzero(P * P - identity(16, QQ_UZ)) == 0


def test_supertranspose_first_leg_twice_is_sign():
    N = 1
    n = 2 * N
    M = build_rmatrix(N).matrix(Z)
    twice = supertranspose(supertranspose(M, 1, N), 1, N)
    for (r, c), value in M.to_dok().items():
        i, k = r // n + 1, c // n + 1
        sign = -1 if (parity(i) + parity(k)) % 2 else 1
        assert not (twice.to_dok().get((r, c), FIELD.zero) - sign * value)


def test_supertranspose_of_identity():
    one = identity(4, QQ_UZ)
    for leg in (1, 2, 12):
        assert count_nonzero(supertranspose(one, leg, 1) - one) == 0


def test_full_supertranspose_of_even_matrix_is_transpose():
    N = 2
    n = 2 * N
    M = build_rmatrix(N).matrix(Z)
    transposed = supertranspose(M, 12, N)
    for (r, c), value in M.to_dok().items():
        assert not (transposed.to_dok()[(c, r)] - value)


def test_r12_embedding_is_plain_tensor_with_identity():
    N = 1
    n = 2 * N
    M = build_rmatrix(N).matrix(Z)
    r12 = embed(M, (1, 2), N).to_dok()
    value = M.to_dok()[(pair_index(1, 2, n), pair_index(2, 1, n))]
    for s in range(n):
        assert not (r12[((0 * n + 1) * n + s, (1 * n + 0) * n + s)] - value)


def test_q_one_limit_is_identity_pattern():
    limits = specialize_rmatrix_q_one(build_rmatrix(2))
    for (i, j, k, l), value in limits.items():
        if (i, j) == (k, l):
            assert value == value.field.one
        else:
            assert not value
