"""
Tests for the evaluation modules
"""
import pytest

from core.coeffs import q, qnum
from core.errors import IndexRangeError
from core.evaluation import evaluation_generators, verify_evaluation, x_shift
from core.reports import all_passed


def test_x_shift_alternates():
    assert [x_shift(i) for i in range(1, 6)] == [1, 0, 1, 0, 1]


def test_last_cartan_mode_rank_one():
    module = evaluation_generators(1)
    diagonal = module.h_diagonal(2, 1)
    assert not diagonal[0]
    assert not (diagonal[1] + qnum(2) * q)


def test_zero_modes_of_dual_are_negated():
    plain, dual = evaluation_generators(2), evaluation_generators(2, dual=True)
    for j in range(1, 5):
        assert dual.zero_mode_weights(j) == tuple(-w for w in plain.zero_mode_weights(j))


def test_psi_first_mode_rank_one():
    module = evaluation_generators(1)
    entries = module.psi(1, 1, 1).to_dok()
    assert len(entries) == 2
    for value in entries.values():
        assert not (value - (q ** 2 - 1))


def test_psi_modes_vanish_on_wrong_side():
    module = evaluation_generators(2)
    assert not module.psi(1, 2, -1).to_dok()
    assert not module.psi(-1, 2, 1).to_dok()


def test_generator_index_range():
    module = evaluation_generators(1)
    with pytest.raises(IndexRangeError):
        module.X(1, 2, 0)
    with pytest.raises(IndexRangeError):
        module.H(3, 1)


@pytest.mark.parametrize("N", [1, 2])
@pytest.mark.parametrize("dual", [False, True])
def test_level_zero_relations(N, dual):
    reports = verify_evaluation(N, dual, M=1)
    assert all_passed(reports), [(r.relation, r.parameters, r.failures) for r in reports if not r.passed]
    assert {r.relation for r in reports} == {'HH', 'HX', 'X+X-', 'XX-null'}


def test_level_zero_relations_wider_window():
    assert all_passed(verify_evaluation(1, False, M=2))
