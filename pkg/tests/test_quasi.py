from math import comb, prod

import pytest
from hypothesis import given, settings, strategies as st

from koszul_lab.derham import DiskConfig, LogDeRham, weight_vectors
from koszul_lab.graded import exterior_algebra, quadratic_algebra
from koszul_lab.koszul import quadratic_dual_diagonal
from koszul_lab.quasi import (
    DirectSumQuasi, FormsQuasiAlgebra, QuasiBarSlice, QuasiCoalgebra, block_totals,
    block_weight_choices, check_axioms, check_coalgebra_axioms, compositions, corrupt_one_entry,
    distributivity_criterion, external_mult_duality_check, faithful, from_graded_algebra,
    is_koszul_quasi, is_koszul_quasi_coalgebra, is_koszul_quasi_m1_agrees, merged_index,
    quadratic_sequence_check, quasi_cobar, tuples_up_to, weight_splittings,
)
from koszul_lab.quasimod import diagonal_vs_tensor_merge
from oracles import closed_dim

NK_RELATIONS = [{(1, 1): 1}, {(0, 0): 1, (0, 1): 1}]


@pytest.fixture(scope="module")
def F112():
    return FormsQuasiAlgebra(DiskConfig(1, 1, 1, 2))


@pytest.fixture(scope="module")
def F212():
    return FormsQuasiAlgebra(DiskConfig(1, 2, 1, 2))


@pytest.fixture(scope="module")
def NK():
    return from_graded_algebra(quadratic_algebra(2, NK_RELATIONS, 5), name="nk")


def test_index_helpers():
    assert merged_index((1, 2, 3), 1) == (1, 5)
    assert len(list(compositions(4))) == 8
    assert len(list(weight_splittings((2, 1), 2))) == comb(3, 1) * comb(2, 1)
    assert tuples_up_to(2, 2) == [(1,), (1, 1), (2,)]
    assert block_totals((2, 1), ((1, 0), (0, 1), (1, 1))) == ((1, 1), (1, 1))


@pytest.mark.parametrize("u,v", [(1, 1), (2, 1), (2, 2)])
def test_forms_component_dims_are_products_of_closed_dims(u, v):
    Q = FormsQuasiAlgebra(DiskConfig(1, u, v, 2))
    ws = weight_vectors(u, 2)
    for idx in [(1,), (0, 1), (1, 1), (2, 1), (1, 0, 1)]:
        for W, d in Q.component(idx).items():
            assert d == prod(closed_dim(u, v, n, w) for n, w in zip(idx, W))
        expected = prod(sum(closed_dim(u, v, n, w) for w in ws) for n in idx)
        assert Q.total_dim(idx) == expected


def test_forms_small_instance(F112):
    assert F112.total_dim((1, 1)) == 9
    assert check_axioms(F112, 4, 3).passed
    rep = is_koszul_quasi(F112, 4, 3)
    assert rep.passed and rep.slices == 174
    assert diagonal_vs_tensor_merge(F112, 4, 3).passed


def test_forms_u2_is_koszul(F212):
    assert check_axioms(F212, 4, 3).passed
    assert is_koszul_quasi(F212, 4, 3).passed


def test_exterior_one_generator():
    Q = from_graded_algebra(exterior_algebra([(1,)]))
    assert check_axioms(Q, 4, 3).passed
    sl = QuasiBarSlice(Q, (1, 1), ((1,), (1,)))
    assert sl.homology_dims() == {2: 1}
    C = QuasiCoalgebra(Q, 4)
    for m in range(1, 4):
        assert C.total_dim((1,) * m) == 1
    assert C.total_dim(()) == 1


def test_corruption_is_caught(F212):
    bad, where = corrupt_one_entry(F212, (1, 1), 0)
    rep = check_axioms(bad, 4, 3)
    assert not rep.passed
    assert rep.witness["law"] == "associativity"
    assert rep.witness["tuple"] == [0, 1, 1]
    assert where[:2] == ((1, 1), 0)


def test_m1_agrees_with_graded_bar(F112):
    X = LogDeRham(DiskConfig(1, 1, 1, 2))
    ok, rq, ra = is_koszul_quasi_m1_agrees(F112, X.closed_forms(), 4)
    assert ok and rq.passed


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(tuples_up_to(4, 3)), st.data())
def test_bar_d_squared_and_additivity(ns, data):
    Q1 = from_graded_algebra(exterior_algebra([(1,)]))
    Q2 = from_graded_algebra(exterior_algebra([(0,), (1,)]))
    S = DirectSumQuasi(Q1, Q2)
    bws = data.draw(st.sampled_from(block_weight_choices(1, 2, ns)))
    s1, s2, s = (QuasiBarSlice(Q, ns, bws) for Q in (Q1, Q2, S))
    assert s.check_d_squared()
    h = dict(s1.homology_dims())
    for i, x in s2.homology_dims().items():
        h[i] = h.get(i, 0) + x
    assert {i: x for i, x in h.items() if x} == {i: x for i, x in s.homology_dims().items() if x}


def test_coalgebra_matches_graded_dual_diagonal(F112):
    X = LogDeRham(DiskConfig(1, 1, 1, 2))
    Cd = quadratic_dual_diagonal(X.closed_forms(), N=4)
    C = QuasiCoalgebra(F112, 4)
    for n in range(1, 5):
        for b in C.frames((n,)):
            if faithful(b, 2):
                assert C.dim((n,), b) == Cd.space.dim((n, b[0]))
    assert C.total_dim((2,)) == 9 and C.total_dim((1, 1)) == 9


def test_dual_coalgebra_checks(F112):
    C = QuasiCoalgebra(F112, 4)
    assert check_coalgebra_axioms(C, 4, 3).passed
    assert is_koszul_quasi_coalgebra(C, 4, 3).passed
    assert quadratic_sequence_check(F112, C, 4).passed
    for n in (2, 3, 4):
        assert distributivity_criterion(C, n).passed
    assert external_mult_duality_check(F112, C, 4, 3).passed


def test_cobar_d_squared(F212):
    C = QuasiCoalgebra(F212, 3)
    for ns in [(1, 1), (2,), (2, 1)]:
        for b in C.frames(ns):
            assert quasi_cobar(C, ns, b).check_d_squared()


def test_non_koszul_quadratic_negative_control(NK):
    rep = is_koszul_quasi(NK, 4, 3)
    assert not rep.passed
    assert rep.witnesses[0][:2] == (3, 4)
    assert rep.witnesses[0][2][0] == (4,)
    C = QuasiCoalgebra(NK, 4)
    assert not is_koszul_quasi_coalgebra(C, 4, 3).passed
    # two subspaces always generate a distributive lattice
    assert distributivity_criterion(C, 3).passed
    bad = distributivity_criterion(C, 4)
    assert not bad.passed
