from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from koszul_lab.graded import (
    GradedSpace, algebra_with_table, exterior_algebra, positive_part, quadratic_algebra,
    regular_module, shift_module, trivial_module, truncate_algebra, truncated_polynomial,
    validate_algebra, validate_module,
)
from koszul_lab.rlinalg import QMatrix

weights = st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=3)


@settings(max_examples=30, deadline=None)
@given(weights)
def test_exterior_algebra_is_valid_and_graded_commutative(ws):
    A = exterior_algebra(ws)
    assert validate_algebra(A).passed
    assert A.is_connected()
    k = len(ws)
    assert sum(A.space.degree_dims().values()) == 2 ** k
    # x_i x_j = - x_j x_i on generators
    for s1 in A.strata():
        for s2 in A.strata():
            if s1[0] == 1 and s2[0] == 1:
                for i in range(A.dim(s1)):
                    for j in range(A.dim(s2)):
                        xy = A.multiply(s1, i, s2, j)
                        yx = A.multiply(s2, j, s1, i)
                        assert xy == {r: -c for r, c in yx.items()}


def test_exterior_degree_dims():
    A = exterior_algebra([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert A.space.degree_dims() == {n: comb(3, n) for n in range(4)}


def test_commutative_polynomial_as_quadratic_algebra():
    # k<x,y>/(xy - yx): dim A_n = n + 1
    A = quadratic_algebra(2, [{(0, 1): 1, (1, 0): -1}], 5)
    assert validate_algebra(A).passed
    assert A.space.degree_dims() == {n: n + 1 for n in range(6)}


def test_truncated_polynomial():
    A = truncated_polynomial(3)
    assert validate_algebra(A).passed
    assert A.space.degree_dims() == {0: 1, 1: 1, 2: 1}
    s1 = (1, ())
    assert A.mult(s1, (2, ())).shape == (0, 1)


def test_table_algebra_detects_non_associativity():
    strata = {(0, ()): ["1"], (1, ()): ["a", "b"], (2, ()): ["c"], (3, ()): ["e"]}
    # (a a) b = c b = e but a (a b) = 0
    bad = algebra_with_table(0, strata, {("a", "a"): {"c": 1}, ("c", "b"): {"e": 1}})
    rep = validate_algebra(bad)
    assert not rep.passed and rep.witness["law"] == "associativity"


def test_modules():
    A = exterior_algebra([(1,), (1,)])
    R = regular_module(A)
    assert validate_module(R).passed
    assert validate_module(trivial_module(A, degree=2)).passed
    S = shift_module(R, 1)
    assert validate_module(S).passed
    assert min(s[0] for s in S.strata()) == 1
    P = positive_part(R)
    assert validate_module(P).passed
    assert all(s[0] >= 1 for s in P.strata())


def test_truncation_and_json():
    A = exterior_algebra([(1, 0), (0, 1)])
    T = truncate_algebra(A, 1, 1)
    assert sorted(T.strata()) == [(0, (0, 0)), (1, (0, 1)), (1, (1, 0))]
    V = GradedSpace(2, {(0, (0, 0)): ["1"], (1, (1, 0)): ["x"]})
    assert GradedSpace.from_json(V.to_json()).strata() == V.strata()


def test_product_shape_is_checked():
    V = GradedSpace(0, {(0, ()): ["1"], (1, ()): ["x"], (2, ()): ["y"]})
    from koszul_lab.graded import GradedAlgebraData
    A = GradedAlgebraData(V, lambda s1, s2: QMatrix.zeros(5, 5))
    with pytest.raises(ValueError):
        A.mult((1, ()), (1, ()))
