from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from koszul_lab.derham import (
    DiskConfig, LogDeRham, TruncationOverflow, check_cohomology, check_dg_soundness,
    de_rham_d, diagonal_pullback, external_product, form_str, kunneth_compare, monomial_str,
    partial_d, projection_pullback, wedge, weight_vectors,
)
from koszul_lab.graded import validate_algebra, validate_module
from oracles import closed_dim, cohomology_dim, omega_dim

CONFIGS = [(u, v, D) for u in (1, 2, 3) for v in range(u + 1) for D in (0, 1, 2, 3)]

# frozen from oracles.closed_dim summed over weights
FROZEN_Z = {
    (1, 1, 2): {0: 1, 1: 3},
    (2, 1, 2): {0: 1, 1: 6, 2: 3},
    (2, 2, 3): {0: 1, 1: 11, 2: 10},
    (3, 1, 3): {0: 1, 1: 20, 2: 20, 3: 4},
}


def stratum_dims(X, sub):
    out = {}
    for s in X.strata():
        d = sub(s)
        if d:
            out[s] = d
    return out


@pytest.mark.parametrize("u,v,D", [c for c in CONFIGS if c[0] <= 2] + [(3, 1, 3), (3, 3, 2)])
def test_stratum_dims_match_counting_oracle(u, v, D):
    X = LogDeRham(DiskConfig(1, u, v, D))
    for w in weight_vectors(u, D):
        for n in range(u + 1):
            s = (n, w)
            assert len(X.monomials(s)) == omega_dim(u, v, n, w)
            assert X.Z_subspace(s).dim == closed_dim(u, v, n, w)
            assert X.H_quotient(s).dim == cohomology_dim(u, v, n, w)


@pytest.mark.parametrize("key", sorted(FROZEN_Z))
def test_frozen_closed_form_totals(key):
    u, v, D = key
    Z = LogDeRham(DiskConfig(1, u, v, D)).closed_forms()
    assert Z.space.degree_dims() == FROZEN_Z[key]


@pytest.mark.parametrize("u,v,D", [(1, 1, 2), (2, 1, 2), (2, 2, 1)])
def test_dg_soundness_and_cohomology(u, v, D):
    cfg = DiskConfig(1, u, v, D)
    assert check_dg_soundness(cfg).passed
    assert check_cohomology(cfg).passed


def test_config_validation():
    with pytest.raises(ValueError):
        DiskConfig(1, 1, 2, 2)
    with pytest.raises(ValueError):
        DiskConfig(0, 1, 1, 2)


def test_z_and_h_are_algebras_and_a_modules():
    X = LogDeRham(DiskConfig(1, 2, 1, 2))
    assert validate_algebra(X.closed_forms()).passed
    assert validate_algebra(X.cohomology()).passed
    A = X.exterior_A()
    for target in ("Omega", "Z", "H"):
        assert validate_module(X.a_action(target, A=A)).passed


def test_leibniz_on_a_hand_example():
    # f = z_1 dz_2, g = z_2 dlog z_1 on one factor with u = 2, v = 1
    f = {(((1, 0), (1,)),): Fraction(1)}
    g = {(((0, 1), (0,)),): Fraction(1)}
    v = 1
    lhs = de_rham_d(wedge(f, g), v)
    df, dg = de_rham_d(f, v), de_rham_d(g, v)
    rhs = wedge(df, g)
    for k, c in wedge(f, dg).items():
        rhs[k] = rhs.get(k, 0) - c
    assert lhs == {k: c for k, c in rhs.items() if c}


def test_dlog_is_closed_and_z_is_not():
    v = 1
    dlog = {(((0,), (0,)),): Fraction(1)}
    z = {(((1,), ()),): Fraction(1)}
    assert de_rham_d(dlog, v) == {}
    assert de_rham_d(z, v) == {(((1,), (0,)),): Fraction(1)}


def test_diagonal_pullback_truncation():
    # z dlog z on each of two factors: pullback has weight 2
    f = {(((1,), ()), ((1,), (0,))): Fraction(1)}
    assert diagonal_pullback(f, 0, 1) == {(((2,), (0,)),): Fraction(1)}
    with pytest.raises(TruncationOverflow):
        diagonal_pullback(f, 0, 1, D=1)
    assert diagonal_pullback(f, 0, 1, D=1, truncate=True) == {}
    # dlog ^ dlog on the diagonal vanishes
    g = {(((0,), (0,)), ((0,), (0,))): Fraction(1)}
    assert diagonal_pullback(g, 0, 1) == {}


def test_projection_and_external_product():
    f = {(((1,), (0,)),): Fraction(1)}
    p = projection_pullback(f, 0, 1)
    assert list(p) == [(((0,), ()), ((1,), (0,)))]
    assert external_product(f, f) == {(((1,), (0,)), ((1,), (0,))): Fraction(1)}


def test_partial_differentials_sum_to_total():
    v = 1
    f = {(((1,), ()), ((2,), ())): Fraction(1)}
    tot = de_rham_d(f, v)
    parts = partial_d(f, v, 0)
    for k, c in partial_d(f, v, 1).items():
        parts[k] = parts.get(k, 0) + c
    assert tot == parts


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 1), st.integers(0, 1))
def test_d_squared_vanishes_on_random_monomials(a, b, i, j):
    v = 1
    I = tuple(k for k, on in enumerate((i, j)) if on)
    f = {(((a, b), I),): Fraction(1)}
    assert de_rham_d(de_rham_d(f, v), v) == {}


def test_strings():
    mono = (((1, 0), (0, 1)),)
    assert monomial_str(mono, 1) == "z^(1,0) ^ dlog z_1 ^ dz_2 @factor 1"
    assert form_str({}, 1) == "0"


@pytest.mark.parametrize("u", [1, 2])
def test_kunneth_two_factors(u):
    for degs in [(0, 1), (1, 1), (1, 0)]:
        assert kunneth_compare(DiskConfig(2, u, 1, 2), degs).passed
