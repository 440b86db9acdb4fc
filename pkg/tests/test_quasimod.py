import pytest
from hypothesis import given, settings, strategies as st

from koszul_lab.derham import DiskConfig
from koszul_lab.graded import GradedModuleData, exterior_algebra, regular_module, validate_module
from koszul_lab.quasi import FormsQuasiAlgebra, from_graded_algebra, is_koszul_quasi, tuples_up_to
from koszul_lab.quasimod import (
    DecoupledAction, EComplex, FormsAction, TensorAction, check_action, e_homology,
    flip_one_entry, hypothesis_items, poincare_with_parameters_check, pullback_comparison,
    theorem3, theorem3_hypothesis_check, theorem3_json, vanishing_pullback_space,
)

DLOG = (1, (0,))
ZERO1 = ((0,), (0,))


@pytest.fixture(scope="module")
def F112():
    return FormsQuasiAlgebra(DiskConfig(1, 1, 1, 2))


@pytest.fixture(scope="module")
def F212():
    return FormsQuasiAlgebra(DiskConfig(1, 2, 1, 2))


def test_action_koszul_sign(F112):
    act = FormsAction(F112)
    # dlog into slot 0 of 1 (x) dlog: no sign
    assert act.act(DLOG, (0, 1), ZERO1, 0).to_dense() == [[1]]
    # dlog into slot 1 of dlog (x) 1 crosses one form: sign -1
    assert act.act(DLOG, (1, 0), ZERO1, 1).to_dense() == [[-1]]


@pytest.mark.parametrize("which", ["F112", "F212"])
def test_forms_action_axioms(which, request):
    F = request.getfixturevalue(which)
    assert check_action(FormsAction(F), 4, 3).passed


def test_tensor_and_forms_actions_agree(F112):
    act = FormsAction(F112)
    X, A = F112.X, act.A
    T = from_graded_algebra(X.closed_forms(), D=2)
    ta = TensorAction(A, T, X.a_action("Z", A=A))
    for idx in tuples_up_to(3, 3, positive=False):
        for W in F112.component(idx):
            for p in range(len(idx)):
                for sA in A.strata():
                    assert act.act(sA, idx, W, p) == ta.act(sA, idx, W, p)


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_e_complex_d_squared_and_chain_map(data):
    F = FormsQuasiAlgebra(DiskConfig(1, 1, 1, 2))
    act = FormsAction(F)
    items = hypothesis_items(F, 4, 1, 2)
    ls, Wl, ns, bws = data.draw(st.sampled_from(items))
    l0 = data.draw(st.integers(1, 2))
    E = EComplex(F, ls + (l0,), Wl + ((0,),), ns, bws, act)
    assert E.check_d_squared()
    for sA in act.A.strata():
        assert E.check_action_chain_map(sA)


def test_e_complex_without_bar_part_is_the_component(F212):
    E = EComplex(F212, (1, 1), ((0, 1), (1, 0)), (), (), FormsAction(F212))
    assert E.homology_dims() == {0: F212.dim((1, 1), ((0, 1), (1, 0)))}


def test_e_homology_is_a_module(F112):
    act = FormsAction(F112)
    M, conc = e_homology(F112, act, (), (), (1,), ((1,),), 2, 2)
    assert not conc
    assert validate_module(M).passed


def test_hypothesis_and_conclusion_on_forms(F112):
    res = theorem3(F112, FormsAction(F112))
    hyp = res["hypothesis"]
    assert hyp.passed and hyp.details["items"] == 85
    assert res["A_koszul"].passed and res["conclusion"].passed
    assert res["implication_holds"]
    doc = theorem3_json(res)
    assert doc["hypothesis"]["verdict"] == "pass"


def test_exterior_regular_action():
    L = exterior_algebra([(1,)])
    T = from_graded_algebra(L)
    act = TensorAction(L, T, regular_module(L))
    res = theorem3(T, act)
    assert res["hypothesis"].passed and res["conclusion"].passed


def test_trivial_acting_algebra_on_non_koszul_instance():
    from koszul_lab.graded import quadratic_algebra
    from koszul_lab.rlinalg import QMatrix
    Z = quadratic_algebra(2, [{(1, 1): 1}, {(0, 0): 1, (0, 1): 1}], 5)
    T = from_graded_algebra(Z, name="nk")
    k = exterior_algebra([])

    def act(sA, sM):
        d = Z.dim(sM)
        return QMatrix.identity(d)

    res = theorem3(T, TensorAction(k, T, GradedModuleData(k, Z.space, act)))
    assert not res["conclusion"].passed
    assert not res["hypothesis"].passed
    assert res["implication_holds"]


def test_decoupled_action_fails(F212):
    dec = DecoupledAction(FormsAction(F212), 1)
    ax = check_action(dec)
    assert not ax.passed and ax.witness["law"] == "associativity"
    rep = theorem3_hypothesis_check(F212, dec)
    assert not rep.passed
    assert rep.details["modules_failing"] == 94
    item, tor = rep.failures[0]
    assert tor.witnesses[0][:3] == (0, 2, (0, 1))


def test_sign_flip_is_caught_by_action_axioms(F112):
    flipped = flip_one_entry(FormsAction(F112), DLOG, (0, 1), ZERO1, 0)
    ax = check_action(flipped)
    assert not ax.passed
    rep = theorem3_hypothesis_check(F112, flipped)
    assert not rep.passed and rep.details["action_axioms"] is False


def test_vanishing_pullback_examples(F112):
    cfg = F112.X.cfg
    # one factor: every closed 1-form of weight 1
    d, forms = vanishing_pullback_space(cfg, (), (), (1,), ((1,),))
    assert d == 1
    # dlog (x) dlog pulls back to zero, so it survives
    d, _ = vanishing_pullback_space(cfg, (), (), (2,), ((0,),))
    assert d == 1


@pytest.mark.parametrize("which", ["F112", "F212"])
def test_pullback_model_matches(which, request):
    F = request.getfixturevalue(which)
    ok, rows = pullback_comparison(F)
    assert ok and rows
    assert poincare_with_parameters_check(F.X.cfg).passed


def test_conclusion_matches_quasi_koszul(F112):
    assert is_koszul_quasi(F112, 4, 3).passed


def test_flip_that_breaks_cycles_gives_invalid_module(F212):
    # this flip makes the induced action leave the top cycles of one E-complex
    flipped = flip_one_entry(FormsAction(F212), (1, (0, 1)), (1, 1, 1),
                             ((0, 0), (1, 1), (0, 0)), 0)
    res = theorem3(F212, flipped)
    hyp = res["hypothesis"]
    assert not hyp.passed
    assert hyp.details["modules_invalid"] == 1
    assert res["implication_holds"]
    assert theorem3_json(res)["hypothesis"]["verdict"] == "fail"
