"""Acceptance criteria 1-9, one test each.

Each test records a PASS/FAIL line (shown in the terminal summary and,
under ``-s``, printed as it finishes) and enforces its time limit.
Run alone with ``pytest tests/test_acceptance.py -s``.
"""
import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from itertools import product

import pytest

from conftest import ACCEPTANCE
from koszul_lab.cli import ScenarioConfig, module_corpus, run
from koszul_lab.derham import (
    DiskConfig, LogDeRham, check_cohomology, check_dg_soundness, kunneth_compare,
)
from koszul_lab.graded import (
    GradedModuleData, exterior_algebra, positive_part, quadratic_algebra, regular_module,
    trivial_module, truncated_polynomial,
)
from koszul_lab.koszul import (
    hyper_tor_of_C, is_koszul_algebra, is_koszul_module, lemma_equivalence_check, tor_table,
)
from koszul_lab.quasi import (
    FormsQuasiAlgebra, QuasiCoalgebra, check_axioms, check_coalgebra_axioms, corrupt_one_entry,
    distributivity_criterion, external_mult_duality_check, from_graded_algebra, is_koszul_quasi,
    is_koszul_quasi_coalgebra, quadratic_sequence_check,
)
from koszul_lab.quasimod import (
    DecoupledAction, FormsAction, TensorAction, flip_one_entry, poincare_with_parameters_check,
    pullback_comparison, theorem3,
)
from koszul_lab.rlinalg import QMatrix, Subspace, is_distributive

NK_RELATIONS = [{(1, 1): 1}, {(0, 0): 1, (0, 1): 1}]
ALL_CFGS = [(u, v, D) for u in (1, 2, 3) for v in range(u + 1) for D in range(4)]


@contextmanager
def criterion(k, limit, text):
    state = {"ok": False, "failures": []}
    t = time.perf_counter()
    try:
        yield state
    finally:
        secs = time.perf_counter() - t
        ok = state["ok"] and not state["failures"] and (limit is None or secs < limit)
        ACCEPTANCE[k] = (ok, secs, limit, text)
        print("\n%s criterion %d: %s (%.1fs)" % ("PASS" if ok else "FAIL", k, text, secs))
    if limit is not None:
        assert secs < limit, "criterion %d took %.1fs, limit %ds" % (k, secs, limit)


def finish(state):
    state["ok"] = not state["failures"]
    assert not state["failures"], state["failures"][:5]


def test_criterion_1_dg_soundness():
    with criterion(1, 60, "d^2 = 0, Leibniz and graded commutativity, u<=3, v<=u, D<=3") as st:
        for u, v, D in ALL_CFGS:
            rep = check_dg_soundness(DiskConfig(1, u, v, D))
            if not rep.passed:
                st["failures"].append(((u, v, D), rep.witness))
        finish(st)


def test_criterion_2_cohomology_model():
    with criterion(2, 60, "dim H^n = C(v,n) in multidegree 0, other strata exact") as st:
        for u, v, D in ALL_CFGS:
            rep = check_cohomology(DiskConfig(1, u, v, D))
            if not rep.passed:
                st["failures"].append(((u, v, D), rep.witness))
        finish(st)


def test_criterion_3_module_hypotheses():
    with criterion(3, 120, "Omega free and H Koszul over A, N=4, D=3") as st:
        for u in (1, 2, 3):
            for v in range(u + 1):
                X = LogDeRham(DiskConfig(1, u, v, 3))
                A = X.exterior_A()
                T = tor_table(A, X.a_action("Omega", A=A), 4, 3)
                higher = [e for e in T.entries if e[0] > 0]
                if higher:
                    st["failures"].append(("Omega", (u, v), higher[:3]))
                if not is_koszul_module(A, X.a_action("H", A=A), 4, 3).passed:
                    st["failures"].append(("H", (u, v)))
        finish(st)


def test_criterion_4_main_results():
    with criterion(4, 600, "Z+ Koszul with shift 1, Z Koszul, diagonal hyper-Tor, u<=2, D<=3") as st:
        for u in (1, 2):
            for v in range(u + 1):
                for D in range(4):
                    X = LogDeRham(DiskConfig(1, u, v, D))
                    A = X.exterior_A()
                    if not is_koszul_algebra(X.closed_forms(), 4, D).passed:
                        st["failures"].append(("Z", (u, v, D)))
                    Zp = positive_part(X.a_action("Z", A=A))
                    if not is_koszul_module(A, Zp, 4, D, shift=1).passed:
                        st["failures"].append(("Z+", (u, v, D)))
                    if not hyper_tor_of_C(X, 4).passed:
                        st["failures"].append(("hyper-Tor", (u, v, D)))
        finish(st)


def test_criterion_5_tor_window_equivalence():
    with criterion(5, 120, "Tor window {i, i+1} <=> M+ Koszul with shift 1 on the module corpus") as st:
        count = 0
        for u, v in [(1, 1), (1, 0), (2, 1), (2, 2)]:
            X = LogDeRham(DiskConfig(1, u, v, 2))
            A = X.exterior_A()
            for M in module_corpus(X, A):
                count += 1
                rep = lemma_equivalence_check(A, M, 4, 2)
                if not rep.passed:
                    st["failures"].append(((u, v), M.name, rep.witness))
        L = exterior_algebra([(1,)])
        for M in [regular_module(L), trivial_module(L), trivial_module(L, degree=2)]:
            count += 1
            if not lemma_equivalence_check(L, M).passed:
                st["failures"].append(("Lambda(x)", M.name))
        if count < 10:
            st["failures"].append(("corpus too small", count))
        finish(st)


def test_criterion_6_quasi_layer():
    with criterion(6, 900, "quasi axioms, quasi Koszul, cobar, quadratic sequences, "
                   "distributivity n<=4, external-multiplication duality") as st:
        fails = st["failures"]
        graded = [exterior_algebra([(1,)]), exterior_algebra([(1, 0), (0, 1)]),
                  truncated_polynomial(3), quadratic_algebra(2, NK_RELATIONS, 5),
                  LogDeRham(DiskConfig(1, 1, 1, 2)).closed_forms()]
        for Z in graded:
            if not check_axioms(from_graded_algebra(Z, D=2 if Z.u else None), 4, 3).passed:
                fails.append(("from_graded axioms", Z.name))
        for u, v in [(1, 1), (2, 1)]:
            F = FormsQuasiAlgebra(DiskConfig(1, u, v, 2))
            tag = (u, v, 2)
            if not check_axioms(F, 4, 3).passed:
                fails.append(("axioms", tag))
            if not is_koszul_quasi(F, 4, 3).passed:
                fails.append(("quasi Koszul", tag))
            C = QuasiCoalgebra(F, 4)
            for name, rep in [("coalgebra axioms", check_coalgebra_axioms(C, 4, 3)),
                              ("cobar", is_koszul_quasi_coalgebra(C, 4, 3)),
                              ("quadratic sequences", quadratic_sequence_check(F, C, 4)),
                              ("extmult duality", external_mult_duality_check(F, C, 4, 3))]:
                if not rep.passed:
                    fails.append((name, tag))
            for n in (2, 3, 4):
                if not distributivity_criterion(C, n).passed:
                    fails.append(("distributivity", tag, n))
        finish(st)


def _trivial_unit_action(Z):
    k = exterior_algebra([])
    module = GradedModuleData(k, Z.space, lambda sA, sM: QMatrix.identity(Z.dim(sM)))
    T = from_graded_algebra(Z, name=Z.name)
    return T, TensorAction(k, T, module)


def test_criterion_7_module_criterion():
    with criterion(7, 900, "hypothesis and conclusion pass on forms, implication never violated, "
                   "mutations fail") as st:
        fails = st["failures"]
        corpus = []
        for u, v in [(1, 1), (2, 1)]:
            F = FormsQuasiAlgebra(DiskConfig(1, u, v, 2))
            act = FormsAction(F)
            res = theorem3(F, act)
            if not (res["hypothesis"].passed and res["conclusion"].passed):
                fails.append(("forms instance", (u, v)))
            corpus.append(res)
            if u == 2:
                # mutations, each of which must break the hypothesis
                bad_q, _ = corrupt_one_entry(F, (1, 1), 0)
                muts = [(bad_q, act), (F, DecoupledAction(act, 1)),
                        (F, flip_one_entry(act, (1, (0, 0)), (0, 1), ((0, 0), (1, 0)), 0)),
                        (F, flip_one_entry(act, (1, (0, 1)), (1, 1, 1), ((0, 0), (1, 1), (0, 0)), 0))]
                for Q, a in muts:
                    r = theorem3(Q, a)
                    corpus.append(r)
                    if r["hypothesis"].passed:
                        fails.append(("mutation passed", a.name, Q.name))
        L = exterior_algebra([(1,)])
        TL = from_graded_algebra(L)
        corpus.append(theorem3(TL, TensorAction(L, TL, regular_module(L))))
        corpus.append(theorem3(*_trivial_unit_action(quadratic_algebra(2, NK_RELATIONS, 5))))
        for res in corpus:
            if not res["implication_holds"]:
                fails.append(("implication violated", res["hypothesis"].name))
        finish(st)


def test_criterion_8_geometric_cross_validation():
    with criterion(8, 300, "vanishing pullbacks = H_top(E) = C dims; Kunneth m=2, u<=2, D<=2") as st:
        fails = st["failures"]
        for u, v in [(1, 1), (1, 0), (2, 1), (2, 2)]:
            F = FormsQuasiAlgebra(DiskConfig(1, u, v, 2))
            ok, rows = pullback_comparison(F)
            if not ok or not rows:
                fails.append(("pullback", (u, v)))
            if not poincare_with_parameters_check(F.X.cfg).passed:
                fails.append(("poincare", (u, v)))
        for u in (1, 2):
            for v in range(u + 1):
                for D in range(3):
                    for degs in product(range(u + 1), repeat=2):
                        if not kunneth_compare(DiskConfig(2, u, v, D), degs).passed:
                            fails.append(("kunneth", (u, v, D), degs))
        finish(st)


def test_criterion_9_negative_controls():
    with criterion(9, None, "x^3 witness (2,3), three lines non-distributive, 1 vs 8 workers identical") as st:
        fails = st["failures"]
        rep = is_koszul_algebra(truncated_polynomial(3), 4)
        if rep.passed or rep.witnesses[0][:2] != (2, 3):
            fails.append(("x^3", rep.witnesses[:1]))
        one = Fraction(1)
        lines = [Subspace(2, [{0: one}]), Subspace(2, [{1: one}]), Subspace(2, [{0: one, 1: one}])]
        ok, wit = is_distributive(lines)
        if ok or wit is None or len(wit) != 3:
            fails.append(("three lines", ok))
        # quasi-coalgebra level: the non-Koszul quadratic algebra, first visible at n = 4
        C = QuasiCoalgebra(from_graded_algebra(quadratic_algebra(2, NK_RELATIONS, 5)), 4)
        if distributivity_criterion(C, 4).passed:
            fails.append(("non-Koszul distributivity", 4))
        base = dict(u=2, v=1, D=2, N=4, m_max=3, scenario="full", output="json")
        c1, t1 = run(ScenarioConfig(jobs=1, **base))
        c8, t8 = run(ScenarioConfig(jobs=8, **base))
        if t1 != t8 or c1 != c8:
            fails.append(("determinism", c1, c8))
        finish(st)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
