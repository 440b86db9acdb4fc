"""
Left actions of a graded algebra A on a quasi-algebra, the complexes
E_{l_p..l_0; n_1..n_q}, the module-Koszulity hypothesis over l_0, and the
geometric model of their top homology as closed forms with vanishing
partial-diagonal pullbacks.

Parameters are written in the order the indices appear in the tuple:
``ls = (l_p, ..., l_1, l_0)`` occupies positions 0..p and A acts on
position p (the l_0 slot); the bar blocks for ``ns = (n_1, ..., n_q)``
follow.
"""

from fractions import Fraction
from itertools import product as iproduct

from .rlinalg import QMatrix, Subspace, rank, kernel_vectors
from .graded import GradedSpace, GradedModuleData, Report, validate_module, sadd
from .derham import (weight_vectors, wedge, diagonal_pullback, partial_d,
                     closed_subspace, stratum_monomials, vec_to_form)
from .koszul import is_koszul_module, is_koszul_algebra
from .quasi import (QuasiBarSlice, TensorQuasiAlgebra, is_koszul_quasi,
                    check_axioms, merged_index, merged_weights, wadd, tuples_up_to,
                    weight_splittings, block_weight_choices, QuasiCoalgebra)
from .parallel import pmap


def with_slot(idx, W, p, n, a):
    idx = idx[:p] + (idx[p] + n,) + idx[p + 1:]
    W = W[:p] + (wadd(W[p], a),) + W[p + 1:]
    return idx, W


class QuasiAction:
    """Maps A_s (x) Z_idx[W] -> Z_{idx + n at p}[W + a at p]; columns are
    indexed by i_A * dim(source) + j."""

    def __init__(self, A, Q, name="action"):
        self.A = A
        self.Q = Q
        self.name = name

    def act(self, sA, idx, W, p):
        raise NotImplementedError


class FormsAction(QuasiAction):
    """Wedge with f(a) pulled back to the factor at position p."""

    def __init__(self, F, A=None):
        if A is None:
            A = F.X.exterior_A(0)
        super().__init__(A, F, name="wedge f(a)")
        self._cache = {}

    def act(self, sA, idx, W, p):
        idx, W = tuple(idx), tuple(W)
        key = (sA, idx, W, p)
        m = self._cache.get(key)
        if m is not None:
            return m
        F, A = self.Q, self.A
        n, a = sA
        tidx, tW = with_slot(idx, W, p, n, a)
        src, tgt = F.dim(idx, W), F.dim(tidx, tW)
        dA = A.dim(sA)
        if not (src and tgt and dA):
            m = QMatrix.zeros(tgt, dA * src)
        else:
            zero = ((0,) * F.u, ())
            basis = F.basis_forms(idx, W)
            cols = []
            for I in A.subsets[sA]:
                fa = {tuple(((0,) * F.u, tuple(I)) if k == p else zero for k in range(len(idx))): Fraction(1)}
                for f in basis:
                    cols.append(F.coords(tidx, tW, wedge(fa, f)))
            m = QMatrix.from_columns(tgt, cols)
        self._cache[key] = m
        return m


class TensorAction(QuasiAction):
    """For Q = T(Z) and a left A-module structure on Z: a acts on the factor
    at position p with the Koszul sign (-1)^(deg a * (n_0 + ... + n_{p-1}))."""

    def __init__(self, A, T, module, name=None):
        super().__init__(A, T, name=name or "tensor action")
        self.module = module
        self._cache = {}

    def act(self, sA, idx, W, p):
        idx, W = tuple(idx), tuple(W)
        key = (sA, idx, W, p)
        if key in self._cache:
            return self._cache[key]
        T, A, Z = self.Q, self.A, self.Q.Z
        n, a = sA
        tidx, tW = with_slot(idx, W, p, n, a)
        src, tgt = T.dim(idx, W), T.dim(tidx, tW)
        dA = A.dim(sA)
        if not (src and tgt and dA):
            m = QMatrix.zeros(tgt, dA * src)
            self._cache[key] = m
            return m
        dims = [Z.dim((x, w)) for x, w in zip(idx, W)]
        left = 1
        for d in dims[:p]:
            left *= d
        right = 1
        for d in dims[p + 1:]:
            right *= d
        dp = dims[p]
        tp = Z.dim((tidx[p], tW[p]))
        sign = -1 if (n * sum(idx[:p])) & 1 else 1
        M = self.module.act(sA, (idx[p], W[p]))
        entries = []
        for r, c, v in M.triples():
            ia, j = divmod(c, dp)
            for L in range(left):
                for R in range(right):
                    col = ia * src + (L * dp + j) * right + R
                    row = (L * tp + r) * right + R
                    entries.append((row, col, sign * v))
        m = QMatrix(tgt, dA * src, entries)
        self._cache[key] = m
        return m


class PatchedAction(QuasiAction):
    """An action with selected matrices replaced; mutation tests."""

    def __init__(self, base, patches, name=None):
        super().__init__(base.A, base.Q, name=name or base.name + "*")
        self.base = base
        self.patches = dict(patches)

    def act(self, sA, idx, W, p):
        m = self.patches.get((sA, tuple(idx), tuple(W), p))
        return m if m is not None else self.base.act(sA, idx, W, p)


class DecoupledAction(QuasiAction):
    """Zero action of A_+ out of slot degree ``degree``."""

    def __init__(self, base, degree=1):
        super().__init__(base.A, base.Q, name=base.name + " decoupled at %d" % degree)
        self.base = base
        self.degree = degree

    def act(self, sA, idx, W, p):
        m = self.base.act(sA, idx, W, p)
        if sA[0] > 0 and idx[p] == self.degree:
            return QMatrix.zeros(*m.shape)
        return m


def flip_one_entry(action, sA, idx, W, p):
    m = action.act(sA, idx, W, p)
    trip = list(m.triples())
    if not trip:
        raise ValueError("action matrix is zero")
    r, c, v = trip[0]
    entries = [(r, c, -v)] + trip[1:]
    return PatchedAction(action, {(sA, tuple(idx), tuple(W), p): QMatrix(m.rows, m.cols, entries)},
                         name=action.name + " with one sign flipped")


def build_action(F, A=None, N=4, M=3, validate=True):
    """The wedge action on the forms quasi-algebra, optionally validated."""
    act = FormsAction(F, A)
    if validate:
        rep = check_action(act, N, M)
        if not rep.passed:
            raise ValueError("action axioms fail: %r" % (rep.witness,))
    return act


def check_action(action, N=4, M=3):
    """Unit, associativity and commutation with the merges at positions
    >= p, on tuples with entries >= 0, sum <= N, length <= M."""
    A, Q = action.A, action.Q
    counts = {}

    def bump(k):
        counts[k] = counts.get(k, 0) + 1

    def fail(law, **kw):
        return Report("action_axioms:%s" % action.name, False, {"checked": counts}, witness=dict(law=law, **kw))

    e = A.unit_stratum
    Apos = [s for s in A.strata() if s[0] > 0]
    for idx in tuples_up_to(N, M, positive=False, min_len=1):
        for W in sorted(Q.component(idx)):
            d = Q.dim(idx, W)
            for p in range(len(idx)):
                U = action.act(e, idx, W, p)
                cols = U.columns()
                sub = QMatrix.from_columns(d, [cols[A.unit_index * d + j] for j in range(d)])
                bump("unit")
                if sub != QMatrix.identity(d):
                    return fail("unit", tuple=list(idx), position=p)
                for s1 in Apos:
                    for s2 in Apos:
                        s12 = sadd(s1, s2)
                        if sum(idx) + s12[0] > N or A.dim(s12) == 0:
                            continue
                        i2, W2 = with_slot(idx, W, p, *s2)
                        lhs = action.act(s12, idx, W, p) @ A.mult(s1, s2).kron(QMatrix.identity(d))
                        rhs = action.act(s1, i2, W2, p) @ \
                            QMatrix.identity(A.dim(s1)).kron(action.act(s2, idx, W, p))
                        bump("associativity")
                        if lhs != rhs:
                            return fail("associativity", tuple=list(idx), position=p)
                for sA in Apos:
                    if sum(idx) + sA[0] > N:
                        continue
                    ti, tW = with_slot(idx, W, p, *sA)
                    for t in range(p, len(idx) - 1):
                        mi, mW = merged_index(idx, t), merged_weights(W, t)
                        lhs = Q.qmult(ti, t, tW) @ action.act(sA, idx, W, p)
                        rhs = action.act(sA, mi, mW, p) @ \
                            QMatrix.identity(A.dim(sA)).kron(Q.qmult(idx, t, W))
                        bump("merge_commutation")
                        if lhs != rhs:
                            return fail("merge_commutation", tuple=list(idx), position=p, merge=t)
    return Report("action_axioms:%s" % action.name, True, {"checked": counts})


# ---------------------------------------------------------------------------
# E-complexes

class EComplex:
    """E_{ls; ns} at prefix weights Wl and block weights bws."""

    def __init__(self, Q, ls, Wl, ns, bws, action=None):
        self.Q = Q
        self.ls = tuple(ls)
        self.Wl = tuple(tuple(w) for w in Wl)
        self.ns = tuple(ns)
        self.bws = tuple(tuple(b) for b in bws)
        self.action = action
        self.slice = QuasiBarSlice(Q, self.ns, self.bws, prefix=self.ls, prefix_W=self.Wl)

    @property
    def p(self):
        return len(self.ls) - 1

    def top_degree(self):
        return sum(self.ns)

    def homology_dims(self):
        return self.slice.homology_dims()

    def check_d_squared(self):
        return self.slice.check_d_squared()

    def top_cycles(self):
        return self.slice.top_cycles()

    def shifted(self, sA):
        n, a = sA
        ls = self.ls[:-1] + (self.ls[-1] + n,)
        Wl = self.Wl[:-1] + (wadd(self.Wl[-1], a),)
        return EComplex(self.Q, ls, Wl, self.ns, self.bws, self.action)

    def action_matrix(self, sA, i, target=None):
        """A_s (x) E_i -> E'_i with columns i_A * dim(E_i) + position."""
        target = target or self.shifted(sA)
        dA = self.action.A.dim(sA)
        src = self.slice
        tgt = target.slice
        di = src.dim(i)
        entries = []
        n, a = sA
        for idx, W, lens, d in src.terms.get(i, []):
            off = src.offsets[(idx, W)]
            ti, tW = with_slot(idx, W, self.p, n, a)
            toff = tgt.offsets.get((ti, tW))
            if toff is None:
                continue
            m = self.action.act(sA, idx, W, self.p)
            for r, c, v in m.triples():
                ia, j = divmod(c, d)
                entries.append((toff + r, ia * di + off + j, v))
        return QMatrix(tgt.dim(i), dA * di, entries)

    def check_action_chain_map(self, sA):
        tgt = self.shifted(sA)
        dA = self.action.A.dim(sA)
        for i in self.slice.degrees():
            if self.slice.dim(i - 1) == 0 and tgt.slice.dim(i - 1) == 0:
                continue
            lhs = (tgt.slice.diff(i) if tgt.slice.dim(i) and tgt.slice.dim(i - 1)
                   else QMatrix.zeros(tgt.slice.dim(i - 1), tgt.slice.dim(i))) @ self.action_matrix(sA, i, tgt)
            dsrc = self.slice.diff(i) if self.slice.dim(i - 1) else QMatrix.zeros(0, self.slice.dim(i))
            rhs = self.action_matrix(sA, i - 1, tgt) @ QMatrix.identity(dA).kron(dsrc)
            if lhs != rhs:
                return False
        return True


def e_complex(Q, action, ls, Wl, ns, bws):
    return EComplex(Q, ls, Wl, ns, bws, action)


def e_homology(Q, action, ls_fixed, Wl_fixed, ns, bws, max_l0, D):
    """The A-module  (+)_{1 <= l_0 <= max_l0} H_top(E_{ls_fixed, l_0; ns})
    with strata (l_0, w_0), |w_0| <= D.  Returns (module, concentration
    witnesses)."""
    A = action.A
    u = Q.u
    cyc = {}
    conc = []
    for l0 in range(1, max_l0 + 1):
        for w0 in weight_vectors(u, D):
            E = EComplex(Q, tuple(ls_fixed) + (l0,), tuple(Wl_fixed) + (w0,), ns, bws, action)
            if not E.slice.size:
                continue
            hom = E.homology_dims()
            for i, h in hom.items():
                if i != E.top_degree():
                    conc.append({"l0": l0, "w0": list(w0), "i": i, "dim": h})
            K = E.top_cycles()
            if K.dim:
                cyc[(l0, tuple(w0))] = (E, K)
    space = GradedSpace(u, {s: ["h%d" % k for k in range(K.dim)] for s, (E, K) in cyc.items()})

    def act(sA, sM):
        E, K = cyc[sM]
        tgt_s = sadd(sA, sM)
        dA = A.dim(sA)
        if tgt_s not in cyc:
            return QMatrix.zeros(0, dA * K.dim)
        Et, Kt = cyc[tgt_s]
        top = E.top_degree()
        big = E.action_matrix(sA, top, Et)
        di = E.slice.dim(top)
        cols = []
        for ia in range(dA):
            for row in K.rows:
                vec = {ia * di + j: x for j, x in row.items()}
                cols.append(Kt.coords_dict(big.apply(vec)))
        return QMatrix.from_columns(Kt.dim, cols)

    M = GradedModuleData(A, space, act, name="H_top(E[%s;%s])" % (
        ".".join(map(str, ls_fixed)) or "-", ".".join(map(str, ns)) or "-"))
    return M, conc


def hypothesis_items(Q, T=4, pmax=1, qmax=2, D=None):
    """Fixed parameters (l_p..l_1; Wl; n_1..n_q; bws), all indices >= 1,
    l-sum plus n-sum at most T - 1 (so that l_0 can range over 1..)."""
    D = Q.D if D is None else D
    u = Q.u
    ws = weight_vectors(u, D)
    items = []
    for p in range(pmax + 1):
        for q in range(qmax + 1):
            for ls in tuples_up_to(T - 1, p, positive=True, min_len=p):
                if len(ls) != p:
                    continue
                rest = T - 1 - sum(ls)
                for ns in tuples_up_to(rest, q, positive=True, min_len=q):
                    if len(ns) != q or sum(ls) + sum(ns) > T - 1:
                        continue
                    for Wl in iproduct(*[[w for w in ws if Q.dim((l,), (w,))] for l in ls]):
                        for bws in block_weight_choices(u, D, ns):
                            items.append((tuple(ls), tuple(Wl), tuple(ns), tuple(bws)))
    return items


def _hyp_item(ctx, item):
    Q, action, A, T, D = ctx
    ls, Wl, ns, bws = item
    max_l0 = T - sum(ls) - sum(ns)
    M, conc = e_homology(Q, action, ls, Wl, ns, bws, max_l0, D)
    try:
        valid = validate_module(M).passed
        if not M.strata():
            return item, True, None, conc, valid, 0
        rep = is_koszul_module(A, M, N=max_l0, D=D, shift=1)
    except ValueError:
        # the action does not carry top cycles to top cycles
        return item, False, None, conc, False, M.space.total_dim()
    return item, rep.passed, rep, conc, valid, M.space.total_dim()


def item_json(item):
    ls, Wl, ns, bws = item
    return {"l": ".".join(map(str, ls)), "l_weights": [list(w) for w in Wl],
            "n": ".".join(map(str, ns)), "block_weights": [list(b) for b in bws]}


def theorem3_hypothesis_check(Q, action, T=4, pmax=1, qmax=2, D=None, N_axioms=None, M_axioms=3,
                              jobs=None):
    """Module-Koszulity hypothesis with shift 1 over l_0 for every fixed
    parameter tuple within bounds.  Also requires the quasi-algebra axioms
    and the action axioms (the statement presupposes them), and records
    whether every E-complex has homology only in its top degree."""
    D = Q.D if D is None else D
    A = action.A
    N_axioms = T if N_axioms is None else N_axioms
    ax = check_axioms(Q, N_axioms, M_axioms)
    acts = check_action(action, N_axioms, M_axioms)
    items = hypothesis_items(Q, T, pmax, qmax, D)
    results = pmap(_hyp_item, (Q, action, A, T, D), items, jobs)
    failures = []
    invalid = []
    conc_all = []
    tables = []
    for item, ok, rep, conc, valid, dim in results:
        if conc:
            conc_all.append((item, conc))
        if not valid:
            invalid.append(item)
        if not ok and rep is not None:
            failures.append((item, rep))
        if rep is not None:
            tables.append((item, rep))
    passed = ax.passed and acts.passed and not failures and not invalid
    details = {"items": len(items), "bounds": {"T": T, "p_max": pmax, "q_max": qmax, "D": D},
               "quasi_axioms": ax.passed, "action_axioms": acts.passed,
               "modules_invalid": len(invalid), "modules_failing": len(failures),
               "e_concentrated": not conc_all}
    witness = None
    if not ax.passed:
        witness = {"quasi_axioms": ax.witness}
    elif not acts.passed:
        witness = {"action_axioms": acts.witness}
    elif invalid:
        witness = {"invalid_module": item_json(invalid[0])}
    elif failures:
        item, rep = failures[0]
        witness = {"params": item_json(item),
                   "tor": [{"i": i, "j": j, "a": list(a), "dim": d} for i, j, a, d in rep.witnesses[:5]]}
    out = Report("theorem3_hypothesis:%s" % Q.name, passed, details, witness=witness)
    out.tables = tables
    out.failures = failures
    return out


def theorem3_conclusion_check(Q, N=4, M=3, D=None, jobs=None):
    return is_koszul_quasi(Q, N, M, D, jobs)


def theorem3(Q, action, T=4, pmax=1, qmax=2, D=None, M=3, jobs=None):
    """Hypothesis, Koszulity of A, conclusion, and the implication between
    them.  ``implication_holds`` is False only if the hypothesis and A's
    Koszulity pass while the conclusion fails."""
    D = Q.D if D is None else D
    hyp = theorem3_hypothesis_check(Q, action, T, pmax, qmax, D, M_axioms=M, jobs=jobs)
    a_rep = is_koszul_algebra(action.A, T, D)
    concl = theorem3_conclusion_check(Q, T, M, D, jobs)
    implication = not (hyp.passed and a_rep.passed and not concl.passed)
    return {"hypothesis": hyp, "A_koszul": a_rep, "conclusion": concl, "implication_holds": implication}


def theorem3_json(res, pullback=None):
    hyp = res["hypothesis"]
    out = {"params": hyp.details["bounds"],
           "hypothesis": {"verdict": "pass" if hyp.passed else "fail", "details": hyp.details,
                          "witness": hyp.witness,
                          "failing_tables": [{"params": item_json(item), "table": rep.table.to_json()}
                                             for item, rep in hyp.failures[:3]]},
           "A_koszul": res["A_koszul"].passed,
           "conclusion": res["conclusion"].to_json(),
           "implication_holds": res["implication_holds"]}
    if pullback is not None:
        out["pullback_model"] = pullback
    return out


# ---------------------------------------------------------------------------
# vanishing-pullback model

def _closed_forms_at(u, v, degs, W):
    basis, S = closed_subspace(u, v, degs, W)
    return [vec_to_form(r, basis) for r in S.rows]


def in_block_diagonals(ls, ns):
    """Merge positions inside each bar block, shifted past the l slots."""
    out = []
    g = len(ls)
    for n in ns:
        out.extend(range(g, g + n - 1))
        g += n
    return out


def vanishing_pullback_space(cfg, ls, Wl, ns, bws):
    """Closed forms on D^(len(ls) + sum(ns)) of degrees ls then 1 on each
    remaining factor, with prescribed weights on the l factors and block
    weights ``bws`` split arbitrarily inside each block, whose pullback
    along every partial diagonal inside a block vanishes.  Untruncated
    pullbacks.  Returns (dim, forms)."""
    u, v = cfg.u, cfg.v
    ls, ns = tuple(ls), tuple(ns)
    degs = ls + (1,) * sum(ns)
    splits = [list(weight_splittings(b, n)) for n, b in zip(ns, bws)]
    forms = []
    for choice in iproduct(*splits):
        W = tuple(Wl) + tuple(w for part in choice for w in part)
        forms.extend(_closed_forms_at(u, v, degs, W))
    if not forms:
        return 0, []
    diags = in_block_diagonals(ls, ns)
    if not diags:
        return len(forms), forms
    index = {}
    cols = []
    for f in forms:
        col = {}
        for t in diags:
            for mono, c in diagonal_pullback(f, t, v).items():
                k = index.setdefault((t, mono), len(index))
                col[k] = c
        cols.append(col)
    P = QMatrix.from_columns(len(index), cols)
    if P.rows == 0:
        return len(forms), forms
    vecs, r = kernel_vectors(P)
    out = []
    for vec in vecs:
        g = {}
        for k, x in vec.items():
            for mono, c in forms[k].items():
                g[mono] = g.get(mono, 0) + x * c
        out.append({m: c for m, c in g.items() if c})
    return len(vecs), out


def pullback_comparison(F, ls_items=None, T=4, pmax=1, qmax=2, include_coalgebra=True):
    """dim of the vanishing-pullback space vs dim H_top(E) (and dim C_ns of
    the dual quasi-coalgebra for the l-free case), on every parameter tuple
    whose block weights respect the bound.  Returns (ok, rows)."""
    cfg = F.cfg
    u, D = F.u, F.D
    rows = []
    ok = True
    items = []
    for p in range(0, pmax + 2):
        for q in range(1, qmax + 1):
            for ls in tuples_up_to(T, p, positive=True, min_len=p):
                if len(ls) != p:
                    continue
                for ns in tuples_up_to(T - sum(ls), q, positive=True, min_len=q):
                    if len(ns) != q:
                        continue
                    for Wl in iproduct(*[[w for w in weight_vectors(u, D) if F.dim((l,), (w,))] for l in ls]):
                        for bws in block_weight_choices(u, D, ns):
                            items.append((ls, Wl, ns, bws))
    C = QuasiCoalgebra(F, T) if include_coalgebra else None
    for ls, Wl, ns, bws in items:
        geo, _ = vanishing_pullback_space(cfg, ls, Wl, ns, bws)
        E = EComplex(F, ls, Wl, ns, bws)
        alg = E.top_cycles().dim if E.slice.size else 0
        row = {"params": item_json((ls, Wl, ns, bws)), "pullback_dim": geo, "e_homology_dim": alg}
        if C is not None and not ls:
            cdim = C.dim(ns, tuple(bws))
            row["coalgebra_dim"] = cdim
            if cdim != geo:
                ok = False
        if geo != alg:
            ok = False
        rows.append(row)
    return ok, rows


def poincare_with_parameters(cfg, ls_other, Wl_other, ns, bws, w_p):
    """Cohomology dims of the complex, in the degree of the acting factor,
    of forms closed in every other factor and with vanishing in-block
    pullbacks, at acting-factor weight w_p.  The acting factor sits after
    the l factors ``ls_other``."""
    u, v = cfg.u, cfg.v
    ls_other, ns = tuple(ls_other), tuple(ns)
    p = len(ls_other)
    splits = [list(weight_splittings(b, n)) for n, b in zip(ns, bws)]
    Ws = [tuple(Wl_other) + (tuple(w_p),) + tuple(w for part in ch for w in part)
          for ch in iproduct(*splits)]
    diags = in_block_diagonals(ls_other + (0,), ns)
    spaces = {}
    for l0 in range(u + 1):
        degs = ls_other + (l0,) + (1,) * sum(ns)
        monos = []
        for W in Ws:
            monos.extend(stratum_monomials(u, v, degs, W))
        index = {m: i for i, m in enumerate(monos)}
        cindex = {}
        cols = []
        for m in monos:
            col = {}
            f = {m: Fraction(1)}
            for t in range(len(degs)):
                if t == p:
                    continue
                for mm, c in partial_d(f, v, t).items():
                    col[cindex.setdefault(("d", t, mm), len(cindex))] = c
            for t in diags:
                for mm, c in diagonal_pullback(f, t, v).items():
                    col[cindex.setdefault(("D", t, mm), len(cindex))] = c
            cols.append(col)
        if not monos:
            spaces[l0] = (index, Subspace.zero(0))
            continue
        P = QMatrix.from_columns(len(cindex), cols)
        if P.rows:
            vecs, _ = kernel_vectors(P)
            S = Subspace(len(monos), vecs)
        else:
            S = Subspace.full(len(monos))
        spaces[l0] = (index, S)
    ranks = {}
    for l0 in range(u):
        idx0, S0 = spaces[l0]
        idx1, S1 = spaces[l0 + 1]
        if not S0.dim or not idx1:
            ranks[l0] = 0
            continue
        mlist = sorted(idx0, key=idx0.get)
        cols = []
        for row in S0.rows:
            f = {mlist[k]: c for k, c in row.items()}
            img = partial_d(f, v, p)
            cols.append({idx1[m]: c for m, c in img.items()})
        ranks[l0] = rank(QMatrix.from_columns(len(idx1), cols))
    out = {}
    for l0 in range(u + 1):
        h = spaces[l0][1].dim - ranks.get(l0, 0) - ranks.get(l0 - 1, 0)
        if h:
            out[l0] = h
    return out


def poincare_with_parameters_check(cfg, T=4, pmax=1, qmax=2):
    """Exactness when the acting-factor weight is nonzero, over parameter
    tuples within bounds."""
    u, D = cfg.u, cfg.D
    checked = 0
    for p in range(pmax + 1):
        for q in range(qmax + 1):
            for ls in tuples_up_to(T - 1, p, positive=True, min_len=p):
                if len(ls) != p:
                    continue
                for ns in tuples_up_to(T - 1 - sum(ls), q, positive=True, min_len=q):
                    if len(ns) != q:
                        continue
                    for Wl in iproduct(*[weight_vectors(u, D) for _ in ls]):
                        for bws in block_weight_choices(u, D, ns):
                            for w_p in weight_vectors(u, D):
                                if not any(w_p):
                                    continue
                                coh = poincare_with_parameters(cfg, ls, Wl, ns, bws, w_p)
                                checked += 1
                                if coh:
                                    return Report("poincare_with_parameters", False, {"checked": checked},
                                                  witness={"params": item_json((ls, Wl, ns, bws)),
                                                           "w_p": list(w_p), "cohomology": coh})
    return Report("poincare_with_parameters", True, {"checked": checked})


def diagonal_vs_tensor_merge(F, N=4, M=3):
    """Merges by diagonal pullback agree entrywise with the tensor-model
    merges of the one-factor closed-forms algebra."""
    T = TensorQuasiAlgebra(F.X.closed_forms(), F.D)
    checked = 0
    for idx in tuples_up_to(N, M, positive=False, min_len=2):
        if T.component(idx) != F.component(idx):
            return Report("diagonal_vs_tensor", False, witness={"tuple": list(idx), "reason": "dims"})
        for W in sorted(F.component(idx)):
            for t in range(len(idx) - 1):
                checked += 1
                if F.qmult(idx, t, W) != T.qmult(idx, t, W):
                    return Report("diagonal_vs_tensor", False,
                                  witness={"tuple": list(idx), "position": t, "weights": [list(w) for w in W]})
    return Report("diagonal_vs_tensor", True, {"maps_checked": checked})
