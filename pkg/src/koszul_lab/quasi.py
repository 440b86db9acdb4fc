"""
Quasi-algebras: families of spaces Z_{n_1..n_m} with merge maps
(quasi-multiplications), zero-insertion maps (quasi-units) and
concatenation maps (external multiplications).

Components are split into strata keyed by the tuple of per-position
multidegrees ``W = (w_1, ..., w_m)``; every map is homogeneous, merges add
the two merged weights and insertions add a zero weight.  Positions are
0-based: ``qmult(idx, t, W)`` merges positions t and t+1, ``qunit(idx, p, W)``
inserts a 0 so that it lands at position p.

Two concrete models: ``TensorQuasiAlgebra`` (tensor powers of a graded
algebra) and ``FormsQuasiAlgebra`` (closed log forms on D^m, with merges by
diagonal pullback).
"""

from fractions import Fraction
from itertools import product as iproduct

from .rlinalg import QMatrix, Subspace, rank, kernel_vectors, hstack, is_distributive
from .graded import Report
from .derham import (LogDeRham, DiskConfig, weight_vectors, diagonal_pullback,
                     projection_pullback, external_product)
from .koszul import KoszulReport, is_koszul_algebra
from .parallel import pmap


def wadd(w1, w2):
    return tuple(x + y for x, y in zip(w1, w2))


def merged_index(idx, t):
    return idx[:t] + (idx[t] + idx[t + 1],) + idx[t + 2:]


def merged_weights(W, t):
    return W[:t] + (wadd(W[t], W[t + 1]),) + W[t + 2:]


def inserted(idx, p, value):
    return idx[:p] + (value,) + idx[p:]


def compositions(n):
    """Ordered compositions of n into positive parts."""
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in compositions(n - first):
            yield (first,) + rest


def weight_splittings(b, k):
    """Ordered k-tuples of weight vectors summing to b."""
    if k == 0:
        if not any(b):
            yield ()
        return
    if k == 1:
        yield (tuple(b),)
        return
    ranges = [range(x + 1) for x in b]
    for first in iproduct(*ranges):
        rest = tuple(x - y for x, y in zip(b, first))
        for tail in weight_splittings(rest, k - 1):
            yield (first,) + tail


def tuples_up_to(N, M, positive=True, min_len=1):
    """Index tuples with sum <= N and length in [min_len, M]."""
    out = []
    lo = 1 if positive else 0

    def rec(prefix, left):
        if len(prefix) >= min_len:
            out.append(prefix)
        if len(prefix) == M:
            return
        for x in range(lo, left + 1):
            rec(prefix + (x,), left - x)

    rec((), N)
    return [t for t in out if len(t) >= min_len]


class QuasiAlgebra:
    """Interface shared by the concrete quasi-algebras."""

    name = "quasi"
    has_extmult = True

    def __init__(self, u, D):
        self.u = u
        self.D = D
        self._comp = {}

    @property
    def zero_weight(self):
        return (0,) * self.u

    def component(self, idx):
        """{W: dim} over non-empty strata of Z_idx."""
        idx = tuple(idx)
        c = self._comp.get(idx)
        if c is None:
            c = self._comp[idx] = self._component(idx)
        return c

    def dim(self, idx, W):
        return self.component(idx).get(tuple(W), 0)

    def total_dim(self, idx):
        return sum(self.component(idx).values())

    def qmult(self, idx, t, W):
        raise NotImplementedError

    def qunit(self, idx, p, W):
        raise NotImplementedError

    def extmult(self, idx1, idx2, W1, W2):
        raise NotImplementedError


class TensorQuasiAlgebra(QuasiAlgebra):
    """Z_{n_1..n_m} = Z_{n_1} (x) ... (x) Z_{n_m} for a graded algebra Z whose
    strata are (n, w).  Basis index is mixed radix over the factors."""

    def __init__(self, Z, D=None, name=None):
        if not Z.is_connected():
            raise ValueError("from_graded_algebra needs Z_0 = k")
        if D is None:
            D = max((sum(w) for _, w in Z.strata()), default=0)
        super().__init__(Z.u, D)
        self.Z = Z
        self.name = name or "T(%s)" % Z.name
        self._by_degree = {}
        for n, w in Z.strata():
            self._by_degree.setdefault(n, []).append(w)

    def _component(self, idx):
        lists = [self._by_degree.get(n, []) for n in idx]
        out = {}
        for W in iproduct(*lists):
            d = 1
            for n, w in zip(idx, W):
                d *= self.Z.dim((n, w))
            out[tuple(W)] = d
        if not idx:
            out = {(): 1}
        return out

    def _dims(self, idx, W):
        return [self.Z.dim((n, w)) for n, w in zip(idx, W)]

    def qmult(self, idx, t, W):
        idx, W = tuple(idx), tuple(W)
        dims = self._dims(idx, W)
        src = self.dim(idx, W)
        tgt = self.dim(merged_index(idx, t), merged_weights(W, t))
        if tgt == 0 or src == 0:
            return QMatrix.zeros(tgt, src)
        left = 1
        for d in dims[:t]:
            left *= d
        right = 1
        for d in dims[t + 2:]:
            right *= d
        m = self.Z.mult((idx[t], W[t]), (idx[t + 1], W[t + 1]))
        return QMatrix.identity(left).kron(m).kron(QMatrix.identity(right))

    def qunit(self, idx, p, W):
        d = self.dim(idx, W)
        return QMatrix.identity(d)

    def extmult(self, idx1, idx2, W1, W2):
        return QMatrix.identity(self.dim(idx1, W1) * self.dim(idx2, W2))


def from_graded_algebra(Z, D=None, name=None):
    return TensorQuasiAlgebra(Z, D, name=name)


class FormsQuasiAlgebra(QuasiAlgebra):
    """Closed log forms on D^m with per-factor weight bound D.

    The basis of each stratum is the Kunneth product basis built from the
    per-factor closed-form bases; coordinates of a closed form are read at
    the products of per-factor pivot monomials.  Merges are diagonal
    pullbacks followed by truncation of weights above D, quasi-units are
    pullbacks along projections, external products are products of forms.
    """

    def __init__(self, cfg, name=None):
        super().__init__(cfg.u, cfg.D)
        self.cfg = cfg
        self.name = name or "Forms(u=%d,v=%d,D=%d)" % (cfg.u, cfg.v, cfg.D)
        self.X = LogDeRham(DiskConfig(1, cfg.u, cfg.v, cfg.D))
        self._factor = {}
        self._by_degree = {}
        for s in self.X.strata():
            Zs = self.X.Z_subspace(s)
            if Zs.dim:
                n, w = s
                forms = [self.X.form(s, r) for r in Zs.rows]
                # 1-factor monomial entries
                forms = [{mono[0]: c for mono, c in f.items()} for f in forms]
                piv = {self.X.monomials(s)[p][0]: i for i, p in enumerate(Zs.pivots)}
                self._factor[(n, w)] = (forms, piv)
                self._by_degree.setdefault(n, []).append(w)
        self._basis = {}

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg)

    def _component(self, idx):
        if not idx:
            return {(): 1}
        lists = [self._by_degree.get(n, []) for n in idx]
        out = {}
        for W in iproduct(*lists):
            d = 1
            for n, w in zip(idx, W):
                d *= len(self._factor[(n, w)][0])
            out[tuple(W)] = d
        return out

    def basis_forms(self, idx, W):
        key = (tuple(idx), tuple(W))
        b = self._basis.get(key)
        if b is None:
            lists = [self._factor[(n, w)][0] for n, w in zip(idx, W)]
            b = []
            for combo in iproduct(*lists):
                f = {(): Fraction(1)}
                for g in combo:
                    f = external_product(f, {(e,): c for e, c in g.items()})
                b.append(f)
            self._basis[key] = b
        return b

    def coords(self, idx, W, form):
        pivs = [self._factor[(n, w)][1] for n, w in zip(idx, W)]
        dims = [len(self._factor[(n, w)][0]) for n, w in zip(idx, W)]
        out = {}
        for mono, c in form.items():
            pos = 0
            for entry, piv, d in zip(mono, pivs, dims):
                k = piv.get(entry)
                if k is None:
                    break
                pos = pos * d + k
            else:
                out[pos] = c
        return out

    def _map(self, idx, W, tidx, tW, fn):
        src = self.dim(idx, W)
        tgt = self.dim(tidx, tW)
        if src == 0 or tgt == 0:
            return QMatrix.zeros(tgt, src)
        cols = [self.coords(tidx, tW, fn(f)) for f in self.basis_forms(idx, W)]
        return QMatrix.from_columns(tgt, cols)

    def qmult(self, idx, t, W):
        idx, W = tuple(idx), tuple(W)
        v, D = self.cfg.v, self.cfg.D
        return self._map(idx, W, merged_index(idx, t), merged_weights(W, t),
                         lambda f: diagonal_pullback(f, t, v, D, truncate=True))

    def qunit(self, idx, p, W):
        idx, W = tuple(idx), tuple(W)
        return self._map(idx, W, inserted(idx, p, 0), inserted(W, p, self.zero_weight),
                         lambda f: projection_pullback(f, p, self.u))

    def extmult(self, idx1, idx2, W1, W2):
        idx1, idx2, W1, W2 = tuple(idx1), tuple(idx2), tuple(W1), tuple(W2)
        tidx, tW = idx1 + idx2, W1 + W2
        tgt = self.dim(tidx, tW)
        d1 = self.dim(idx1, W1)
        d2 = self.dim(idx2, W2)
        if not (d1 and d2 and tgt):
            return QMatrix.zeros(tgt, d1 * d2)
        B1 = self.basis_forms(idx1, W1) if idx1 else [{(): Fraction(1)}]
        B2 = self.basis_forms(idx2, W2) if idx2 else [{(): Fraction(1)}]
        cols = []
        for f in B1:
            for g in B2:
                cols.append(self.coords(tidx, tW, external_product(f, g)))
        return QMatrix.from_columns(tgt, cols)

    def is_in_span(self, idx, W, form):
        """Exact membership test of a form in the product basis span."""
        c = self.coords(idx, W, form)
        recon = {}
        for k, x in c.items():
            for mono, y in self.basis_forms(idx, W)[k].items():
                recon[mono] = recon.get(mono, 0) + x * y
        recon = {m: y for m, y in recon.items() if y}
        return recon == {m: y for m, y in form.items() if y}


class PatchedQuasiAlgebra(QuasiAlgebra):
    """Wraps a quasi-algebra and replaces selected qmult matrices; used for
    mutation tests."""

    def __init__(self, base, patches, name=None):
        super().__init__(base.u, base.D)
        self.base = base
        self.patches = {(tuple(i), t, tuple(W)): m for (i, t, W), m in patches.items()}
        self.name = name or base.name + "*"

    def _component(self, idx):
        return self.base.component(idx)

    def qmult(self, idx, t, W):
        m = self.patches.get((tuple(idx), t, tuple(W)))
        return m if m is not None else self.base.qmult(idx, t, W)

    def qunit(self, idx, p, W):
        return self.base.qunit(idx, p, W)

    def extmult(self, idx1, idx2, W1, W2):
        return self.base.extmult(idx1, idx2, W1, W2)


def corrupt_one_entry(Q, idx, t, W=None):
    """Copy of Q with one entry of qmult(idx, t, W) negated (or set to 1 if
    the map is zero)."""
    idx = tuple(idx)
    if W is None:
        for W0 in sorted(Q.component(idx)):
            if not Q.qmult(idx, t, W0).is_zero():
                W = W0
                break
    if W is None:
        raise ValueError("no nonzero merge map to corrupt")
    m = Q.qmult(idx, t, W)
    r, c, v = next(iter(m.triples()))
    entries = [(r2, c2, -v2 if (r2, c2) == (r, c) else v2) for r2, c2, v2 in m.triples()]
    return PatchedQuasiAlgebra(Q, {(idx, t, W): QMatrix(m.rows, m.cols, entries)}), (idx, t, W)


class DirectSumQuasi(QuasiAlgebra):
    """Componentwise direct sum of two quasi-algebras on positive tuples;
    used to test additivity of the bar construction."""

    has_extmult = False

    def __init__(self, Q1, Q2):
        super().__init__(Q1.u, Q1.D)
        self.Q1, self.Q2 = Q1, Q2
        self.name = "%s+%s" % (Q1.name, Q2.name)

    def _component(self, idx):
        out = dict(self.Q1.component(idx))
        for W, d in self.Q2.component(idx).items():
            out[W] = out.get(W, 0) + d
        return out

    def _blockdiag(self, m1, m2):
        entries = list(m1.triples()) + [(r + m1.rows, c + m1.cols, v) for r, c, v in m2.triples()]
        return QMatrix(m1.rows + m2.rows, m1.cols + m2.cols, entries)

    def qmult(self, idx, t, W):
        return self._blockdiag(self.Q1.qmult(idx, t, W), self.Q2.qmult(idx, t, W))

    def qunit(self, idx, p, W):
        return self._blockdiag(self.Q1.qunit(idx, p, W), self.Q2.qunit(idx, p, W))


# ---------------------------------------------------------------------------
# axioms

def _stratum_list(Q, idx):
    return sorted(Q.component(idx))


def _first_bad_column(m1, m2):
    for r, c, v in (m1 - m2).triples():
        return c
    return None


def check_axioms(Q, N=4, M=3, extmult=True):
    """Every coincidence law on tuples (entries >= 0) with sum <= N and
    length <= M, as exact matrix identities."""
    counts = {}

    def fail(law, idx, W, extra=None):
        w = {"law": law, "tuple": list(idx), "weights": [list(x) for x in W]}
        if extra:
            w.update(extra)
        return Report("quasi_axioms:%s" % Q.name, False, {"checked": counts}, witness=w)

    def bump(law):
        counts[law] = counts.get(law, 0) + 1

    if Q.component(()) != {(): 1}:
        return fail("empty component is k", (), ())
    for idx in tuples_up_to(N, M, positive=False, min_len=1):
        m = len(idx)
        for W in _stratum_list(Q, idx):
            d = Q.dim(idx, W)
            # disjoint merges commute
            for s in range(m - 1):
                for t in range(s + 2, m - 1):
                    a = Q.qmult(merged_index(idx, s), t - 1, merged_weights(W, s)) @ Q.qmult(idx, s, W)
                    b = Q.qmult(merged_index(idx, t), s, merged_weights(W, t)) @ Q.qmult(idx, t, W)
                    bump("disjoint_merges")
                    if a != b:
                        return fail("disjoint_merges", idx, W, {"positions": [s, t]})
            # associativity of adjacent merges
            for t in range(1, m - 1):
                a = Q.qmult(merged_index(idx, t - 1), t - 1, merged_weights(W, t - 1)) @ Q.qmult(idx, t - 1, W)
                b = Q.qmult(merged_index(idx, t), t - 1, merged_weights(W, t)) @ Q.qmult(idx, t, W)
                bump("associativity")
                if a != b:
                    return fail("associativity", idx, W, {"positions": [t - 1, t, t + 1]})
            z = Q.zero_weight
            for p in range(m + 1):
                ins = inserted(idx, p, 0)
                insW = inserted(W, p, z)
                U = Q.qunit(idx, p, W)
                if U.shape != (Q.dim(ins, insW), d):
                    return fail("qunit_shape", idx, W, {"position": p})
                # positivity: quasi-units are isomorphisms
                bump("positivity")
                if U.rows != U.cols or rank(U) != d:
                    return fail("positivity", idx, W, {"position": p})
                # unit laws
                if p >= 1:
                    bump("left_unit")
                    if Q.qmult(ins, p - 1, insW) @ U != QMatrix.identity(d):
                        return fail("unit_merge_left", idx, W, {"position": p})
                if p <= m - 1:
                    bump("right_unit")
                    if Q.qmult(ins, p, insW) @ U != QMatrix.identity(d):
                        return fail("unit_merge_right", idx, W, {"position": p})
                # naturality against merges not touching the inserted 0
                for t in range(m - 1):
                    if p <= t:
                        a = Q.qmult(ins, t + 1, insW) @ U
                        b = Q.qunit(merged_index(idx, t), p, merged_weights(W, t)) @ Q.qmult(idx, t, W)
                    elif p >= t + 2:
                        a = Q.qmult(ins, t, insW) @ U
                        b = Q.qunit(merged_index(idx, t), p - 1, merged_weights(W, t)) @ Q.qmult(idx, t, W)
                    else:
                        continue
                    bump("qunit_naturality")
                    if a != b:
                        return fail("qunit_naturality", idx, W, {"insert": p, "merge": t})
    if extmult and Q.has_extmult:
        rep = check_extmult_axioms(Q, N, M)
        for k, v in rep.details.get("checked", {}).items():
            counts[k] = v
        if not rep.passed:
            return Report("quasi_axioms:%s" % Q.name, False, {"checked": counts}, witness=rep.witness)
    return Report("quasi_axioms:%s" % Q.name, True, {"checked": counts, "bounds": {"N": N, "M": M}})


def check_extmult_axioms(Q, N=4, M=3):
    """External multiplications: unit compatibility with Z_() = k,
    commutation with merges and quasi-units on either side, associativity
    across three blocks."""
    counts = {}

    def bump(law):
        counts[law] = counts.get(law, 0) + 1

    def fail(law, **kw):
        return Report("extmult_axioms", False, {"checked": counts}, witness=dict(law=law, **kw))

    tuples = tuples_up_to(N, M, positive=False, min_len=1)
    for idx in tuples:
        for W in _stratum_list(Q, idx):
            d = Q.dim(idx, W)
            bump("unit")
            if Q.extmult((), idx, (), W) != QMatrix.identity(d) or Q.extmult(idx, (), W, ()) != QMatrix.identity(d):
                return fail("extmult_unit", tuple=list(idx))
    for idx1 in tuples:
        for idx2 in tuples:
            if len(idx1) + len(idx2) > M or sum(idx1) + sum(idx2) > N:
                continue
            idx = idx1 + idx2
            m1 = len(idx1)
            for W1 in _stratum_list(Q, idx1):
                for W2 in _stratum_list(Q, idx2):
                    W = W1 + W2
                    E = Q.extmult(idx1, idx2, W1, W2)
                    d1, d2 = Q.dim(idx1, W1), Q.dim(idx2, W2)
                    for t in range(len(idx) - 1):
                        if t == m1 - 1:
                            continue
                        lhs = Q.qmult(idx, t, W) @ E
                        if t < m1 - 1:
                            rhs = Q.extmult(merged_index(idx1, t), idx2, merged_weights(W1, t), W2) @ \
                                Q.qmult(idx1, t, W1).kron(QMatrix.identity(d2))
                        else:
                            t2 = t - m1
                            rhs = Q.extmult(idx1, merged_index(idx2, t2), W1, merged_weights(W2, t2)) @ \
                                QMatrix.identity(d1).kron(Q.qmult(idx2, t2, W2))
                        bump("extmult_merge")
                        if lhs != rhs:
                            return fail("extmult_merge", tuple1=list(idx1), tuple2=list(idx2), position=t)
                    for p in range(len(idx) + 1):
                        if p == m1:
                            continue
                        z = Q.zero_weight
                        lhs = Q.qunit(idx, p, W) @ E
                        if p < m1:
                            rhs = Q.extmult(inserted(idx1, p, 0), idx2, inserted(W1, p, z), W2) @ \
                                Q.qunit(idx1, p, W1).kron(QMatrix.identity(d2))
                        else:
                            rhs = Q.extmult(idx1, inserted(idx2, p - m1, 0), W1, inserted(W2, p - m1, z)) @ \
                                QMatrix.identity(d1).kron(Q.qunit(idx2, p - m1, W2))
                        bump("extmult_qunit")
                        if lhs != rhs:
                            return fail("extmult_qunit", tuple1=list(idx1), tuple2=list(idx2), position=p)
    # associativity over three blocks
    small = [t for t in tuples if len(t) == 1]
    for i1 in small:
        for i2 in small:
            for i3 in small:
                if sum(i1 + i2 + i3) > N or M < 3:
                    continue
                for W1 in _stratum_list(Q, i1):
                    for W2 in _stratum_list(Q, i2):
                        for W3 in _stratum_list(Q, i3):
                            d1, d2, d3 = Q.dim(i1, W1), Q.dim(i2, W2), Q.dim(i3, W3)
                            a = Q.extmult(i1 + i2, i3, W1 + W2, W3) @ \
                                Q.extmult(i1, i2, W1, W2).kron(QMatrix.identity(d3))
                            b = Q.extmult(i1, i2 + i3, W1, W2 + W3) @ \
                                QMatrix.identity(d1).kron(Q.extmult(i2, i3, W2, W3))
                            bump("extmult_associativity")
                            if a != b:
                                return fail("extmult_associativity", tuples=[list(i1), list(i2), list(i3)])
    return Report("extmult_axioms", True, {"checked": counts})


# ---------------------------------------------------------------------------
# bar complexes of quasi-algebras

class QuasiBarSlice:
    """B_{n_1..n_m} at block weights (b_1..b_m): terms Z_{c^1 .. c^m} for
    compositions c^t of n_t with per-part weights splitting b_t; the
    differential merges adjacent parts of one block with sign
    (-1)^(global position + 1)."""

    def __init__(self, Q, ns, bws, prefix=(), prefix_W=()):
        self.Q = Q
        self.ns = tuple(ns)
        self.bws = tuple(tuple(b) for b in bws)
        self.prefix = tuple(prefix)
        self.prefix_W = tuple(prefix_W)
        per_block = []
        for n, b in zip(self.ns, self.bws):
            opts = []
            for c in compositions(n):
                for ws in weight_splittings(b, len(c)):
                    opts.append((c, ws))
            per_block.append(opts)
        self.terms = {}
        for choice in iproduct(*per_block):
            idx = self.prefix + tuple(x for c, _ in choice for x in c)
            W = self.prefix_W + tuple(w for _, ws in choice for w in ws)
            d = Q.dim(idx, W)
            if d:
                i = len(idx) - len(self.prefix)
                lens = tuple(len(c) for c, _ in choice)
                self.terms.setdefault(i, []).append((idx, W, lens, d))
        self.offsets = {}
        self.size = {}
        for i, lst in self.terms.items():
            lst.sort()
            off = 0
            for idx, W, lens, d in lst:
                self.offsets[(idx, W)] = off
                off += d
            self.size[i] = off
        self._diff = {}

    def degrees(self):
        return sorted(self.size)

    def dim(self, i):
        return self.size.get(i, 0)

    def top_degree(self):
        return sum(self.ns)

    def diff(self, i):
        if i in self._diff:
            return self._diff[i]
        entries = {}
        P = len(self.prefix)
        for idx, W, lens, d in self.terms.get(i, []):
            off = self.offsets[(idx, W)]
            g = P
            for L in lens:
                for s in range(L - 1):
                    pos = g + s
                    tidx = merged_index(idx, pos)
                    tW = merged_weights(W, pos)
                    toff = self.offsets.get((tidx, tW))
                    if toff is None:
                        continue
                    sign = 1 if (pos - P) & 1 else -1
                    for r, c, v in self.Q.qmult(idx, pos, W).triples():
                        key = (toff + r, off + c)
                        entries[key] = entries.get(key, 0) + sign * v
                g += L
        m = QMatrix(self.dim(i - 1), self.dim(i), [(r, c, v) for (r, c), v in entries.items() if v])
        self._diff[i] = m
        return m

    def homology_dims(self):
        ranks = {i: (rank(self.diff(i)) if self.dim(i - 1) else 0) for i in self.degrees()}
        out = {}
        for i in self.degrees():
            h = self.dim(i) - ranks.get(i, 0) - ranks.get(i + 1, 0)
            if h:
                out[i] = h
        return out

    def check_d_squared(self):
        for i in self.degrees():
            if self.dim(i - 2) and not (self.diff(i - 1) @ self.diff(i)).is_zero():
                return False
        return True

    def top_cycles(self):
        top = self.top_degree()
        if self.dim(top) == 0:
            return Subspace.zero(0)
        if self.dim(top - 1) == 0:
            return Subspace.full(self.dim(top))
        vecs, _ = kernel_vectors(self.diff(top))
        return Subspace(self.dim(top), vecs)


def quasi_bar(Q, ns, bws):
    return QuasiBarSlice(Q, ns, bws)


def block_weight_choices(u, D, ns):
    ws = weight_vectors(u, D)
    zero = (0,) * u
    lists = [ws if n > 0 else [zero] for n in ns]
    return [tuple(c) for c in iproduct(*lists)]


def _quasi_slice_homology(Q, item):
    ns, bws = item
    sl = QuasiBarSlice(Q, ns, bws)
    if not sl.size:
        return item, {}
    return item, sl.homology_dims()


def quasi_koszul_items(Q, N=4, M=3, D=None):
    D = Q.D if D is None else D
    items = []
    for ns in tuples_up_to(N, M, positive=True):
        for bws in block_weight_choices(Q.u, D, ns):
            items.append((ns, bws))
    return items


def is_koszul_quasi(Q, N=4, M=3, D=None, jobs=None):
    """All B_{n_1..n_m} (n_t >= 1, sum <= N, m <= M) at block weights with
    |b_t| <= D have homology only in degree n_1 + ... + n_m."""
    D = Q.D if D is None else D
    items = quasi_koszul_items(Q, N, M, D)
    results = pmap(_quasi_slice_homology, Q, items, jobs)
    wit = []
    table = {}
    for (ns, bws), hom in results:
        for i, h in hom.items():
            table[(ns, bws, i)] = h
            if i != sum(ns):
                wit.append((ns, bws, i, h))
    rep = KoszulReport("koszul_quasi:%s" % Q.name, not wit, {"N": N, "M": M, "D": D},
                       [(i, sum(ns), (ns, bws), h) for ns, bws, i, h in wit])
    rep.quasi_table = table
    rep.slices = len(items)
    return rep


def quasi_report_json(rep):
    out = rep.to_json()
    out["witnesses"] = [{"tuple": ".".join(map(str, a[0])), "block_weights": [list(b) for b in a[1]],
                         "i": i, "dim": d} for i, j, a, d in rep.witnesses]
    out["slices"] = getattr(rep, "slices", None)
    return out


# ---------------------------------------------------------------------------
# the dual quasi-coalgebra

def block_totals(ns, W):
    """Per-block sums of the per-position weights W of Z_{1..1}."""
    out = []
    g = 0
    for n in ns:
        tot = tuple(W[g]) if n else None
        for w in W[g + 1:g + n]:
            tot = wadd(tot, w)
        out.append(tot)
        g += n
    return tuple(out)


def block_positions(ns):
    """Merge positions of Z_{1..1} lying inside a block of ns."""
    pos = []
    g = 0
    for n in ns:
        pos.extend(range(g, g + n - 1))
        g += n
    return pos


class QuasiCoalgebra:
    """C_{n_1..n_m} = H_top(B_{n_1..n_m}).

    A frame (ns, b) is the space (+)_W Z_{1..1}[W] over per-position weights
    W whose block totals for ns equal b, ordered by W.  Inside a frame, C_c
    for any refinement c of ns is the common kernel of the merges inside the
    blocks of c.  Components are graded by block totals: C_ns[b] is C_ns in
    its own frame.  Merges mix different W with equal sums, so C is not
    graded by W itself.  Quasi-comultiplications are inclusions inside a
    frame, quasi-counits identities, external multiplications come from Z.
    """

    def __init__(self, Q, N=4):
        self.Q = Q
        self.N = N
        self.u = Q.u
        self.D = Q.D
        self.name = "C(%s)" % Q.name
        self.caveats = []
        self._frames = {}
        self._sub = {}

    @staticmethod
    def normalize(ns, b=None):
        """Drop zero blocks (their weight must be zero)."""
        if b is None:
            return tuple(n for n in ns if n)
        keep_n, keep_b = [], []
        for n, w in zip(ns, b):
            if n:
                keep_n.append(n)
                keep_b.append(tuple(w))
            elif w is not None and any(w):
                return None, None
        return tuple(keep_n), tuple(keep_b)

    def frame(self, ns, b):
        """(parts, total): parts are (W, offset, dim)."""
        key = (tuple(ns), tuple(b))
        f = self._frames.get(key)
        if f is None:
            ones = (1,) * sum(ns)
            parts, off = [], 0
            for W, d in sorted(self.Q.component(ones).items()):
                if block_totals(ns, W) == key[1]:
                    parts.append((W, off, d))
                    off += d
            f = self._frames[key] = (parts, off)
        return f

    def frames(self, ns):
        ns = self.normalize(ns)
        ones = (1,) * sum(ns)
        return sorted({block_totals(ns, W) for W in self.Q.component(ones)})

    def subspace(self, c, ns, b):
        """C_c inside the frame (ns, b); c must refine ns."""
        key = (tuple(c), tuple(ns), tuple(b))
        S = self._sub.get(key)
        if S is not None:
            return S
        parts, total = self.frame(ns, b)
        pos = block_positions(c)
        rows = {}
        entries = []
        ones = (1,) * sum(ns)
        for t in pos:
            for W, off, d in parts:
                m = self.Q.qmult(ones, t, W)
                if not m.rows:
                    continue
                tw = (t, merged_weights(W, t))
                base = rows.get(tw)
                if base is None:
                    base = rows[tw] = sum(self.Q.dim(merged_index(ones, t2), w2) for t2, w2 in rows)
                entries.extend((base + r, off + col, v) for r, col, v in m.triples())
        nrows = sum(self.Q.dim(merged_index(ones, t2), w2) for t2, w2 in rows)
        if not entries:
            S = Subspace.full(total)
        else:
            vecs, _ = kernel_vectors(QMatrix(nrows, total, entries))
            S = Subspace(total, vecs)
        self._sub[key] = S
        return S

    def component(self, ns):
        """{b: C_ns[b]} over block totals with nonzero component."""
        ns = self.normalize(ns)
        if not ns:
            return {(): Subspace.full(1)}
        out = {}
        for b in self.frames(ns):
            S = self.subspace(ns, ns, b)
            if S.dim:
                out[b] = S
        return out

    def dim(self, ns, b):
        ns, b = self.normalize(ns, b)
        if ns is None:
            return 0
        if not ns:
            return 1
        return self.subspace(ns, ns, b).dim if self.frame(ns, b)[1] else 0

    def total_dim(self, ns):
        return sum(S.dim for S in self.component(ns).values())

    def inclusion(self, frame_ns, b, coarse, fine):
        """C_coarse -> C_fine inside the frame (frame_ns, b)."""
        src = self.subspace(coarse, frame_ns, b)
        tgt = self.subspace(fine, frame_ns, b)
        return QMatrix.from_columns(tgt.dim, [tgt.coords_dict(r) for r in src.rows])

    def qcomult(self, fine, t, b):
        """C_{fine with parts t, t+1 merged}[b] -> C_fine: inclusion inside
        the frame of the coarser tuple at block totals b."""
        fine = tuple(fine)
        coarse = merged_index(fine, t)
        return self.inclusion(coarse, b, coarse, fine)

    def qcounit(self, ns, p, b):
        """C_{ns with a 0 block at p}[b with 0 at p] -> C_ns[b]."""
        ns, b = tuple(ns), tuple(b)
        z = (0,) * self.u
        n1, b1 = self.normalize(inserted(ns, p, 0), inserted(b, p, z))
        n0, b0 = self.normalize(ns, b)
        src = self.subspace(n1, n1, b1)
        tgt = self.subspace(n0, n0, b0)
        return QMatrix.from_columns(tgt.dim, [tgt.coords_dict(r) for r in src.rows])

    def frame_extmult(self, ns1, b1, ns2, b2):
        """Z's external products assembled frame (ns1,b1) (x) frame (ns2,b2)
        -> frame (ns1 ns2, b1 b2)."""
        p1, t1 = self.frame(ns1, b1)
        p2, t2 = self.frame(ns2, b2)
        ns, b = tuple(ns1) + tuple(ns2), tuple(b1) + tuple(b2)
        p, t = self.frame(ns, b)
        where = {W: off for W, off, d in p}
        n1, n2 = sum(ns1), sum(ns2)
        entries = []
        for W1, o1, d1 in p1:
            for W2, o2, d2 in p2:
                m = self.Q.extmult((1,) * n1, (1,) * n2, W1, W2)
                to = where.get(W1 + W2)
                for r, c, v in m.triples():
                    i, j = divmod(c, d2)
                    entries.append((to + r, (o1 + i) * t2 + o2 + j, v))
        return QMatrix(t, t1 * t2, entries)

    def extmult(self, ns1, ns2, b1, b2):
        K1 = self.subspace(ns1, ns1, b1)
        K2 = self.subspace(ns2, ns2, b2)
        ns, b = tuple(ns1) + tuple(ns2), tuple(b1) + tuple(b2)
        K = self.subspace(ns, ns, b)
        big = self.frame_extmult(ns1, b1, ns2, b2)
        img = big @ K1.basis.transpose().kron(K2.basis.transpose())
        cols = []
        for col in img.columns():
            cols.append(K.coords_dict(col))  # raises if the image leaves C
        return QMatrix.from_columns(K.dim, cols)


def dual_quasi_coalgebra(Q, N=4, M=3, check_koszul=True, jobs=None):
    C = QuasiCoalgebra(Q, N)
    if check_koszul:
        rep = is_koszul_quasi(Q, N, M, jobs=jobs)
        if not rep.passed:
            C.caveats.append("quasi-algebra not Koszul within bounds")
    return C


def faithful(b, D):
    return all(sum(w) <= D for w in b)


class CobarSlice:
    """Cobar complex of C in the frame (ns, b): terms C_c over refinements
    c of ns (degree = number of parts); the differential splits one part,
    with sign (-1)^(global position of the part)."""

    def __init__(self, C, ns, b):
        self.C = C
        self.ns = tuple(ns)
        self.b = tuple(b)
        per_block = [list(compositions(n)) for n in self.ns]
        self.terms = {}
        for choice in iproduct(*per_block):
            c = tuple(x for comp in choice for x in comp)
            S = C.subspace(c, self.ns, self.b)
            if S.dim:
                self.terms.setdefault(len(c), []).append((c, S))
        self.offsets, self.size = {}, {}
        for k, lst in self.terms.items():
            lst.sort(key=lambda x: x[0])
            off = 0
            for c, S in lst:
                self.offsets[c] = off
                off += S.dim
            self.size[k] = off

    def degrees(self):
        return sorted(self.size)

    def dim(self, k):
        return self.size.get(k, 0)

    def diff(self, k):
        """delta_k : degree k -> degree k+1."""
        entries = {}
        for c, S in self.terms.get(k, []):
            off = self.offsets[c]
            for g, part in enumerate(c):
                for a in range(1, part):
                    fine = c[:g] + (a, part - a) + c[g + 1:]
                    toff = self.offsets.get(fine)
                    if toff is None:
                        continue
                    sign = -1 if g & 1 else 1
                    for r, col, v in self.C.inclusion(self.ns, self.b, c, fine).triples():
                        key = (toff + r, off + col)
                        entries[key] = entries.get(key, 0) + sign * v
        return QMatrix(self.dim(k + 1), self.dim(k), [(r, c, v) for (r, c), v in entries.items() if v])

    def cohomology_dims(self):
        ranks = {k: (rank(self.diff(k)) if self.dim(k + 1) else 0) for k in self.degrees()}
        out = {}
        for k in self.degrees():
            h = self.dim(k) - ranks.get(k, 0) - ranks.get(k - 1, 0)
            if h:
                out[k] = h
        return out

    def check_d_squared(self):
        for k in self.degrees():
            if self.dim(k + 2) and not (self.diff(k + 1) @ self.diff(k)).is_zero():
                return False
        return True


def quasi_cobar(C, ns, b):
    return CobarSlice(C, ns, b)


def _cobar_item(C, item):
    ns, b = item
    sl = CobarSlice(C, ns, b)
    return item, sl.cohomology_dims(), sl.check_d_squared()


def is_koszul_quasi_coalgebra(C, N=4, M=3, jobs=None):
    """Cobar cohomology concentrated in degree sum(ns) for all positive
    tuples within bounds, in frames whose block totals respect the bound."""
    items = []
    for ns in tuples_up_to(N, M, positive=True):
        for b in C.frames(ns):
            if faithful(b, C.D):
                items.append((ns, b))
    results = pmap(_cobar_item, C, items, jobs)
    wit = []
    bad_d2 = []
    for (ns, b), coh, ok in results:
        if not ok:
            bad_d2.append((ns, b))
        for k, h in coh.items():
            if k != sum(ns):
                wit.append((k, sum(ns), (ns, b), h))
    rep = KoszulReport("koszul_quasi_coalgebra:%s" % C.name, not wit and not bad_d2,
                       {"N": N, "M": M, "D": C.D}, wit)
    rep.slices = len(items)
    if bad_d2:
        rep.caveats.append("cobar differential does not square to zero on %d slices" % len(bad_d2))
    return rep


def check_coalgebra_axioms(C, N=4, M=3):
    """Dual laws inside every frame: coassociativity of splits, disjoint
    splits commuting, counits acting as identities."""
    counts = {}

    def bump(k):
        counts[k] = counts.get(k, 0) + 1

    def fail(law, **kw):
        return Report("coalgebra_axioms:%s" % C.name, False, {"checked": counts}, witness=dict(law=law, **kw))

    if C.component(()) != {(): Subspace.full(1)}:
        return fail("empty component is k")
    for ns in tuples_up_to(N, M, positive=True):
        for b in C.frames(ns):
            for fine in iproduct(*[list(compositions(n)) for n in ns]):
                c = tuple(x for comp in fine for x in comp)
                m = len(c)
                lens = [len(comp) for comp in fine]
                inside = set()
                g = 0
                for L in lens:
                    inside.update(range(g, g + L - 1))
                    g += L
                for t in range(1, m - 1):
                    if t - 1 not in inside or t not in inside:
                        continue
                    c1, c2 = merged_index(c, t - 1), merged_index(c, t)
                    top = merged_index(c1, t - 1)
                    a = C.inclusion(ns, b, c1, c) @ C.inclusion(ns, b, top, c1)
                    bb = C.inclusion(ns, b, c2, c) @ C.inclusion(ns, b, top, c2)
                    bump("coassociativity")
                    if a != bb:
                        return fail("coassociativity", tuple=list(c))
                for s in sorted(inside):
                    for t in sorted(inside):
                        if t < s + 2:
                            continue
                        cs, ct = merged_index(c, s), merged_index(c, t)
                        both = merged_index(cs, t - 1)
                        a = C.inclusion(ns, b, cs, c) @ C.inclusion(ns, b, both, cs)
                        bb = C.inclusion(ns, b, ct, c) @ C.inclusion(ns, b, both, ct)
                        bump("disjoint_splits")
                        if a != bb:
                            return fail("disjoint_splits", tuple=list(c))
            d = C.dim(ns, b)
            for p in range(len(ns) + 1):
                if d == 0:
                    continue
                bump("counit")
                if C.qcounit(ns, p, b) != QMatrix.identity(d):
                    return fail("counit", tuple=list(ns), position=p)
    return Report("coalgebra_axioms:%s" % C.name, True, {"checked": counts})


# ---------------------------------------------------------------------------
# quadratic data

def coarse_tuple(n, t):
    return merged_index((1,) * n, t)


def quadratic_sequence_check(Q, C, N=4):
    """0 -> C_{1..2..1} -> C_{1..1} = Z_{1..1} -> Z_{1..2..1} -> 0 exact for
    every n <= N and merge position, per stratum of the target."""
    rows = []
    for n in range(2, N + 1):
        ones = (1,) * n
        for t in range(n - 1):
            coarse = coarse_tuple(n, t)
            tot = {"dim_C_merged": 0, "dim_Z_ones": 0, "dim_Z_merged": 0, "rank_merge": 0}
            for b in C.frames(coarse):
                parts, zdim = C.frame(coarse, b)
                dt = Q.dim(coarse, b)
                maps = [Q.qmult(ones, t, W) for W, _, _ in parts]
                r = rank(hstack(maps, dt)) if dt else 0
                cdim = C.subspace(coarse, coarse, b).dim
                middle = C.subspace(ones, coarse, b).dim
                wit = {"n": n, "position": t, "block_totals": [list(w) for w in b]}
                if middle != zdim:
                    return Report("quadratic_sequence", False, witness=dict(wit, reason="C_1..1 != Z_1..1"))
                if r != dt:
                    return Report("quadratic_sequence", False,
                                  witness=dict(wit, reason="merge not surjective", rank=r, dim=dt))
                if cdim + r != zdim:
                    return Report("quadratic_sequence", False, witness=dict(wit, reason="not exact at C_1..1"))
                tot["dim_C_merged"] += cdim
                tot["dim_Z_ones"] += zdim
                tot["dim_Z_merged"] += dt
                tot["rank_merge"] += r
            rows.append(dict(n=n, position=t, **tot))
    return Report("quadratic_sequence", True, {"sequences": rows})


def distributivity_criterion(C, n, cap=4096, faithful_only=True):
    """Distributivity of the n-1 subspaces C_{1..2..1} of C_{1..1}, in each
    frame ((n), b).  Frames with |b| above the weight bound are skipped
    when ``faithful_only`` is set."""
    checked = skipped = 0
    for b in C.frames((n,)):
        if faithful_only and not faithful(b, C.D):
            skipped += 1
            continue
        parts, amb = C.frame((n,), b)
        subs = [C.subspace(coarse_tuple(n, t), (n,), b) for t in range(n - 1)]
        ok, wit = is_distributive(subs, cap=cap)
        checked += 1
        if not ok:
            return Report("distributivity", False, {"n": n, "frames_checked": checked},
                          witness={"block_total": [list(w) for w in b], "ambient": amb,
                                   "triple_dims": [x.dim for x in wit],
                                   "triple": [[{str(k): str(v) for k, v in sorted(r.items())} for r in x.rows]
                                              for x in wit]})
    return Report("distributivity", True, {"n": n, "frames_checked": checked, "frames_skipped": skipped})



# ---------------------------------------------------------------------------
# external multiplications under duality

def _tensor_complex(s1, s2):
    """Degrees, offsets and differentials of s1 (x) s2."""
    terms = {}
    for i1 in s1.degrees():
        for i2 in s2.degrees():
            terms.setdefault(i1 + i2, []).append((i1, i2))
    offsets, sizes = {}, {}
    for i, parts in terms.items():
        off = 0
        for p in sorted(parts):
            offsets[p] = off
            off += s1.dim(p[0]) * s2.dim(p[1])
        sizes[i] = off
    return terms, offsets, sizes


def bar_extmult_check(Q, ns1, bws1, ns2, bws2):
    """The concatenation map B_{ns1} (x) B_{ns2} -> B_{ns1 ns2} is a chain
    map; returns (ok, slices)."""
    s1 = QuasiBarSlice(Q, ns1, bws1)
    s2 = QuasiBarSlice(Q, ns2, bws2)
    s = QuasiBarSlice(Q, tuple(ns1) + tuple(ns2), tuple(bws1) + tuple(bws2))
    terms, offsets, sizes = _tensor_complex(s1, s2)

    def E(i):
        entries = []
        for i1, i2 in terms.get(i, []):
            base = offsets[(i1, i2)]
            for idx1, W1, _, d1 in s1.terms.get(i1, []):
                o1 = s1.offsets[(idx1, W1)]
                for idx2, W2, _, d2 in s2.terms.get(i2, []):
                    o2 = s2.offsets[(idx2, W2)]
                    to = s.offsets[(idx1 + idx2, W1 + W2)]
                    m = Q.extmult(idx1, idx2, W1, W2)
                    for r, c, v in m.triples():
                        a, b = divmod(c, d2)
                        col = base + (o1 + a) * s2.dim(i2) + (o2 + b)
                        entries.append((to + r, col, v))
        return QMatrix(s.dim(i), sizes.get(i, 0), entries)

    def Dt(i):
        entries = []
        for i1, i2 in terms.get(i, []):
            base = offsets[(i1, i2)]
            if (i1 - 1, i2) in offsets:
                m = s1.diff(i1).kron(QMatrix.identity(s2.dim(i2)))
                tb = offsets[(i1 - 1, i2)]
                entries.extend((tb + r, base + c, v) for r, c, v in m.triples())
            if (i1, i2 - 1) in offsets:
                m = QMatrix.identity(s1.dim(i1)).kron(s2.diff(i2))
                tb = offsets[(i1, i2 - 1)]
                sg = -1 if i1 & 1 else 1
                entries.extend((tb + r, base + c, sg * v) for r, c, v in m.triples())
        return QMatrix(sizes.get(i - 1, 0), sizes.get(i, 0), entries)

    for i in sizes:
        if i - 1 not in sizes and s.dim(i - 1) == 0:
            continue
        lhs = s.diff(i) @ E(i) if s.dim(i - 1) else QMatrix.zeros(0, sizes[i])
        rhs = E(i - 1) @ Dt(i) if i - 1 in sizes else QMatrix.zeros(s.dim(i - 1), sizes[i])
        if lhs.shape != rhs.shape:
            rhs = QMatrix.zeros(*lhs.shape) if rhs.is_zero() else rhs
        if lhs != rhs:
            return False, (s1, s2, s), E
    return True, (s1, s2, s), E


def external_mult_duality_check(Q, C, N=4, M=3):
    """Bar-level external multiplications are chain maps; on top homology
    they agree with C's external multiplications; records whether every
    external multiplication of Q and of C is an isomorphism."""
    chain = induced = 0
    all_iso_C = True
    u, D = Q.u, Q.D
    for ns1 in tuples_up_to(N, M, positive=True):
        for ns2 in tuples_up_to(N, M, positive=True):
            if len(ns1) + len(ns2) > M or sum(ns1) + sum(ns2) > N:
                continue
            for b1 in block_weight_choices(u, D, ns1):
                for b2 in block_weight_choices(u, D, ns2):
                    ok, (s1, s2, s), E = bar_extmult_check(Q, ns1, b1, ns2, b2)
                    chain += 1
                    wit = {"tuples": [list(ns1), list(ns2)], "block_weights": [[list(w) for w in b1], [list(w) for w in b2]]}
                    if not ok:
                        return Report("extmult_duality", False, witness=dict(wit, reason="not a chain map"))
                    if not (s1.size and s2.size and s.size):
                        continue
                    K1, K2, K = s1.top_cycles(), s2.top_cycles(), s.top_cycles()
                    if K1 != C.subspace(ns1, ns1, b1) or K2 != C.subspace(ns2, ns2, b2) \
                            or K != C.subspace(tuple(ns1) + tuple(ns2), tuple(ns1) + tuple(ns2), tuple(b1) + tuple(b2)):
                        return Report("extmult_duality", False, witness=dict(wit, reason="top cycles differ from C"))
                    top1, top2 = s1.top_degree(), s2.top_degree()
                    Etop = E(top1 + top2)
                    # columns of the (top1, top2) block come first only if it is the sole block
                    base = _tensor_complex(s1, s2)[1][(top1, top2)]
                    img_cols = []
                    d2 = s2.dim(top2)
                    for r1 in K1.rows:
                        for r2 in K2.rows:
                            vec = {}
                            for i, x in r1.items():
                                for j, y in r2.items():
                                    vec[base + i * d2 + j] = x * y
                            img_cols.append(Etop.apply(vec))
                    try:
                        via_bar = QMatrix.from_columns(K.dim, [K.coords_dict(c) for c in img_cols])
                    except ValueError:
                        return Report("extmult_duality", False, witness=dict(wit, reason="image leaves C"))
                    via_C = C.extmult(ns1, ns2, b1, b2)
                    induced += 1
                    if via_bar != via_C:
                        return Report("extmult_duality", False, witness=dict(wit, reason="induced map differs"))
                    if via_C.rows != via_C.cols or rank(via_C) != via_C.rows:
                        all_iso_C = False
    all_iso_Q = True
    for idx1 in tuples_up_to(N, M, positive=True):
        for idx2 in tuples_up_to(N, M, positive=True):
            if len(idx1) + len(idx2) > M or sum(idx1) + sum(idx2) > N:
                continue
            if sum(Q.component(idx1 + idx2).values()) != \
                    sum(Q.component(idx1).values()) * sum(Q.component(idx2).values()):
                all_iso_Q = False
                continue
            for W1 in sorted(Q.component(idx1)):
                for W2 in sorted(Q.component(idx2)):
                    E = Q.extmult(idx1, idx2, W1, W2)
                    if E.rows != E.cols or rank(E) != E.rows:
                        all_iso_Q = False
    return Report("extmult_duality", True,
                  {"chain_map_checks": chain, "induced_checks": induced,
                   "all_extmult_iso_Q": all_iso_Q, "all_extmult_iso_C": all_iso_C,
                   "comes_from_graded_algebra": all_iso_Q})



def is_koszul_quasi_m1_agrees(Q, Z, N=4, D=None):
    """For single-index tuples the quasi verdict equals the graded one."""
    D = Q.D if D is None else D
    rq = is_koszul_quasi(Q, N, 1, D)
    ra = is_koszul_algebra(Z, N, D)
    return rq.passed == ra.passed, rq, ra
