"""
Bigraded vector spaces, algebras and modules with sparse structure constants.

A stratum is a pair ``(n, a)``: the internal degree ``n`` and a multidegree
``a`` (tuple of non-negative ints).  Every stratum is finite dimensional.
Products are stored per stratum pair as matrices of shape
``(dim(s1 + s2), dim(s1) * dim(s2))``; the column for the basis pair
``(i, j)`` is ``i * dim(s2) + j``.  A product landing in a stratum that is
not loaded is zero, so truncated objects are quotient objects.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
import json

from .rlinalg import QMatrix, Subspace, fstr

SCHEMA = "koszul-lab/graded/1"


def sadd(s1, s2):
    (n1, a1), (n2, a2) = s1, s2
    return (n1 + n2, tuple(x + y for x, y in zip(a1, a2)))


def ssub(s1, s2):
    (n1, a1), (n2, a2) = s1, s2
    return (n1 - n2, tuple(x - y for x, y in zip(a1, a2)))


def sle(s1, s2):
    """Componentwise s1 <= s2."""
    return s1[0] <= s2[0] and all(x <= y for x, y in zip(s1[1], s2[1]))


class GradedSpace:
    """Finite family of labeled bases indexed by strata."""

    def __init__(self, u, strata):
        self.u = u
        clean = {}
        for s, labels in strata.items():
            n, a = s
            a = tuple(a)
            if len(a) != u:
                raise ValueError("multidegree %r has length != %d" % (a, u))
            if any(x < 0 for x in a):
                raise ValueError("negative multidegree %r" % (a,))
            labels = tuple(labels)
            if len(set(labels)) != len(labels):
                raise ValueError("duplicate labels in stratum %r" % ((n, a),))
            if labels:
                clean[(n, a)] = labels
        self._strata = clean
        self._index = {}

    def strata(self):
        return sorted(self._strata)

    def __contains__(self, s):
        return s in self._strata

    def dim(self, s):
        return len(self._strata.get(s, ()))

    def labels(self, s):
        return self._strata.get(s, ())

    def index(self, s, label):
        idx = self._index.get(s)
        if idx is None:
            idx = self._index[s] = {l: i for i, l in enumerate(self.labels(s))}
        return idx[label]

    def total_dim(self):
        return sum(len(l) for l in self._strata.values())

    def degree_dims(self):
        """Dimensions collapsed over multidegree: {n: dim}."""
        out = {}
        for (n, a), l in self._strata.items():
            out[n] = out.get(n, 0) + len(l)
        return dict(sorted(out.items()))

    def max_degree(self):
        return max((n for n, _ in self._strata), default=0)

    def __eq__(self, other):
        return isinstance(other, GradedSpace) and self.u == other.u and self._strata == other._strata

    def __repr__(self):
        return "GradedSpace(u=%d, strata=%d, dim=%d)" % (self.u, len(self._strata), self.total_dim())

    def to_json(self):
        return {"schema": SCHEMA, "u": self.u,
                "strata": [{"n": n, "a": list(a), "dim": self.dim((n, a)),
                            "labels": [str(l) for l in self.labels((n, a))]}
                           for n, a in self.strata()]}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["u"], {(s["n"], tuple(s["a"])): s["labels"] for s in obj["strata"]})


def tensor_space(V, W):
    if V.u != W.u:
        raise ValueError("multidegree length mismatch")
    out = {}
    for s1 in V.strata():
        for s2 in W.strata():
            s = sadd(s1, s2)
            out.setdefault(s, []).extend((l1, l2) for l1 in V.labels(s1) for l2 in W.labels(s2))
    return GradedSpace(V.u, out)


def truncate(V, N, D):
    if N < 0 or D < 0:
        raise ValueError("bounds must be non-negative")
    return GradedSpace(V.u, {s: V.labels(s) for s in V.strata() if s[0] <= N and sum(s[1]) <= D})


class GradedAlgebraData:
    """Graded algebra with a unit in stratum ``(0, 0)``.

    ``mult`` is either a dict ``{(s1, s2): QMatrix}`` or a callable
    ``(s1, s2) -> QMatrix``; results are cached.
    """

    def __init__(self, space, mult, unit=None, name="algebra"):
        self.space = space
        self.u = space.u
        self.name = name
        zero = (0, (0,) * space.u)
        self.unit_stratum = zero
        self.unit_index = 0 if unit is None else unit
        if callable(mult):
            self._provider = mult
            self._mult = {}
        else:
            self._provider = None
            self._mult = dict(mult)

    def strata(self):
        return self.space.strata()

    def dim(self, s):
        return self.space.dim(s)

    def positive_strata(self):
        return [s for s in self.space.strata() if s[0] > 0]

    def mult(self, s1, s2):
        key = (s1, s2)
        m = self._mult.get(key)
        if m is None:
            d1, d2 = self.dim(s1), self.dim(s2)
            t = sadd(s1, s2)
            dt = self.dim(t)
            if self._provider is not None and d1 and d2 and dt:
                m = self._provider(s1, s2)
            else:
                m = QMatrix.zeros(dt, d1 * d2)
            if m.shape != (dt, d1 * d2):
                raise ValueError("product %r x %r has shape %s, expected %s"
                                 % (s1, s2, m.shape, (dt, d1 * d2)))
            self._mult[key] = m
        return m

    def multiply(self, s1, i, s2, j):
        """Product of basis vectors as a sparse vector in stratum s1+s2."""
        m = self.mult(s1, s2)
        col = i * self.dim(s2) + j
        return {r: row[col] for r, row in m._data.items() if col in row}

    def multiply_vec(self, s1, x, s2, y):
        out = {}
        d2 = self.dim(s2)
        m = self.mult(s1, s2)
        if not m._data:
            return out
        vec = {}
        for i, a in x.items():
            for j, b in y.items():
                vec[i * d2 + j] = a * b
        return m.apply(vec)

    def is_connected(self):
        """A_0 = k: the (0, 0) stratum is 1-dimensional and no other
        stratum of internal degree 0 is present."""
        deg0 = [s for s in self.space.strata() if s[0] == 0]
        return deg0 == [self.unit_stratum] and self.dim(self.unit_stratum) == 1

    def all_products(self):
        for s1 in self.strata():
            for s2 in self.strata():
                if sadd(s1, s2) in self.space:
                    yield s1, s2, self.mult(s1, s2)

    def to_json(self):
        obj = self.space.to_json()
        obj["name"] = self.name
        obj["mult"] = [{"src1": {"n": s1[0], "a": list(s1[1])},
                        "src2": {"n": s2[0], "a": list(s2[1])},
                        "matrix": [[r, c, fstr(v)] for r, c, v in m.triples()]}
                       for s1, s2, m in self.all_products() if not m.is_zero()]
        return obj

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        space = GradedSpace.from_json(obj)
        mult = {}
        for e in obj.get("mult", []):
            s1 = (e["src1"]["n"], tuple(e["src1"]["a"]))
            s2 = (e["src2"]["n"], tuple(e["src2"]["a"]))
            shape = (space.dim(sadd(s1, s2)), space.dim(s1) * space.dim(s2))
            mult[(s1, s2)] = QMatrix(*shape, [(r, c, Fraction(v)) for r, c, v in e["matrix"]])
        return cls(space, mult, name=obj.get("name", "algebra"))

    def __repr__(self):
        return "GradedAlgebraData(%s, %r)" % (self.name, self.space)


class GradedModuleData:
    """Left module over a GradedAlgebraData.

    ``action`` maps ``(sA, sM)`` to a matrix of shape
    ``(dim M(sA + sM), dim A(sA) * dim M(sM))``.
    """

    def __init__(self, algebra, space, action, name="module"):
        if algebra.u != space.u:
            raise ValueError("multidegree length mismatch")
        self.algebra = algebra
        self.space = space
        self.u = space.u
        self.name = name
        if callable(action):
            self._provider = action
            self._act = {}
        else:
            self._provider = None
            self._act = dict(action)

    def strata(self):
        return self.space.strata()

    def dim(self, s):
        return self.space.dim(s)

    def act(self, sA, sM):
        key = (sA, sM)
        m = self._act.get(key)
        if m is None:
            dA, dM = self.algebra.dim(sA), self.dim(sM)
            dt = self.dim(sadd(sA, sM))
            if self._provider is not None and dA and dM and dt:
                m = self._provider(sA, sM)
            else:
                m = QMatrix.zeros(dt, dA * dM)
            if m.shape != (dt, dA * dM):
                raise ValueError("action %r x %r has shape %s, expected %s"
                                 % (sA, sM, m.shape, (dt, dA * dM)))
            self._act[key] = m
        return m

    def act_basis(self, sA, i, sM, j):
        m = self.act(sA, sM)
        col = i * self.dim(sM) + j
        return {r: row[col] for r, row in m._data.items() if col in row}

    def to_json(self):
        obj = self.space.to_json()
        obj["name"] = self.name
        obj["action"] = []
        for sA in self.algebra.strata():
            for sM in self.strata():
                if sadd(sA, sM) in self.space:
                    m = self.act(sA, sM)
                    if not m.is_zero():
                        obj["action"].append({"src1": {"n": sA[0], "a": list(sA[1])},
                                              "src2": {"n": sM[0], "a": list(sM[1])},
                                              "matrix": [[r, c, fstr(v)] for r, c, v in m.triples()]})
        return obj

    def __repr__(self):
        return "GradedModuleData(%s, %r)" % (self.name, self.space)


# ---------------------------------------------------------------------------
# validation

@dataclass
class Report:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    witness: object = None

    def __bool__(self):
        return self.passed

    def to_json(self):
        out = {"check": self.name, "verdict": "pass" if self.passed else "fail"}
        out.update(self.details)
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _first_diff(m1, m2):
    diff = m1 - m2
    for r, c, v in diff.triples():
        return c
    return None


def _decode(col, dims):
    out = []
    for d in reversed(dims):
        out.append(col % d)
        col //= d
    return tuple(reversed(out))


def validate_algebra(A, max_degree=None):
    """Associativity on all stratum triples whose total is loaded, and
    both unit laws."""
    strata = [s for s in A.strata() if max_degree is None or s[0] <= max_degree]
    e = A.unit_stratum
    checked = 0
    if A.dim(e) < 1:
        return Report("validate_algebra", False, witness={"law": "unit", "reason": "no unit stratum"})
    for s in strata:
        d = A.dim(s)
        left = A.mult(e, s)
        right = A.mult(s, e)
        # columns (unit, j) and (j, unit)
        for j in range(d):
            lc = {r: row[A.unit_index * d + j] for r, row in left._data.items() if A.unit_index * d + j in row}
            rc = {r: row[j * A.dim(e) + A.unit_index] for r, row in right._data.items()
                  if j * A.dim(e) + A.unit_index in row}
            if lc != {j: 1} or rc != {j: 1}:
                return Report("validate_algebra", False,
                              witness={"law": "unit", "stratum": _sjson(s), "basis": A.space.labels(s)[j]})
    present = set(A.strata())
    for s1 in strata:
        for s2 in strata:
            s12 = sadd(s1, s2)
            for s3 in strata:
                s123 = sadd(s12, s3)
                if s123 not in present:
                    continue
                s23 = sadd(s2, s3)
                d1, d2, d3 = A.dim(s1), A.dim(s2), A.dim(s3)
                lhs = A.mult(s12, s3) @ A.mult(s1, s2).kron(QMatrix.identity(d3))
                rhs = A.mult(s1, s23) @ QMatrix.identity(d1).kron(A.mult(s2, s3))
                checked += 1
                if lhs != rhs:
                    i, j, k = _decode(_first_diff(lhs, rhs), (d1, d2, d3))
                    return Report("validate_algebra", False,
                                  {"triples_checked": checked},
                                  witness={"law": "associativity",
                                           "basis": [str(A.space.labels(s1)[i]), str(A.space.labels(s2)[j]),
                                                     str(A.space.labels(s3)[k])],
                                           "strata": [_sjson(s1), _sjson(s2), _sjson(s3)]})
    return Report("validate_algebra", True, {"stratum_triples_checked": checked})


def validate_module(M, max_degree=None):
    """(ab)m = a(bm) on loaded strata and the unit acting as identity."""
    A = M.algebra
    Astrata = [s for s in A.strata() if max_degree is None or s[0] <= max_degree]
    Mstrata = [s for s in M.strata() if max_degree is None or s[0] <= max_degree]
    present = set(M.strata())
    e = A.unit_stratum
    for s in Mstrata:
        d = M.dim(s)
        act = M.act(e, s)
        ident = QMatrix.from_columns(d, [{j: Fraction(1)} for j in range(d)])
        cols = act.columns()
        sub = QMatrix.from_columns(d, [cols[A.unit_index * d + j] for j in range(d)])
        if sub != ident:
            return Report("validate_module", False, witness={"law": "unit", "stratum": _sjson(s)})
    checked = 0
    for s1 in Astrata:
        for s2 in Astrata:
            s12 = sadd(s1, s2)
            for s3 in Mstrata:
                if sadd(s12, s3) not in present:
                    continue
                d1, d2, d3 = A.dim(s1), A.dim(s2), M.dim(s3)
                lhs = M.act(s12, s3) @ A.mult(s1, s2).kron(QMatrix.identity(d3))
                rhs = M.act(s1, sadd(s2, s3)) @ QMatrix.identity(d1).kron(M.act(s2, s3))
                checked += 1
                if lhs != rhs:
                    i, j, k = _decode(_first_diff(lhs, rhs), (d1, d2, d3))
                    return Report("validate_module", False, {"triples_checked": checked},
                                  witness={"law": "associativity",
                                           "strata": [_sjson(s1), _sjson(s2), _sjson(s3)],
                                           "basis": [i, j, k]})
    return Report("validate_module", True, {"stratum_triples_checked": checked})


def _sjson(s):
    return {"n": s[0], "a": list(s[1])}


# ---------------------------------------------------------------------------
# module operations

def shift_module(M, j):
    """M(j): component n of M(j) is component n - j of M, and a of internal
    degree n acts with the extra sign (-1)^(j n)."""
    if j == 0:
        return M
    space = GradedSpace(M.u, {(n + j, a): M.space.labels((n, a)) for n, a in M.strata()})

    def action(sA, sM):
        m = M.act(sA, (sM[0] - j, sM[1]))
        return m.scale(-1) if (j * sA[0]) % 2 else m

    name = "%s(%d)" % (M.name, j)
    return GradedModuleData(M.algebra, space, action, name=name)


def restrict_module(M, keep, name=None):
    """Submodule or quotient module on the strata selected by ``keep`` (the
    caller guarantees closure); action entries leaving the selection are
    dropped."""
    space = GradedSpace(M.u, {s: M.space.labels(s) for s in M.strata() if keep(s)})
    return GradedModuleData(M.algebra, space, lambda sA, sM: M.act(sA, sM),
                            name=name or M.name + "|")


def positive_part(M):
    """M_+ : the submodule of internal degrees >= 1."""
    return restrict_module(M, lambda s: s[0] >= 1, name=M.name + "+")


def regular_module(A, name=None):
    return GradedModuleData(A, A.space, lambda s1, s2: A.mult(s1, s2), name=name or A.name)


def trivial_module(A, degree=0, dim=1, name=None):
    """k (or k^dim) concentrated in stratum (degree, 0) with zero action."""
    s = (degree, (0,) * A.u)
    space = GradedSpace(A.u, {s: ["t%d" % i for i in range(dim)]})

    def action(sA, sM):
        # only the unit reaches a loaded stratum
        d = space.dim(sM)
        return QMatrix(d, A.dim(sA) * d, [(k, A.unit_index * d + k, 1) for k in range(d)])

    return GradedModuleData(A, space, action, name=name or "k")


def truncate_algebra(A, N, D):
    space = truncate(A.space, N, D)
    return GradedAlgebraData(space, lambda s1, s2: A.mult(s1, s2), name=A.name + "[<=%d,%d]" % (N, D))


def truncate_module(M, N, D):
    space = truncate(M.space, N, D)
    return GradedModuleData(M.algebra, space, lambda sA, sM: M.act(sA, sM),
                            name=M.name + "[<=%d,%d]" % (N, D))


# ---------------------------------------------------------------------------
# constructors

def _subset_sign(I, J):
    """Sign of sorting the concatenation I + J (both sorted); 0 on overlap."""
    if set(I) & set(J):
        return 0
    inv = 0
    for x in I:
        for y in J:
            if x > y:
                inv += 1
    return -1 if inv % 2 else 1


def exterior_algebra(weights, name="Lambda", labels=None):
    """Exterior algebra on len(weights) generators in internal degree 1,
    generator g carrying multidegree weights[g]."""
    k = len(weights)
    u = len(weights[0]) if k else 0
    weights = [tuple(w) for w in weights]
    if labels is None:
        labels = ["x%d" % g for g in range(k)]
    strata = {}
    for size in range(k + 1):
        for I in _subsets(k, size):
            a = tuple(sum(weights[g][c] for g in I) for c in range(u))
            strata.setdefault((size, a), []).append(I)
    basis = {s: sorted(v) for s, v in strata.items()}
    space = GradedSpace(u, {s: ["^".join(labels[g] for g in I) or "1" for I in v]
                            for s, v in basis.items()})
    index = {s: {I: i for i, I in enumerate(v)} for s, v in basis.items()}

    def mult(s1, s2):
        t = sadd(s1, s2)
        B1, B2 = basis[s1], basis[s2]
        entries = []
        for i, I in enumerate(B1):
            for j, J in enumerate(B2):
                sg = _subset_sign(I, J)
                if sg:
                    K = tuple(sorted(I + J))
                    entries.append((index[t][K], i * len(B2) + j, sg))
        return QMatrix(len(basis[t]), len(B1) * len(B2), entries)

    A = GradedAlgebraData(space, mult, name=name)
    A.subsets = basis
    return A


def _subsets(k, size):
    from itertools import combinations
    return list(combinations(range(k), size))


def truncated_polynomial(top, name=None):
    """k<x>/(x^top) with x in internal degree 1 and trivial multidegree."""
    strata = {(n, ()): ["x^%d" % n] for n in range(top)}
    space = GradedSpace(0, strata)

    def mult(s1, s2):
        return QMatrix(1, 1, [(0, 0, 1)])

    return GradedAlgebraData(space, mult, name=name or "k<x>/(x^%d)" % top)


def quadratic_algebra(ngens, relations, N, name="quadratic"):
    """T(V)/(R) up to internal degree N, with trivial multidegree.

    ``relations`` are dicts ``{(i, j): coeff}`` on V (x) V.  Each component
    A_n is V^(x)n modulo the relation ideal, represented by standard words
    (the non-pivot words of the ideal's echelon basis).
    """
    def widx(word):
        x = 0
        for g in word:
            x = x * ngens + g
        return x

    def word(x, n):
        out = []
        for _ in range(n):
            out.append(x % ngens)
            x //= ngens
        return tuple(reversed(out))

    ideals = {}
    std = {}
    for n in range(N + 1):
        vecs = []
        for s in range(n - 1):
            for left in iproduct(range(ngens), repeat=s):
                for right in iproduct(range(ngens), repeat=n - 2 - s):
                    for rel in relations:
                        vec = {}
                        for (i, j), c in rel.items():
                            w = widx(left + (i, j) + right)
                            vec[w] = vec.get(w, 0) + Fraction(c)
                        vec = {k: v for k, v in vec.items() if v}
                        if vec:
                            vecs.append(vec)
        I = Subspace(ngens ** n, vecs)
        ideals[n] = I
        piv = set(I.pivots)
        std[n] = [w for w in range(ngens ** n) if w not in piv]
    pos = {n: {w: i for i, w in enumerate(std[n])} for n in std}
    space = GradedSpace(0, {(n, ()): ["".join("xyzwabcdefgh"[g] for g in word(w, n)) or "1" for w in std[n]]
                            for n in std})

    def mult(s1, s2):
        n1, n2 = s1[0], s2[0]
        n = n1 + n2
        entries = []
        d2 = len(std[n2])
        for i, w1 in enumerate(std[n1]):
            for j, w2 in enumerate(std[n2]):
                w = w1 * ngens ** n2 + w2
                red = ideals[n].reduce({w: Fraction(1)})
                for x, v in red.items():
                    entries.append((pos[n][x], i * d2 + j, v))
        return QMatrix(len(std[n]), len(std[n1]) * d2, entries)

    return GradedAlgebraData(space, mult, name=name)


def algebra_with_table(u, strata, products, name="table"):
    """Algebra from explicit labels and a nonzero product table
    ``{(label1, label2): {label: coeff}}``; the unit label must be '1'."""
    space = GradedSpace(u, strata)
    where = {}
    for s in space.strata():
        for i, l in enumerate(space.labels(s)):
            where[l] = (s, i)

    def mult(s1, s2):
        t = sadd(s1, s2)
        d2 = space.dim(s2)
        entries = []
        for i, l1 in enumerate(space.labels(s1)):
            for j, l2 in enumerate(space.labels(s2)):
                if l1 == "1":
                    res = {l2: 1}
                elif l2 == "1":
                    res = {l1: 1}
                else:
                    res = products.get((l1, l2), {})
                for l, c in res.items():
                    st, k = where[l]
                    if st != t:
                        raise ValueError("product %s*%s not homogeneous" % (l1, l2))
                    entries.append((k, i * d2 + j, c))
        return QMatrix(space.dim(t), space.dim(s1) * d2, entries)

    return GradedAlgebraData(space, mult, name=name)
