"""
Exact sparse linear algebra over the rationals.

Matrices act on column vectors: an ``r x c`` matrix maps Q^c to Q^r.
Vectors are sparse dicts ``{index: Fraction}`` without zero values.
Elimination runs on primitive integer rows (fraction-free), and
fractions only appear when a reduced echelon form is normalized.
"""

from fractions import Fraction
from math import gcd
import heapq
import json


class LatticeCapExceeded(RuntimeError):
    pass


def as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def fstr(x):
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return "%d/%d" % (x.numerator, x.denominator)


class QMatrix:
    """Immutable sparse rational matrix stored by rows."""

    __slots__ = ("rows", "cols", "_data", "_hash")

    def __init__(self, rows, cols, entries=()):
        if rows < 0 or cols < 0:
            raise ValueError("negative shape")
        data = {}
        for r, c, v in entries:
            if not (0 <= r < rows and 0 <= c < cols):
                raise IndexError("entry (%d, %d) outside %dx%d" % (r, c, rows, cols))
            row = data.setdefault(r, {})
            if c in row:
                raise ValueError("duplicate entry (%d, %d)" % (r, c))
            v = as_fraction(v)
            row[c] = v
        for r in list(data):
            row = data[r]
            for c in [c for c, v in row.items() if v == 0]:
                del row[c]
            if not row:
                del data[r]
        self.rows = rows
        self.cols = cols
        self._data = data
        self._hash = None

    @classmethod
    def _from_rowdicts(cls, rows, cols, data):
        # trusted constructor: data has no zeros and no empty rows
        m = cls.__new__(cls)
        m.rows = rows
        m.cols = cols
        m._data = data
        m._hash = None
        return m

    @classmethod
    def from_dense(cls, dense, cols=None):
        dense = [list(r) for r in dense]
        rows = len(dense)
        if cols is None:
            cols = len(dense[0]) if dense else 0
        entries = [(i, j, v) for i, r in enumerate(dense) for j, v in enumerate(r) if v != 0]
        return cls(rows, cols, entries)

    @classmethod
    def from_columns(cls, rows, columns):
        """Build from a list of sparse column vectors."""
        data = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    data.setdefault(i, {})[j] = Fraction(v)
        return cls._from_rowdicts(rows, len(columns), data)

    @classmethod
    def from_rows(cls, rowvecs, cols):
        data = {}
        for i, vec in enumerate(rowvecs):
            row = {c: Fraction(v) for c, v in vec.items() if v}
            if row:
                data[i] = row
        return cls._from_rowdicts(len(rowvecs), cols, data)

    @classmethod
    def zeros(cls, rows, cols):
        return cls._from_rowdicts(rows, cols, {})

    @classmethod
    def identity(cls, n):
        return cls._from_rowdicts(n, n, {i: {i: Fraction(1)} for i in range(n)})

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def nnz(self):
        return sum(len(r) for r in self._data.values())

    def __getitem__(self, key):
        r, c = key
        return self._data.get(r, {}).get(c, Fraction(0))

    def row(self, r):
        return dict(self._data.get(r, {}))

    def nonzero_rows(self):
        return [dict(self._data[r]) for r in sorted(self._data)]

    def triples(self):
        for r in sorted(self._data):
            row = self._data[r]
            for c in sorted(row):
                yield r, c, row[c]

    def columns(self):
        cols = [dict() for _ in range(self.cols)]
        for r, row in self._data.items():
            for c, v in row.items():
                cols[c][r] = v
        return cols

    def to_dense(self):
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for r, c, v in self.triples():
            out[r][c] = v
        return out

    def is_zero(self):
        return not self._data

    def transpose(self):
        data = {}
        for r, row in self._data.items():
            for c, v in row.items():
                data.setdefault(c, {})[r] = v
        return QMatrix._from_rowdicts(self.cols, self.rows, data)

    T = property(transpose)

    def apply(self, vec):
        """Matrix times sparse column vector."""
        out = {}
        for r, row in self._data.items():
            s = 0
            for c, v in row.items():
                x = vec.get(c)
                if x:
                    s += v * x
            if s:
                out[r] = Fraction(s)
        return out

    def __matmul__(self, other):
        if isinstance(other, dict):
            return self.apply(other)
        if self.cols != other.rows:
            raise ValueError("shape mismatch %s @ %s" % (self.shape, other.shape))
        odata = other._data
        data = {}
        for r, row in self._data.items():
            acc = {}
            for k, v in row.items():
                orow = odata.get(k)
                if not orow:
                    continue
                for c, w in orow.items():
                    acc[c] = acc.get(c, 0) + v * w
            acc = {c: x for c, x in acc.items() if x}
            if acc:
                data[r] = acc
        return QMatrix._from_rowdicts(self.rows, other.cols, data)

    def _combine(self, other, sign):
        if self.shape != other.shape:
            raise ValueError("shape mismatch %s vs %s" % (self.shape, other.shape))
        data = {r: dict(row) for r, row in self._data.items()}
        for r, row in other._data.items():
            tgt = data.setdefault(r, {})
            for c, v in row.items():
                x = tgt.get(c, 0) + sign * v
                if x:
                    tgt[c] = x
                else:
                    tgt.pop(c, None)
            if not tgt:
                del data[r]
        return QMatrix._from_rowdicts(self.rows, self.cols, data)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, s):
        s = Fraction(s)
        if s == 0:
            return QMatrix.zeros(self.rows, self.cols)
        data = {r: {c: v * s for c, v in row.items()} for r, row in self._data.items()}
        return QMatrix._from_rowdicts(self.rows, self.cols, data)

    def kron(self, other):
        """Kronecker product; index (i, j) maps to i * other_dim + j."""
        data = {}
        for r1, row1 in self._data.items():
            for r2, row2 in other._data.items():
                row = {}
                for c1, v1 in row1.items():
                    base = c1 * other.cols
                    for c2, v2 in row2.items():
                        row[base + c2] = v1 * v2
                data[r1 * other.rows + r2] = row
        return QMatrix._from_rowdicts(self.rows * other.rows, self.cols * other.cols, data)

    def __eq__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, tuple(self.triples())))
        return self._hash

    def __repr__(self):
        return "QMatrix(%d, %d, nnz=%d)" % (self.rows, self.cols, self.nnz)

    def to_json(self):
        return {"rows": self.rows, "cols": self.cols,
                "matrix": [[r, c, fstr(v)] for r, c, v in self.triples()]}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(obj["rows"], obj["cols"], [(r, c, Fraction(v)) for r, c, v in obj["matrix"]])

    def rank(self):
        return rank(self)


def vstack(mats, cols=None):
    if cols is None:
        cols = mats[0].cols
    data = {}
    off = 0
    for m in mats:
        if m.cols != cols:
            raise ValueError("column mismatch")
        for r, row in m._data.items():
            data[off + r] = dict(row)
        off += m.rows
    return QMatrix._from_rowdicts(off, cols, data)


def hstack(mats, rows=None):
    return vstack([m.transpose() for m in mats], rows).transpose()


# ---------------------------------------------------------------------------
# elimination on integer rows

def _primitive(row):
    """Scale a rational/integer sparse row to a primitive integer row with
    positive leading coefficient."""
    den = 1
    for v in row.values():
        if isinstance(v, Fraction) and v.denominator != 1:
            den = den * v.denominator // gcd(den, v.denominator)
    out = {}
    g = 0
    for c, v in row.items():
        x = int(v * den) if den != 1 or isinstance(v, Fraction) else v
        if x:
            out[c] = x
            g = gcd(g, x)
    if not out:
        return out
    lead = out[min(out)]
    if lead < 0:
        g = -g
    if g != 1:
        out = {c: x // g for c, x in out.items()}
    return out


def _content_reduce(row):
    g = 0
    for x in row.values():
        g = gcd(g, x)
        if g == 1:
            return row
    if g > 1:
        return {c: x // g for c, x in row.items()}
    return row


def _eliminate(row, piv, col):
    """row - (row[col]/piv[col]) piv, scaled to stay integral."""
    p = piv[col]
    q = row[col]
    g = gcd(p, q)
    p //= g
    q //= g
    out = {c: p * x for c, x in row.items()}
    for c, x in piv.items():
        y = out.get(c, 0) - q * x
        if y:
            out[c] = y
        else:
            out.pop(c, None)
    return _content_reduce(out)


def _cost(row, col):
    return (abs(row[col]).bit_length(), len(row))


def echelon(rowvecs):
    """Integer echelon form.  Returns a list of (pivot_col, int_row) sorted by
    pivot.  Pivot choice at each column: smallest leading bit-length, then
    sparsest row."""
    heap = []
    serial = 0
    for vec in rowvecs:
        row = _primitive(vec)
        if row:
            heap.append((min(row), serial, row))
            serial += 1
    heapq.heapify(heap)
    out = []
    while heap:
        col = heap[0][0]
        group = []
        while heap and heap[0][0] == col:
            group.append(heapq.heappop(heap)[2])
        best = min(range(len(group)), key=lambda k: _cost(group[k], col))
        piv = group.pop(best)
        out.append((col, piv))
        for row in group:
            row = _eliminate(row, piv, col)
            if row:
                heapq.heappush(heap, (min(row), serial, row))
                serial += 1
    return out


def rref(rowvecs):
    """Reduced row echelon form as a list of (pivot, Fraction row) with
    leading coefficient 1."""
    ech = echelon(rowvecs)
    pivots = [c for c, _ in ech]
    rows = [r for _, r in ech]
    for i in range(len(rows) - 1, -1, -1):
        c = pivots[i]
        piv = rows[i]
        for k in range(i):
            if c in rows[k]:
                rows[k] = _eliminate(rows[k], piv, c)
    out = []
    for c, row in zip(pivots, rows):
        lead = row[c]
        if lead == 1:
            out.append((c, {j: Fraction(x) for j, x in row.items()}))
        else:
            out.append((c, {j: Fraction(x, lead) for j, x in row.items()}))
    return out


def rank(M):
    if isinstance(M, QMatrix):
        vecs = M.nonzero_rows() if M.rows <= M.cols else M.transpose().nonzero_rows()
    else:
        vecs = M
    return len(echelon(vecs))


def kernel_vectors(M):
    """Basis of {x : M x = 0} as sparse vectors (not yet canonical)."""
    red = rref(M.nonzero_rows())
    pivset = {c for c, _ in red}
    free = [j for j in range(M.cols) if j not in pivset]
    freeset = set(free)
    # column view of the reduced rows restricted to free columns
    byfree = {f: {} for f in free}
    for c, row in red:
        for j, v in row.items():
            if j in freeset:
                byfree[j][c] = -v
    vecs = []
    for f in free:
        vec = byfree[f]
        vec[f] = Fraction(1)
        vecs.append(vec)
    return vecs, len(red)


class Subspace:
    """A subspace of Q^n held as its reduced row-echelon basis."""

    __slots__ = ("ambient_dim", "_rows", "_pivots", "_key")

    def __init__(self, ambient_dim, vectors=(), _reduced=None):
        self.ambient_dim = ambient_dim
        if _reduced is None:
            vectors = list(vectors)
            for v in vectors:
                for c in v:
                    if not 0 <= c < ambient_dim:
                        raise IndexError("coordinate %d outside ambient %d" % (c, ambient_dim))
            _reduced = rref(vectors)
        self._pivots = tuple(c for c, _ in _reduced)
        self._rows = tuple(r for _, r in _reduced)
        self._key = None

    @classmethod
    def full(cls, n):
        return cls(n, _reduced=[(i, {i: Fraction(1)}) for i in range(n)])

    @classmethod
    def zero(cls, n):
        return cls(n, _reduced=[])

    @property
    def dim(self):
        return len(self._rows)

    @property
    def pivots(self):
        return self._pivots

    @property
    def rows(self):
        return [dict(r) for r in self._rows]

    @property
    def basis(self):
        return QMatrix.from_rows(list(self._rows), self.ambient_dim)

    def key(self):
        if self._key is None:
            self._key = (self.ambient_dim,
                         tuple(tuple(sorted(r.items())) for r in self._rows))
        return self._key

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "Subspace(dim=%d, ambient=%d)" % (self.dim, self.ambient_dim)

    def reduce(self, vec):
        """Subtract the combination of basis rows that clears every pivot
        coordinate of vec."""
        out = dict(vec)
        for c, row in zip(self._pivots, self._rows):
            x = out.get(c)
            if x:
                for j, v in row.items():
                    y = out.get(j, 0) - x * v
                    if y:
                        out[j] = y
                    else:
                        out.pop(j, None)
        return out

    def contains(self, vec):
        return not self.reduce(vec)

    def __contains__(self, vec):
        return self.contains(vec)

    def coords(self, vec, check=True):
        """Coordinates of vec in the echelon basis."""
        c = [vec.get(p, Fraction(0)) for p in self._pivots]
        if check and not self.contains(vec):
            raise ValueError("vector not in subspace")
        return c

    def coords_dict(self, vec, check=True):
        out = {}
        for i, p in enumerate(self._pivots):
            x = vec.get(p)
            if x:
                out[i] = x
        if check and not self.contains(vec):
            raise ValueError("vector not in subspace")
        return out

    def _check(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch: %d vs %d"
                             % (self.ambient_dim, other.ambient_dim))

    def sum(self, other):
        self._check(other)
        return Subspace(self.ambient_dim, list(self._rows) + list(other._rows))

    __add__ = sum

    def intersect(self, other):
        """Zassenhaus: rows [x|x] and [y|0]; rows with empty left half span
        the intersection."""
        self._check(other)
        n = self.ambient_dim
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(n)
        if self.dim == n:
            return other
        if other.dim == n:
            return self
        vecs = []
        for r in self._rows:
            v = dict(r)
            for c, x in r.items():
                v[c + n] = x
            vecs.append(v)
        vecs.extend(dict(r) for r in other._rows)
        meet = []
        for c, row in echelon(vecs):
            if c >= n:
                meet.append({j - n: x for j, x in row.items()})
        return Subspace(n, meet)

    __and__ = intersect

    def __le__(self, other):
        self._check(other)
        return all(other.contains(r) for r in self._rows)


def rank_kernel_image(M):
    """(rank, kernel subspace of Q^cols, image subspace of Q^rows)."""
    vecs, r = kernel_vectors(M)
    kernel = Subspace(M.cols, vecs)
    image = Subspace(M.rows, M.transpose().nonzero_rows())
    if image.dim != r:
        raise AssertionError("row rank %d != column rank %d" % (r, image.dim))
    return r, kernel, image


def kernel(M):
    vecs, _ = kernel_vectors(M)
    return Subspace(M.cols, vecs)


def image(M):
    return Subspace(M.rows, M.transpose().nonzero_rows())


class Quotient:
    """Quotient top/sub with representatives reduced modulo sub."""

    def __init__(self, top, sub):
        if not sub <= top:
            raise ValueError("sub is not contained in top")
        self.top = top
        self.sub = sub
        reps = [sub.reduce(r) for r in top.rows]
        self.reps = Subspace(top.ambient_dim, [r for r in reps if r])

    @property
    def dim(self):
        return self.reps.dim

    def coords_dict(self, vec):
        return self.reps.coords_dict(self.sub.reduce(vec))

    def representatives(self):
        return self.reps.rows


def is_distributive(collection, cap=4096):
    """Close the collection under sum and intersection and test
    X & (Y + W) == (X & Y) + (X & W) on every triple.

    Returns (verdict, witness) with witness a violating triple or None.
    """
    collection = list(collection)
    if not collection:
        return True, None
    n = collection[0].ambient_dim
    for X in collection:
        if X.ambient_dim != n:
            raise ValueError("ambient dimension mismatch")
    elems = []
    index = {}
    for X in collection:
        if X not in index:
            index[X] = len(elems)
            elems.append(X)
    meet = {}
    join = {}
    done = 0
    # pairs (i, j) with j < done were already processed
    while True:
        size = len(elems)
        for i in range(size):
            for j in range(i if i >= done else done, size):
                for table, op in ((meet, Subspace.intersect), (join, Subspace.sum)):
                    if (i, j) in table:
                        continue
                    Z = op(elems[i], elems[j])
                    k = index.get(Z)
                    if k is None:
                        if len(elems) >= cap:
                            raise LatticeCapExceeded(
                                "generated lattice exceeds cap of %d elements" % cap)
                        k = index[Z] = len(elems)
                        elems.append(Z)
                    table[(i, j)] = table[(j, i)] = k
        if len(elems) == size:
            break
        done = size
    L = len(elems)
    for x in range(L):
        for y in range(L):
            for w in range(L):
                lhs = meet[(x, join[(y, w)])]
                rhs = join[(meet[(x, y)], meet[(x, w)])]
                if lhs != rhs:
                    return False, (elems[x], elems[y], elems[w])
    return True, None


def lattice_closure_size(collection, cap=4096):
    """Number of elements in the lattice generated by the collection."""
    elems = set(collection)
    frontier = list(elems)
    while frontier:
        new = []
        cur = list(elems)
        for X in frontier:
            for Y in cur:
                for Z in (X & Y, X + Y):
                    if Z not in elems:
                        elems.add(Z)
                        new.append(Z)
                        if len(elems) > cap:
                            raise LatticeCapExceeded("cap %d" % cap)
        frontier = new
    return len(elems)
