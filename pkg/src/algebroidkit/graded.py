"""Graded bundles, graded matrices and endomorphism-valued E-forms.

Forms are stored on the ordered basis ``e^{I_1} ^ ... ^ e^{I_k}`` with
``I_1 < ... < I_k``.  Each stored coefficient is a dense object matrix of
:class:`~algebroidkit.poly.Poly` mapping the source bundle to the target
bundle; the endomorphism degree of an entry is read off its position, so
inhomogeneous forms (like a superconnection's total form) need no extra
bookkeeping.

Sign rule: form generators are odd, an entry mapping degree ``a`` to degree
``b`` has parity ``b - a``, and moving a parity-``x`` symbol past a parity-``y``
symbol costs ``(-1)**(x*y)``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import factorial

import numpy as np

from .poly import Poly


def sort_sign(seq):
    """Sort ``seq``; return ``(sorted_tuple, sign)`` or ``(None, 0)`` on a repeat."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return None, 0
    sign = 1
    # insertion sort keeps the inversion count explicit
    arr = seq[:]
    for i in range(1, len(arr)):
        j = i
        while j > 0 and arr[j - 1] > arr[j]:
            arr[j - 1], arr[j] = arr[j], arr[j - 1]
            sign = -sign
            j -= 1
    return tuple(arr), sign


def merge_sign(a, b):
    """Shuffle sign for ``e^a ^ e^b`` with both index tuples increasing."""
    if set(a) & set(b):
        return None, 0
    inv = 0
    for x in a:
        for y in b:
            if x > y:
                inv += 1
    return tuple(sorted(a + b)), (-1 if inv % 2 else 1)


class GradedBundle:
    """Ranks of a Z-graded vector bundle, indexed by degree.

    Fiber indices are laid out by increasing degree.
    """

    def __init__(self, ranks):
        clean = {}
        for k, r in dict(ranks).items():
            r = int(r)
            if r < 0:
                raise ValueError(f"negative rank {r} in degree {k}")
            if r:
                clean[int(k)] = r
        self.ranks = dict(sorted(clean.items()))
        degs = []
        for k, r in self.ranks.items():
            degs.extend([k] * r)
        self.degrees = np.array(degs, dtype=np.int64)
        self.total = len(degs)
        self.parity = (self.degrees % 2).astype(np.int64)
        self.signs = np.where(self.parity == 1, -1, 1).astype(np.int64)

    def offset(self, k):
        off = 0
        for d, r in self.ranks.items():
            if d == k:
                return off
            off += r
        raise KeyError(k)

    def indices(self, k):
        if k not in self.ranks:
            return range(0)
        o = self.offset(k)
        return range(o, o + self.ranks[k])

    def __eq__(self, other):
        return isinstance(other, GradedBundle) and self.ranks == other.ranks

    def __hash__(self):
        return hash(tuple(self.ranks.items()))

    def __repr__(self):
        return f"GradedBundle({self.ranks})"


LINE = GradedBundle({0: 1})


def poly_zeros(shape, nvars):
    out = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        out[idx] = Poly(nvars)
    return out


def poly_identity(n, nvars):
    out = poly_zeros((n, n), nvars)
    for i in range(n):
        out[i, i] = Poly.const(1, nvars)
    return out


def as_poly_matrix(data, nvars):
    arr = np.asarray(data, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(*arr.shape):
        x = arr[idx]
        out[idx] = x if isinstance(x, Poly) else Poly.const(x, nvars)
    return out


def is_zero_matrix(m):
    return all(not x for x in m.flat)


def degree_map(target, source):
    """Endomorphism degree of every entry of a ``target x source`` matrix."""
    return target.degrees[:, None] - source.degrees[None, :]


def parity_twist(m, target, source):
    """Entrywise ``(-1)**parity``: the matrix part moved past one odd symbol."""
    sgn = target.signs[:, None] * source.signs[None, :]
    out = m.copy()
    for (i, j), s in np.ndenumerate(sgn):
        if s < 0:
            out[i, j] = -out[i, j]
    return out


def matmul(a, b, nvars):
    if a.shape[1] == 0:
        return poly_zeros((a.shape[0], b.shape[1]), nvars)
    return a @ b


class GradedMatrix:
    """Homogeneous map ``V^k -> V'^{k+p}`` with polynomial entries."""

    def __init__(self, source, target, degree, data, nvars):
        self.source = source
        self.target = target
        self.degree = int(degree)
        self.nvars = nvars
        data = as_poly_matrix(data, nvars)
        if data.shape != (target.total, source.total):
            raise ValueError(f"matrix shape {data.shape} does not match bundles "
                             f"({target.total}, {source.total})")
        off = degree_map(target, source) != self.degree
        for (i, j), bad in np.ndenumerate(off):
            if bad and data[i, j]:
                raise ValueError(f"entry ({i}, {j}) is off-degree for a degree-{degree} map")
        self.data = data

    @classmethod
    def from_blocks(cls, source, target, degree, blocks, nvars):
        data = poly_zeros((target.total, source.total), nvars)
        for k, blk in blocks.items():
            blk = as_poly_matrix(blk, nvars)
            rows = list(target.indices(k + degree))
            cols = list(source.indices(k))
            if blk.shape != (len(rows), len(cols)):
                raise ValueError(f"block for degree {k} has shape {blk.shape}, "
                                 f"expected {(len(rows), len(cols))}")
            for a, i in enumerate(rows):
                for b, j in enumerate(cols):
                    data[i, j] = blk[a, b]
        return cls(source, target, degree, data, nvars)

    def block(self, k):
        rows = list(self.target.indices(k + self.degree))
        cols = list(self.source.indices(k))
        return self.data[np.ix_(rows, cols)] if rows and cols else poly_zeros((len(rows), len(cols)), self.nvars)

    def blocks(self):
        return {k: self.block(k) for k in self.source.ranks if k + self.degree in self.target.ranks}

    def is_zero(self):
        return is_zero_matrix(self.data)

    def __eq__(self, other):
        return (isinstance(other, GradedMatrix) and self.source == other.source
                and self.target == other.target and np.array_equal(self.data, other.data))

    def __repr__(self):
        return f"GradedMatrix(degree={self.degree}, {self.target.ranks}<-{self.source.ranks})"


def supertrace_matrix(m, bundle):
    """Sum over ``k`` of ``(-1)**k`` times the trace of the degree-k diagonal block."""
    if m.shape[0] != m.shape[1] or m.shape[0] != bundle.total:
        raise ValueError("supertrace needs a square matrix on the bundle")
    total = None
    for i in range(bundle.total):
        term = m[i, i] if bundle.signs[i] > 0 else -m[i, i]
        total = term if total is None else total + term
    return total


def supertrace(m):
    """Supertrace of a degree-0 :class:`GradedMatrix`."""
    if isinstance(m, GradedMatrix):
        if m.source != m.target:
            raise ValueError("supertrace needs an endomorphism")
        if m.degree != 0:
            raise ValueError(f"supertrace needs degree 0, got {m.degree}")
        out = supertrace_matrix(m.data, m.source)
        return Poly(m.nvars) if out is None else out
    if isinstance(m, SuperForm):
        return m.supertrace()
    from .grassmann import GrassmannElement

    if isinstance(m, GrassmannElement):
        return m.supertrace()
    raise TypeError(f"cannot take a supertrace of {type(m).__name__}")


class SuperForm:
    """Element of Omega(E, Hom(V, V')) on the ordered basis.

    ``terms`` maps strictly increasing index tuples to object matrices of
    shape ``(target.total, source.total)``.
    """

    def __init__(self, rank, nvars, source, target, terms=None):
        self.rank = int(rank)
        self.nvars = int(nvars)
        self.source = source
        self.target = target
        clean = {}
        for idx, m in (terms or {}).items():
            idx = tuple(idx)
            if list(idx) != sorted(set(idx)):
                raise ValueError(f"multi-index {idx} is not strictly increasing")
            if idx and (idx[0] < 0 or idx[-1] >= self.rank):
                raise ValueError(f"multi-index {idx} out of range for rank {self.rank}")
            m = as_poly_matrix(m, self.nvars)
            if m.shape != (target.total, source.total):
                raise ValueError(f"coefficient shape {m.shape} does not match bundles")
            if not is_zero_matrix(m):
                clean[idx] = m
        self.terms = clean

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, rank, nvars, source=LINE, target=None):
        return cls(rank, nvars, source, source if target is None else target)

    @classmethod
    def scalar(cls, rank, nvars, components):
        """Scalar-valued form from ``{indices: Poly or number}``."""
        return cls(rank, nvars, LINE, LINE, {k: [[v]] for k, v in components.items()})

    @classmethod
    def from_matrix(cls, rank, nvars, source, target, matrix, indices=()):
        return cls(rank, nvars, source, target, {tuple(indices): matrix})

    @classmethod
    def identity(cls, rank, nvars, bundle):
        return cls(rank, nvars, bundle, bundle, {(): poly_identity(bundle.total, nvars)})

    def _like(self, terms, source=None, target=None):
        return SuperForm(self.rank, self.nvars, source or self.source, target or self.target, terms)

    # -- queries ------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, SuperForm):
            return NotImplemented
        if (self.rank, self.nvars, self.source, self.target) != (other.rank, other.nvars, other.source, other.target):
            return False
        if self.terms.keys() != other.terms.keys():
            return False
        return all(np.array_equal(self.terms[k], other.terms[k]) for k in self.terms)

    def __hash__(self):
        return hash((self.rank, self.nvars, tuple(sorted(self.terms))))

    def total_degrees(self):
        """Set of total degrees (form + endomorphism) carried by nonzero entries."""
        dm = degree_map(self.target, self.source)
        out = set()
        for idx, m in self.terms.items():
            for (i, j), x in np.ndenumerate(m):
                if x:
                    out.add(len(idx) + int(dm[i, j]))
        return out

    def total_degree(self):
        degs = self.total_degrees()
        if len(degs) > 1:
            raise ValueError(f"form is not homogeneous: total degrees {sorted(degs)}")
        return degs.pop() if degs else None

    def bidegrees(self):
        dm = degree_map(self.target, self.source)
        out = set()
        for idx, m in self.terms.items():
            for (i, j), x in np.ndenumerate(m):
                if x:
                    out.add((len(idx), int(dm[i, j])))
        return out

    def part(self, form_degree=None, endo_degree=None):
        """Restrict to the given form degree and/or endomorphism degree."""
        dm = degree_map(self.target, self.source)
        terms = {}
        for idx, m in self.terms.items():
            if form_degree is not None and len(idx) != form_degree:
                continue
            if endo_degree is None:
                terms[idx] = m
                continue
            mm = m.copy()
            for (i, j), d in np.ndenumerate(dm):
                if d != endo_degree:
                    mm[i, j] = Poly(self.nvars)
            terms[idx] = mm
        return self._like(terms)

    def component(self, indices):
        """Alternating component for an arbitrary index tuple."""
        key, sign = sort_sign(indices)
        if key is None or key not in self.terms:
            return poly_zeros((self.target.total, self.source.total), self.nvars)
        m = self.terms[key]
        return m if sign > 0 else -m

    def coefficient(self, indices):
        return self.terms.get(tuple(indices), poly_zeros((self.target.total, self.source.total), self.nvars))

    # -- linear structure ---------------------------------------------
    def _check_same(self, other):
        if not isinstance(other, SuperForm):
            raise TypeError(f"expected SuperForm, got {type(other).__name__}")
        if (self.rank, self.nvars) != (other.rank, other.nvars):
            raise ValueError("rank or variable-count mismatch")
        if self.source != other.source or self.target != other.target:
            raise ValueError("bundle mismatch")

    def __add__(self, other):
        self._check_same(other)
        terms = dict(self.terms)
        for k, m in other.terms.items():
            terms[k] = terms[k] + m if k in terms else m
        return self._like(terms)

    def __neg__(self):
        return self._like({k: -m for k, m in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        """Multiply by a rational number or a polynomial function (even, degree 0)."""
        if isinstance(c, Poly):
            return self._like({k: m * c for k, m in self.terms.items()})
        c = Fraction(c)
        return self._like({k: m * c for k, m in self.terms.items()})

    __rmul__ = scale

    def map_entries(self, fn):
        out = {}
        for k, m in self.terms.items():
            mm = np.empty(m.shape, dtype=object)
            for idx, x in np.ndenumerate(m):
                mm[idx] = fn(x)
            out[k] = mm
        return self._like(out)

    def partial(self, mu):
        return self.map_entries(lambda p: p.partial(mu))

    def supertrace(self):
        if self.source != self.target:
            raise ValueError("supertrace needs an endomorphism-valued form")
        terms = {}
        for k, m in self.terms.items():
            s = supertrace_matrix(m, self.source)
            if s is not None:
                terms[k] = [[s]]
        return SuperForm(self.rank, self.nvars, LINE, LINE, terms)

    def conjugate(self, g, ginv, source_g=None):
        """Constant conjugation ``g w g^{-1}`` by degree-preserving matrices."""
        sg = ginv if source_g is None else source_g
        return self._like({k: matmul(matmul(as_poly_matrix(g, self.nvars), m, self.nvars),
                                     as_poly_matrix(sg, self.nvars), self.nvars)
                           for k, m in self.terms.items()})

    def __repr__(self):
        body = ", ".join(f"{k}: ..." for k in sorted(self.terms))
        return f"SuperForm(rank={self.rank}, {self.target.ranks}<-{self.source.ranks}, {{{body}}})"


def wedge(w, e):
    """Graded product ``w ^ e`` (``w`` composed after ``e``)."""
    if not isinstance(w, SuperForm) or not isinstance(e, SuperForm):
        raise TypeError("wedge expects SuperForm operands")
    if w.rank != e.rank or w.nvars != e.nvars:
        raise ValueError("rank or variable-count mismatch")
    if w.source != e.target:
        raise ValueError(f"cannot compose: {w.source} is not {e.target}")
    out = {}
    nv = w.nvars
    for I, X in w.terms.items():
        Xt = None
        for J, Y in e.terms.items():
            K, s = merge_sign(I, J)
            if K is None:
                continue
            if len(J) % 2:
                if Xt is None:
                    Xt = parity_twist(X, w.target, w.source)
                Z = matmul(Xt, Y, nv)
            else:
                Z = matmul(X, Y, nv)
            if s < 0:
                Z = -Z
            out[K] = out[K] + Z if K in out else Z
    return SuperForm(w.rank, nv, e.source, w.target, out)


def gcommutator(w, e):
    """Graded commutator of homogeneous forms."""
    if w.is_zero() or e.is_zero():
        # zero is homogeneous of every degree; the bundles still have to fit
        if w.source != e.target or e.source != w.target:
            raise ValueError("bundle mismatch")
        return SuperForm(w.rank, w.nvars, e.source, w.target)
    a = w.total_degree()
    b = e.total_degree()
    first = wedge(w, e)
    second = wedge(e, w)
    return first - second if (a * b) % 2 == 0 else first + second


def alternation(w, k):
    """Alternating components ``w_{I_1...I_k}`` for every index tuple (dense view)."""
    from itertools import product

    return {idx: w.component(idx) for idx in product(range(w.rank), repeat=k)}


def alt_wedge_component(w, e, indices, k, l, p):
    """Component of ``w ^ e`` via the factor ``(k+l)!/(k!l!) (-1)**(p l)`` after antisymmetrization.

    ``w`` is homogeneous of bidegree ``(k, p)`` and ``e`` has form degree ``l``.
    Used as an independent oracle for :func:`wedge`.
    """
    from itertools import permutations

    n = k + l
    acc = poly_zeros((w.target.total, e.source.total), w.nvars)
    for perm in permutations(range(n)):
        _, s = sort_sign(perm)
        idx = [indices[i] for i in perm]
        prod = matmul(w.component(idx[:k]), e.component(idx[k:]), w.nvars)
        acc = acc + (prod if s > 0 else -prod)
    coef = Fraction(factorial(n), factorial(k) * factorial(l) * factorial(n))
    if (p * l) % 2:
        coef = -coef
    return acc * coef


def all_multi_indices(rank, k):
    return list(combinations(range(rank), k))
