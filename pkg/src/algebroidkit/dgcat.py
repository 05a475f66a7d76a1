"""Morphism complexes between representations up to homotopy."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from . import linalg
from .algebroid import d_E_apply
from .graded import SuperForm, poly_zeros, wedge
from .homotopy import assemble_alpha
from .poly import Poly


class MorphismComplex:
    """``Omega(E, Hom(V, V'))`` with differential ``d_E w + alpha' w - (-1)^k w alpha``."""

    def __init__(self, source, target):
        if source.chart is not target.chart and (source.chart.n, source.chart.r) != (target.chart.n, target.chart.r):
            raise ValueError("superconnections live on different charts")
        self.source = source
        self.target = target
        self.chart = source.chart
        self.alpha = assemble_alpha(source)
        self.alpha_t = assemble_alpha(target)

    def degree_range(self):
        V, W = self.source.bundle, self.target.bundle
        if not V.total or not W.total:
            return range(0)
        lo = int(W.degrees.min()) - int(V.degrees.max())
        hi = self.chart.r + int(W.degrees.max()) - int(V.degrees.min())
        return range(lo, hi + 1)

    def basis(self, m):
        """Elementary forms ``e^I (x) E_{ij}`` of total degree ``m`` (over any base)."""
        V, W = self.source.bundle, self.target.bundle
        out = []
        for k in range(self.chart.r + 1):
            for I in combinations(range(self.chart.r), k):
                for i in range(W.total):
                    for j in range(V.total):
                        if k + int(W.degrees[i]) - int(V.degrees[j]) == m:
                            out.append((I, i, j))
        return out

    def element(self, I, i, j):
        ch = self.chart
        mat = poly_zeros((self.target.bundle.total, self.source.bundle.total), ch.n)
        mat[i, j] = Poly.const(1, ch.n)
        return SuperForm(ch.r, ch.n, self.source.bundle, self.target.bundle, {I: mat})


def hom_differential(pair, w, degree=None):
    """``d_E w + alpha' ^ w - (-1)^k w ^ alpha`` on a homogeneous ``w``."""
    k = w.total_degree() if degree is None else degree
    if k is None:
        return SuperForm(w.rank, w.nvars, w.source, w.target)
    out = d_E_apply(pair.chart, w) + wedge(pair.alpha_t, w)
    right = wedge(w, pair.alpha)
    return out - right if k % 2 == 0 else out + right


def differential_matrix(pair, m):
    """Exact rational matrix of the differential from degree ``m`` to ``m + 1``."""
    if pair.chart.n:
        raise ValueError("cohomology is only computed over a point (base_dim = 0)")
    cols = pair.basis(m)
    rows = pair.basis(m + 1)
    pos = {b: p for p, b in enumerate(rows)}
    mat = [[0] * len(cols) for _ in rows]
    for c, (I, i, j) in enumerate(cols):
        img = hom_differential(pair, pair.element(I, i, j), degree=m)
        for K, coef in img.terms.items():
            for (a, b), p in np.ndenumerate(coef):
                if p:
                    mat[pos[(K, a, b)]][c] = p.constant_value()
    return mat, len(rows), len(cols)


def cohomology_point(pair):
    """``[(degree, betti)]`` for every degree with a nonzero graded piece."""
    if pair.chart.n:
        raise ValueError("cohomology is only computed over a point (base_dim = 0)")
    degs = list(pair.degree_range())
    dims = {m: len(pair.basis(m)) for m in degs}
    ranks = {}
    for m in degs:
        if dims[m] and dims.get(m + 1):
            mat, nr, nc = differential_matrix(pair, m)
            ranks[m] = linalg.rank(mat, nc)
        else:
            ranks[m] = 0
    out = []
    for m in degs:
        if dims[m]:
            out.append((m, dims[m] - ranks[m] - ranks.get(m - 1, 0)))
    return out


def euler_characteristic(pair):
    return sum((-1) ** m * len(pair.basis(m)) for m in pair.degree_range())
