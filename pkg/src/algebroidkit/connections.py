"""E-connections on graded bundles: covariant derivatives and curvature."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .algebroid import apply_anchor, cartan_differential
from .graded import GradedMatrix, SuperForm, as_poly_matrix, matmul, poly_zeros
from .report import Check, Report


class EConnection:
    """Degree-preserving connection coefficients ``A_I`` on a graded bundle."""

    def __init__(self, chart, bundle, coefficients):
        self.chart = chart
        self.bundle = bundle
        if len(coefficients) != chart.r:
            raise ValueError(f"need {chart.r} coefficient matrices, got {len(coefficients)}")
        mats = []
        for A in coefficients:
            if isinstance(A, GradedMatrix):
                if A.degree != 0:
                    raise ValueError("connection coefficients must have degree 0")
                if A.source != bundle or A.target != bundle:
                    raise ValueError("connection coefficient lives on a different bundle")
                mats.append(A.data)
            else:
                mats.append(GradedMatrix(bundle, bundle, 0, A, chart.n).data)
        self.A = mats

    @classmethod
    def trivial(cls, chart, bundle):
        z = poly_zeros((bundle.total, bundle.total), chart.n)
        return cls(chart, bundle, [z] * chart.r)

    def coefficient(self, I):
        return GradedMatrix(self.bundle, self.bundle, 0, self.A[I], self.chart.n)

    def conjugate(self, g, ginv):
        n = self.chart.n
        g = as_poly_matrix(g, n)
        ginv = as_poly_matrix(ginv, n)
        return EConnection(self.chart, self.bundle, [matmul(matmul(g, A, n), ginv, n) for A in self.A])


def covariant_derivative(conn, phi, I):
    """``rho_I d phi + A_I phi`` for a section given as a column of polynomials."""
    phi = as_poly_matrix(phi, conn.chart.n)
    col = phi.ndim == 1
    if col:
        phi = phi.reshape(-1, 1)
    if phi.shape[0] != conn.bundle.total:
        raise ValueError(f"section has {phi.shape[0]} entries, bundle rank is {conn.bundle.total}")
    out = apply_anchor(conn.chart, I, phi) + matmul(conn.A[I], phi, conn.chart.n)
    return out.reshape(-1) if col else out


def covariant_derivative_endo(conn, m, I):
    """``rho_I d m + [A_I, m]`` on an endomorphism matrix."""
    n = conn.chart.n
    return apply_anchor(conn.chart, I, m) + matmul(conn.A[I], m, n) - matmul(m, conn.A[I], n)


def curvature(conn):
    """``F_IJ = rho_I dA_J - rho_J dA_I + [A_I, A_J] - C^K_IJ A_K`` as a 2-form."""
    ch = conn.chart
    n = ch.n
    terms = {}
    for I, J in combinations(range(ch.r), 2):
        F = apply_anchor(ch, I, conn.A[J]) - apply_anchor(ch, J, conn.A[I])
        F = F + matmul(conn.A[I], conn.A[J], n) - matmul(conn.A[J], conn.A[I], n)
        for K in range(ch.r):
            c = ch.C(K, I, J)
            if c:
                F = F - conn.A[K] * c
        terms[(I, J)] = F
    return SuperForm(ch.r, n, conn.bundle, conn.bundle, terms)


def d_E_nabla_apply(conn, w):
    """Induced differential on forms valued in ``V`` (column) or ``End(V)``."""
    b = conn.bundle
    if w.target != b:
        raise ValueError("form is not valued in the connection's bundle")
    if w.source == b:
        act = lambda I, m: covariant_derivative_endo(conn, m, I)  # noqa: E731
    elif w.source.total == 1:
        act = lambda I, m: covariant_derivative(conn, m, I)  # noqa: E731
    else:
        raise ValueError("form must take values in V or End(V)")
    return cartan_differential(conn.chart, w, act)


def is_representation(conn):
    """Flatness check; the report lists every nonzero curvature entry."""
    ch = conn.chart
    F = curvature(conn)
    report = Report("curvature")
    residuals = []
    for (I, J), m in sorted(F.terms.items()):
        for (a, b), p in np.ndenumerate(m):
            if p:
                residuals.append((f"F_{ch.frame[I]}{ch.frame[J]}[{a},{b}]", p.to_string(ch.coords)))
    npairs = ch.r * (ch.r - 1) // 2
    detail = (f"all {npairs} components F_IJ vanish" if not residuals
              else f"{len(F.terms)} of {npairs} components F_IJ are nonzero")
    report.add(Check("flat E-connection (F_IJ = 0)", not residuals, detail, residuals))
    return not residuals, report


def curvature_components(conn):
    """Dense dict ``(I, J) -> F_IJ`` for ``I < J`` (zeros included)."""
    F = curvature(conn)
    shape = (conn.bundle.total, conn.bundle.total)
    return {k: F.terms.get(k, poly_zeros(shape, conn.chart.n)) for k in combinations(range(conn.chart.r), 2)}

