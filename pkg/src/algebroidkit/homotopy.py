"""Superconnections, the Maurer-Cartan form and the componentwise flatness tower."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations
from math import comb, factorial

import numpy as np

from .algebroid import d_E_apply
from .connections import EConnection, covariant_derivative_endo, curvature, d_E_nabla_apply
from .graded import (GradedMatrix, SuperForm, gcommutator, is_zero_matrix, matmul, poly_identity,
                     poly_zeros, sort_sign, wedge)
from .report import Check, Report


class Superconnection:
    """``D = v + d_{E,nabla} + sum_k Omega^(k)``.

    ``v`` is a degree-one :class:`GradedMatrix` (or ``None``); ``higher`` maps
    ``k >= 2`` to a :class:`SuperForm` of bidegree ``(k, 1 - k)``.
    """

    def __init__(self, conn, v=None, higher=None):
        self.conn = conn
        self.chart = conn.chart
        self.bundle = conn.bundle
        n = self.chart.n
        if v is None:
            v = GradedMatrix(self.bundle, self.bundle, 1, poly_zeros((self.bundle.total,) * 2, n), n)
        elif not isinstance(v, GradedMatrix):
            v = GradedMatrix(self.bundle, self.bundle, 1, v, n)
        if v.degree != 1:
            raise ValueError("v must have degree 1")
        self.v = v
        self.higher = {}
        for k, w in (higher or {}).items():
            k = int(k)
            if k < 2:
                raise ValueError("higher terms start at form degree 2")
            if w.is_zero():
                continue
            if k > self.chart.r:
                raise ValueError(f"no {k}-forms on a rank-{self.chart.r} algebroid")
            if w.bidegrees() != {(k, 1 - k)}:
                raise ValueError(f"Omega^({k}) must have bidegree ({k}, {1 - k}), got {sorted(w.bidegrees())}")
            self.higher[k] = w

    def omega(self, k):
        if k in self.higher:
            return self.higher[k]
        return SuperForm(self.chart.r, self.chart.n, self.bundle, self.bundle)

    def conjugate(self, g, ginv):
        """Constant degree-preserving change of frame."""
        n = self.chart.n
        v = GradedMatrix(self.bundle, self.bundle, 1, matmul(matmul(np.asarray(g, dtype=object), self.v.data, n),
                                                             np.asarray(ginv, dtype=object), n), n)
        return Superconnection(self.conn.conjugate(g, ginv), v,
                               {k: w.conjugate(g, ginv) for k, w in self.higher.items()})


def superconnection_apply(D, w):
    """``v ^ w + d_{E,nabla} w + sum_k Omega^(k) ^ w``."""
    ch = D.chart
    out = wedge(SuperForm.from_matrix(ch.r, ch.n, D.bundle, D.bundle, D.v.data), w)
    out = out + d_E_nabla_apply(D.conn, w)
    for k in sorted(D.higher):
        out = out + wedge(D.higher[k], w)
    return out


def assemble_alpha(D):
    ch = D.chart
    terms = {(): D.v.data}
    for I, A in enumerate(D.conn.A):
        terms[(I,)] = A
    alpha = SuperForm(ch.r, ch.n, D.bundle, D.bundle, terms)
    for k in sorted(D.higher):
        alpha = alpha + D.higher[k]
    return alpha


def disassemble_alpha(chart, bundle, alpha):
    """Inverse of :func:`assemble_alpha`; rejects forms of total degree other than 1."""
    degs = alpha.total_degrees()
    if degs and degs != {1}:
        raise ValueError(f"superconnection form must have total degree 1, got {sorted(degs)}")
    shape = (bundle.total, bundle.total)
    v = alpha.terms.get((), poly_zeros(shape, chart.n))
    A = [alpha.terms.get((I,), poly_zeros(shape, chart.n)) for I in range(chart.r)]
    higher = {k: alpha.part(form_degree=k) for k in range(2, chart.r + 1)}
    return Superconnection(EConnection(chart, bundle, A), GradedMatrix(bundle, bundle, 1, v, chart.n), higher)


def mc_residual(D):
    """``d_E alpha + 1/2 [alpha, alpha]`` for a :class:`Superconnection`."""
    return mc_residual_form(D.chart, assemble_alpha(D))


def mc_residual_form(chart, alpha):
    return d_E_apply(chart, alpha) + gcommutator(alpha, alpha).scale(Fraction(1, 2))


# -- componentwise tower --------------------------------------------------

def _alt_product(left, right, K, k):
    """``(1/m!) sum_sigma sgn(sigma) left_{K_sigma[:k]} right_{K_sigma[k:]}``."""
    m = len(K)
    n = left.nvars
    acc = poly_zeros((left.target.total, right.source.total), n)
    for perm in permutations(range(m)):
        _, s = sort_sign(perm)
        idx = [K[i] for i in perm]
        a = left.component(idx[:k])
        if is_zero_matrix(a):
            continue
        prod = matmul(a, right.component(idx[k:]), n)
        acc = acc + prod if s > 0 else acc - prod
    return acc * Fraction(1, factorial(m))


def tower_residuals(D):
    """Left-hand sides of the flatness equations, keyed by form degree.

    Returns ``{m: {K: matrix}}`` for ``m = 0 .. r`` and sorted ``K`` of
    length ``m``: ``v^2``, ``nabla_I v``, ``v Om2 + Om2 v + F`` and, for
    ``n >= 2``, the degree ``n + 1`` equation of the tower.
    """
    ch = D.chart
    nv = ch.n
    v = D.v.data
    out = {0: {(): matmul(v, v, nv)}}
    if ch.r >= 1:
        out[1] = {(I,): covariant_derivative_endo(D.conn, v, I) for I in range(ch.r)}
    if ch.r >= 2:
        F = curvature(D.conn)
        om2 = D.omega(2)
        out[2] = {}
        for K in combinations(range(ch.r), 2):
            w = om2.component(K)
            out[2][K] = matmul(v, w, nv) + matmul(w, v, nv) + F.component(K)
    for n in range(2, ch.r):
        top = D.omega(n + 1)
        low = D.omega(n)
        eqs = {}
        for K in combinations(range(ch.r), n + 1):
            w = top.component(K)
            lhs = matmul(w, v, nv) + (matmul(v, w, nv) if n % 2 else -matmul(v, w, nv))
            for i in range(n + 1):
                rest = K[:i] + K[i + 1:]
                term = covariant_derivative_endo(D.conn, low.component(rest), K[i])
                lhs = lhs + term if i % 2 == 0 else lhs - term
            for i in range(n + 1):
                for j in range(i + 1, n + 1):
                    rest = K[:i] + K[i + 1:j] + K[j + 1:]
                    for J in range(ch.r):
                        c = ch.C(J, K[i], K[j])
                        if c:
                            term = low.component((J,) + rest) * c
                            lhs = lhs + term if (i + j) % 2 == 0 else lhs - term
            for k in range(2, n):
                coef = comb(n + 1, k) * (-1 if ((1 - k) * (n + 1 - k)) % 2 else 1)
                lhs = lhs + _alt_product(D.omega(k), D.omega(n + 1 - k), K, k) * coef
            eqs[K] = lhs
        out[n + 1] = eqs
    return out


def _equation_name(m):
    if m == 0:
        return "v^2 = 0"
    if m == 1:
        return "∇_I v = 0"
    if m == 2:
        return "v Ω2_IJ + Ω2_IJ v + F_IJ = 0"
    return f"tower n={m - 1}: [v, Ω{m}] + d∇ Ω{m - 1} + Σ Ω Ω = 0"


def flatness_equations(D):
    """Evaluate the componentwise flatness system; the report names failures."""
    ch = D.chart
    report = Report("mc-check")
    res = tower_residuals(D)
    for m in sorted(res):
        bad = []
        for K, mat in sorted(res[m].items()):
            for (a, c), p in np.ndenumerate(mat):
                if p:
                    idx = "".join(ch.frame[i] for i in K)
                    lab = f"[{idx}]" if idx else ""
                    bad.append((f"{lab}[{a},{c}]", p.to_string(ch.coords)))
        ncomp = len(res[m])
        detail = f"{ncomp} component{'s' if ncomp != 1 else ''} checked"
        report.add(Check(_equation_name(m), not bad, detail, bad))
    if ch.r >= 3:
        report.notes.append(f"tower truncated at n+1 = {ch.r} (fiber rank)")
    return report


def mc_report(D):
    """Check the single Maurer-Cartan equation and list residual components."""
    ch = D.chart
    R = mc_residual(D)
    report = Report("mc-check")
    bad = []
    for K, mat in sorted(R.terms.items(), key=lambda t: (len(t[0]), t[0])):
        for (a, c), p in np.ndenumerate(mat):
            if p:
                idx = "".join(ch.frame[i] for i in K)
                bad.append((f"[{idx}][{a},{c}]", p.to_string(ch.coords)))
    report.add(Check("d_E α + ½[α, α] = 0", not bad, f"{len(R.terms)} nonzero form components", bad))
    return report


# -- gauge transformations -----------------------------------------------

def unipotent_inverse(g, max_terms=64):
    """Inverse of ``1 + N`` with ``N`` nilpotent, as ``sum_j (-N)^j``."""
    one = SuperForm.identity(g.rank, g.nvars, g.source)
    N = g - one
    out = one
    power = one
    for _ in range(max_terms):
        power = -wedge(N, power)
        if power.is_zero():
            return out
        out = out + power
    raise ValueError("gauge transformation is not unipotent")


def gauge_transform(chart, alpha, g, ginv=None):
    """``g alpha g^{-1} - (d_E g) g^{-1}`` for a total-degree-0 ``g``."""
    if ginv is None:
        ginv = unipotent_inverse(g)
    return wedge(wedge(g, alpha), ginv) - wedge(d_E_apply(chart, g), ginv)


def identity_gauge(chart, bundle):
    return SuperForm(chart.r, chart.n, bundle, bundle, {(): poly_identity(bundle.total, chart.n)})
