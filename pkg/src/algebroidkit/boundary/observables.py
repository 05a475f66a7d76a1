"""Observables built from F-forms, the odd vector field Q_F and covariant BRST operators.

Two representations of an ``Hom(V, W)``-valued F-form ``w`` are used:

* a *symbolic functional*: an element ``sum_I xi^I w_I(x)`` of the Grassmann
  algebra on ``r`` odd generators with polynomial matrix coefficients (used
  for ``Q_F`` and its covariant versions);
* :class:`FormFunctional`: the same data compiled for evaluation at field
  points, giving ``O0 = sum_I xi^I(tau) w_I(phi(tau))`` and its one-form
  partner ``O1 = d/dtheta O0`` on the superfield point.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations
from math import factorial

import numpy as np

from ..graded import SuperForm, poly_zeros, sort_sign
from ..grassmann import GrassmannAlgebra, GrassmannElement
from ..grassmann import gcommutator as ggcomm
from .fields import CompiledPolys, delta, tau_derivative


def xi_algebra(r):
    return GrassmannAlgebra([f"xi{I + 1}" for I in range(r)], [1] * r, [1] * r)


def _mask(indices):
    return sum(1 << i for i in indices)


def form_to_functional(w, alg=None):
    """``sum_{I increasing} xi^I w_I`` with polynomial matrix coefficients."""
    alg = alg or xi_algebra(w.rank)
    if not w.terms:
        return _zero_functional(alg, w.target, w.source)
    keys = sorted(w.terms, key=_mask)
    masks = np.array([_mask(k) for k in keys], dtype=np.int64)
    coeffs = np.empty((len(keys), w.target.total, w.source.total), dtype=object)
    for p, k in enumerate(keys):
        coeffs[p] = w.terms[k]
    return GrassmannElement(alg, masks, coeffs, w.target.parity, w.source.parity)


def _zero_functional(alg, target, source):
    return GrassmannElement.zero(alg, dtype=object, row_par=target.parity, col_par=source.parity)


def functional_to_form(F, chart, source, target):
    terms = {}
    for m, c in F.terms():
        idx = tuple(i for i in range(chart.r) if (m >> i) & 1)
        terms[idx] = np.array(c, dtype=object)
    return SuperForm(chart.r, chart.n, source, target, terms)


def _poly_scale(F, p):
    return F.map_coeffs(lambda x: x * p)


def qf_apply(chart, F):
    """``Q_F = -rho^mu_I xi^I d_mu + 1/2 C^K_IJ xi^I xi^J d/dxi^K``."""
    alg = F.alg
    out = F.scale(0)
    for I in range(chart.r):
        xI = alg.generator(I, coeff=Fraction(1), dtype=object)
        anchored = F.map_coeffs(lambda p, I=I: chart.anchor_apply(I, p))
        if not anchored.is_zero():
            out = out - xI * anchored
    for K in range(chart.r):
        dK = F.partial(K)
        if dK.is_zero():
            continue
        for I in range(chart.r):
            for J in range(chart.r):
                c = chart.C(K, I, J)
                if c:
                    xx = alg.monomial([I, J], Fraction(1, 2), dtype=object)
                    out = out + _poly_scale(xx * dK, c)
    return out


def qf_covariant(chart, A_target, A_source, F):
    """``Q_F`` with ``rho_I d`` replaced by ``nabla_I = rho_I d + A_I (.) - (.) A_I``."""
    alg = F.alg
    out = F.scale(0)
    for I in range(chart.r):
        xI = alg.generator(I, coeff=Fraction(1), dtype=object)
        nab = F.map_coeffs(lambda p, I=I: chart.anchor_apply(I, p))
        At = _const_matrix(alg, A_target[I], F.row_par)
        As = _const_matrix(alg, A_source[I], F.col_par)
        nab = nab + At * F - F * As
        if not nab.is_zero():
            out = out - xI * nab
    for K in range(chart.r):
        dK = F.partial(K)
        if dK.is_zero():
            continue
        for I in range(chart.r):
            for J in range(chart.r):
                c = chart.C(K, I, J)
                if c:
                    out = out + _poly_scale(alg.monomial([I, J], Fraction(1, 2), dtype=object) * dK, c)
    return out


def _const_matrix(alg, m, par):
    return GrassmannElement(alg, np.array([0], dtype=np.int64), np.array(m, dtype=object)[None, ...].copy(), par, par)


def qf_superconnection(chart, alpha_t, alpha_s, F):
    """``Q_{F,D} F = Q_F F - alpha_t F + (-1)^{|F|} F alpha_s`` (the bracket with ``alpha``)."""
    out = qf_apply(chart, F)
    if F.is_zero():
        return out
    right = F * alpha_s
    out = out - alpha_t * F
    return out - right if F.parity() else out + right


# -- evaluation at field points -----------------------------------------------

def xi_product(pt, indices):
    out = pt.one()
    for I in indices:
        out = out * pt.get("xi", I)
    return out


class FormFunctional:
    """Compiled ``Hom(V, W)``-valued F-form for evaluation at field points."""

    def __init__(self, w):
        self.form = w
        self.rank = w.rank
        self.nvars = w.nvars
        self.row_par = w.target.parity
        self.col_par = w.source.parity
        self.row_deg = w.target.degrees
        self.col_deg = w.source.degrees
        self.parts = []
        for idx in sorted(w.terms, key=lambda k: (len(k), k)):
            m = w.terms[idx]
            deriv = [CompiledPolys(np.vectorize(lambda p, nu=nu: p.partial(nu), otypes=[object])(m))
                     for nu in range(w.nvars)]
            self.parts.append((idx, CompiledPolys(m), deriv))

    @classmethod
    def from_functional(cls, F, chart, source, target):
        return cls(functional_to_form(F, chart, source, target))

    def zero(self, pt):
        return GrassmannElement.zero(pt.alg, dtype=object if pt.exact else float,
                                     row_par=self.row_par, col_par=self.col_par)

    def o0(self, pt):
        """``sum_{I increasing} xi^I(tau) w_I(phi(tau))``."""
        out = self.zero(pt)
        for idx, mat, _ in self.parts:
            val = mat.matrix(pt, self.row_par, self.col_par)
            if val.is_zero():
                continue
            out = out + xi_product(pt, idx) * val
        return out

    def o1(self, pt):
        """``d/dtheta`` of ``O0`` at ``phi + theta eta``, ``xi + theta psi``."""
        return self.o0(pt.superfield()).partial("_theta")

    def o1_literal(self, pt):
        """Coefficient-first one-form partner without the sign ``(-1)^(k-1)``.

        ``1/(k-1)! w_I xi..xi psi + 1/k! eta^nu d_nu w_I xi..xi``, summed over
        all index orders.  Kept to show that this variant breaks descent for
        even ``k``.
        """
        out = self.zero(pt)
        for idx, mat, deriv in self.parts:
            k = len(idx)
            val = mat.matrix(pt, self.row_par, self.col_par)
            for perm in permutations(range(k)):
                _, s = sort_sign(perm)
                I = [idx[p] for p in perm]
                if k:
                    term = val * xi_product(pt, I[:-1]) * pt.get("psi", I[-1])
                    out = out + term.scale(Fraction(s, factorial(k - 1)))
                for nu in range(self.nvars):
                    dv = deriv[nu].matrix(pt, self.row_par, self.col_par)
                    if dv.is_zero():
                        continue
                    term = pt.get("eta", nu) * dv * xi_product(pt, I)
                    out = out + term.scale(Fraction(s, factorial(k)))
        return out


def graded_commutator(a, b):
    if a.is_zero() or b.is_zero():
        return a * b
    return ggcomm(a, b)


def hat_delta(cd, coupling, fun, jets=None):
    """Covariant variation ``delta O - [A_alpha, O]`` as a functional."""
    def out(pt):
        return delta(cd, fun, pt, jets) - graded_commutator(coupling.script_a(pt), fun(pt))
    return out


def hat_delta_two_sided(cd, c_source, c_target, fun, jets=None):
    """``delta O - A_target O + (-1)^{|O|} O A_source`` for ``Hom(V_source, V_target)``-valued ``O``."""
    def out(pt):
        val = fun(pt)
        res = delta(cd, fun, pt, jets) - c_target.script_a(pt) * val
        right = val * c_source.script_a(pt)
        if val.is_zero():
            return res
        return res - right if val.parity() else res + right
    return out


def descent_residual_scalar(cd, chart, omega_fun, qomega_fun, pt):
    """``delta O1 + d/dtau O0 + O1[Q_F w]`` at one point."""
    d1 = delta(cd, omega_fun.o1, pt, jets=1)
    return d1 + tau_derivative(omega_fun.o0, pt) + qomega_fun.o1(pt)


def descent_residual_covariant(cd, coupling, omega_fun, qomega_fun, pt):
    """``hat-delta O1 + d/dtau O0 + [M, O0] + O1[Q_{F,D} w]`` at one point."""
    lhs = hat_delta(cd, coupling, omega_fun.o1, jets=1)(pt)
    cov = tau_derivative(omega_fun.o0, pt) + graded_commutator(coupling.M(pt), omega_fun.o0(pt))
    return lhs + cov + qomega_fun.o1(pt)


def descent_residual_plain(cd, coupling, omega_fun, pt, sign=-1):
    """Residual of ``hat-delta O1 = sign * d/dtau O0`` (plain derivative, closed ``w``)."""
    lhs = hat_delta(cd, coupling, omega_fun.o1, jets=1)(pt)
    return lhs - tau_derivative(omega_fun.o0, pt).scale(sign)


def elementary_forms(chart, source, target, degree):
    """Basis ``e^I (x) E_ij`` of constant forms of total degree ``degree``."""
    out = []
    for k in range(chart.r + 1):
        for I in combinations(range(chart.r), k):
            for i in range(target.total):
                for j in range(source.total):
                    if k + int(target.degrees[i]) - int(source.degrees[j]) == degree:
                        m = poly_zeros((target.total, source.total), chart.n)
                        m[i, j] = m[i, j] + 1
                        out.append(SuperForm(chart.r, chart.n, source, target, {I: m}))
    return out
