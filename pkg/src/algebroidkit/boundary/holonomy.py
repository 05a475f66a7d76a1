"""Boundary couplings, the connection one-form M, holonomies and their BRST variation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import factorial

import numpy as np

from ..connections import EConnection, curvature
from ..graded import GradedMatrix, SuperForm, sort_sign
from ..grassmann import GrassmannElement, expm
from ..homotopy import Superconnection, assemble_alpha, mc_residual, tower_residuals
from ..report import Check, Report
from .fields import ChartData, CompiledPolys, vary
from .observables import FormFunctional, xi_product


def restrict_superconnection(split, D):
    """Restrict a superconnection to the F-chart (primed frame, normal coordinates = 0)."""
    if isinstance(D, EConnection):
        D = Superconnection(D)
    fchart = split.restricted_chart()
    P = split.primed_frame
    pos = {I: a for a, I in enumerate(P)}
    b = D.bundle
    n = fchart.n

    def res(m):
        out = np.empty(m.shape, dtype=object)
        for idx, p in np.ndenumerate(m):
            out[idx] = split.on_boundary(p)
        return out

    A = [res(D.conn.A[I]) for I in P]
    v = GradedMatrix(b, b, 1, res(D.v.data), n)
    higher = {}
    for k, w in D.higher.items():
        terms = {tuple(pos[i] for i in K): res(m) for K, m in w.terms.items() if all(i in pos for i in K)}
        if k <= fchart.r:
            higher[k] = SuperForm(fchart.r, n, b, b, terms)
    return Superconnection(EConnection(fchart, b, A), v, higher)


def _deriv_compiled(m, nvars):
    return [CompiledPolys(np.vectorize(lambda p, nu=nu: p.partial(nu), otypes=[object])(m)) for nu in range(nvars)]


class BoundaryCoupling:
    """An ordinary or super connection seen from the boundary."""

    def __init__(self, split, D):
        self.ordinary = isinstance(D, EConnection) or (not D.higher and D.v.is_zero())
        self.D = restrict_superconnection(split, D)
        self.chart = self.D.chart
        self.bundle = self.D.bundle
        self.row_par = self.bundle.parity
        n = self.chart.n
        self.alpha = assemble_alpha(self.D)
        self.alpha_fun = FormFunctional(self.alpha)
        self.residual = mc_residual(self.D)
        self.residual_fun = FormFunctional(self.residual)
        self._v = (CompiledPolys(self.D.v.data), _deriv_compiled(self.D.v.data, n))
        self._A = [(CompiledPolys(A), _deriv_compiled(A, n)) for A in self.D.conn.A]
        self._om = []
        for k, w in sorted(self.D.higher.items()):
            for K, m in sorted(w.terms.items()):
                self._om.append((K, CompiledPolys(m), _deriv_compiled(m, n)))
        self.set_integrand_source()

    def set_integrand_source(self, components=None):
        """Residual components used by :meth:`integrand` (default: curvature or tower)."""
        if components is None:
            if self.ordinary:
                F = curvature(self.D.conn)
                components = {2: dict(F.terms)}
            else:
                components = tower_residuals(self.D)
        self._tower = []
        n = self.chart.n
        for m, comps in sorted(components.items()):
            for K, mat in sorted(comps.items()):
                if any(p for p in mat.flat):
                    self._tower.append((m, K, CompiledPolys(mat), _deriv_compiled(mat, n)))

    def _mat(self, comp, pt):
        return comp.matrix(pt, self.row_par, self.row_par)

    def zero(self, pt):
        return GrassmannElement.zero(pt.alg, dtype=object if pt.exact else float,
                                     row_par=self.row_par, col_par=self.row_par)

    def script_a(self, pt):
        """``v + A_I xi^I + sum 1/n! Omega xi..xi`` at ``pt``."""
        return self.alpha_fun.o0(pt)

    def M(self, pt):
        """Connection one-form, term list as displayed (coefficient first, unordered sums)."""
        n, r = self.chart.n, self.chart.r
        out = self.zero(pt)
        eta = [pt.get("eta", nu) for nu in range(n)]
        _, dv = self._v
        for nu in range(n):
            if not dv[nu].is_zero():
                out = out + eta[nu] * self._mat(dv[nu], pt)
        for I in range(r):
            A, dA = self._A[I]
            if not A.is_zero():
                out = out + self._mat(A, pt) * pt.get("psi", I)
            for nu in range(n):
                if not dA[nu].is_zero():
                    out = out + eta[nu] * self._mat(dA[nu], pt) * pt.get("xi", I)
        for K, om, dom in self._om:
            k = len(K)
            val = self._mat(om, pt)
            dvals = [self._mat(d, pt) if not d.is_zero() else None for d in dom]
            for perm in permutations(range(k)):
                _, s = sort_sign(perm)
                I = [K[p] for p in perm]
                out = out + (val * xi_product(pt, I[:-1]) * pt.get("psi", I[-1])).scale(Fraction(s, factorial(k - 1)))
                for nu in range(n):
                    if dvals[nu] is not None:
                        out = out + (eta[nu] * dvals[nu] * xi_product(pt, I)).scale(Fraction(s, factorial(k)))
        return out

    def M_from_superfield(self, pt):
        return self.alpha_fun.o1(pt)

    def residual_o1(self, pt):
        """One-form partner of the Maurer-Cartan residual."""
        return self.residual_fun.o1(pt)

    def integrand(self, pt):
        """Curvature integrand assembled from the residual components.

        For each residual ``T`` of form degree ``m``: ``(-1)^(m-1)/(m-1)! T xi^(m-1) psi
        + (-1)^m/m! eta^nu d_nu T xi^m``, summed over index orders.
        """
        n = self.chart.n
        out = self.zero(pt)
        for m, K, T, dT in self._tower:
            val = self._mat(T, pt)
            dvals = [self._mat(d, pt) if not d.is_zero() else None for d in dT]
            for perm in permutations(range(m)):
                _, s = sort_sign(perm)
                I = [K[p] for p in perm]
                if m >= 1:
                    c = Fraction(s * (-1) ** (m - 1), factorial(m - 1))
                    out = out + (val * xi_product(pt, I[:-1]) * pt.get("psi", I[-1])).scale(c)
                c = Fraction(s * (-1) ** m, factorial(m))
                for nu in range(n):
                    if dvals[nu] is not None:
                        out = out + (pt.get("eta", nu) * dvals[nu] * xi_product(pt, I)).scale(c)
        return out


@dataclass
class Lattice:
    N: int
    rule: str = "midpoint"

    def __post_init__(self):
        if self.N < 4:
            raise ValueError("lattice needs N >= 4 links")
        if self.rule != "midpoint":
            raise ValueError(f"unsupported link rule {self.rule!r}")


def link_forms(bc, cfg, N, t=1.0, varied=False):
    """``M`` at the link midpoints of ``[0, t]``, optionally on the varied fields."""
    cd = ChartData(bc.chart) if varied else None
    dt = t / N
    out = []
    eps = None
    for s in range(N):
        pt = cfg.point((s + 0.5) * dt, jets=2)
        if varied:
            pt, eps = vary(cd, pt, jets=1)
        out.append(bc.M(pt))
    return out, eps


def links(bc, cfg, N, t=1.0, varied=False, sign=-1.0):
    """Link exponentials ``exp(sign * M(tau_s) dt)`` at midpoints of ``[0, t]``."""
    Ms, eps = link_forms(bc, cfg, N, t, varied)
    return [expm(m.scale(sign * t / N)) for m in Ms], eps


def ordered_product(mats, reverse=False):
    """``mats[-1] ... mats[0]`` (path order), or the opposite order with ``reverse``."""
    seq = mats if reverse else mats[::-1]
    out = seq[0]
    for m in seq[1:]:
        out = out * m
    return out


def holonomy(bc, cfg, lattice):
    N = lattice.N if isinstance(lattice, Lattice) else int(lattice)
    L, _ = links(bc, cfg, N)
    return ordered_product(L)


def _scalar_value(el):
    """Largest coefficient magnitude of a scalar element."""
    return el.norm()


def delta_str_holonomy(bc, cfg, N):
    """Measured vs predicted BRST variation of ``str U(0,1)`` on an ``N``-link lattice.

    Returns a dict with the measured and predicted variations (scalar
    Grassmann elements), their discrepancy norm, the integrand scale and the
    telescoped boundary term.
    """
    dt = 1.0 / N
    Ms, eps = link_forms(bc, cfg, N, varied=True)
    Lv = [expm(m.scale(-dt)) for m in Ms]
    Uv = ordered_product(Lv)
    measured = Uv.supertrace().partial(eps)
    L = [x.drop(eps) for x in Lv]
    Linv = [expm(m.drop(eps).scale(dt)) for m in Ms]
    U1 = Uv.drop(eps)
    # prefix products U_j = L_{j-1} ... L_0 and their inverses
    acc = None
    scale = 0.0
    U = GrassmannElement.identity(U1.alg, bc.row_par)
    Uinv = U
    for j in range(N + 1):
        K = bc.integrand(cfg.point(j * dt, jets=1))
        term = Uinv * K * U
        w = 0.5 if j in (0, N) else 1.0
        full = U1 * term
        scale = max(scale, full.norm())
        acc = term.scale(w * dt) if acc is None else acc + term.scale(w * dt)
        if j < N:
            U = L[j] * U
            Uinv = Uinv * Linv[j]
    predicted = -(U1 * acc).supertrace()
    a0 = bc.script_a(cfg.point(0.0, jets=1))
    a1 = bc.script_a(cfg.point(1.0, jets=1))
    boundary = (a1 * U1 - U1 * a0).supertrace()
    bscale = max((a1 * U1).norm(), 1e-300)
    return {
        "N": N,
        "measured": measured,
        "predicted": predicted,
        "discrepancy": (measured - predicted).norm(),
        "measured_norm": measured.norm(),
        "predicted_norm": predicted.norm(),
        "scale": scale,
        "boundary_term": boundary.norm() / bscale,
        "holonomy": U1,
    }


def fit_order(Ns, values):
    """Least-squares slope of ``-log(value)`` against ``log(N)``."""
    x = np.log(np.asarray(Ns, dtype=float))
    y = np.log(np.maximum(np.asarray(values, dtype=float), 1e-300))
    return float(-np.polyfit(x, y, 1)[0])


def holonomy_report(bc, cfg, Ns=(64, 128, 256, 512), tolerance=5.0, flat=None):
    """Run the variation study over several lattices and summarize it as checks."""
    rows = [delta_str_holonomy(bc, cfg, N) for N in Ns]
    if flat is None:
        flat = bc.residual.is_zero()
    rep = Report("holonomy")
    meas = [r["measured_norm"] for r in rows]
    rep.add(Check("boundary term telescopes", all(r["boundary_term"] <= 1e-10 for r in rows),
                  "relative size of str(A(1)U - U A(0))",
                  values={"max_relative": max(r["boundary_term"] for r in rows)}))
    if flat:
        order = fit_order(Ns, meas)
        rep.add(Check("BRST invariance: |delta str U| -> 0 at second order", 1.8 <= order <= 2.2,
                      "flat coupling, predicted variation is identically zero",
                      values={"N": list(Ns), "measured": meas, "fitted_order": order}))
    else:
        ok = True
        ratios = []
        for r in rows:
            bound = tolerance * (1.0 / r["N"]) ** 2 * r["scale"]
            if bound:
                ratios.append(r["discrepancy"] / bound)
            ok = ok and r["discrepancy"] <= bound
        rep.add(Check("measured variation matches curvature quadrature", ok,
                      f"|measured - predicted| <= {tolerance:g} dtau^2 scale",
                      values={"N": list(Ns), "measured": meas,
                              "predicted": [r["predicted_norm"] for r in rows],
                              "discrepancy": [r["discrepancy"] for r in rows],
                              "ratio_to_bound": ratios}))
    return rep, rows


# -- boundary-changing insertions ---------------------------------------------

def insertion_variation(bc1, bc2, f1, f2, cfg, t, N):
    """Measured and predicted variation of ``str(O1(t) U1(0,t) O2(0) U2(0,t)^-1)``.

    ``f1`` is a :class:`FormFunctional` valued in ``Hom(V1, V2)`` and ``f2``
    in ``Hom(V2, V1)``.
    """
    from .observables import hat_delta_two_sided

    cd = ChartData(bc1.chart)
    L1v, eps = links(bc1, cfg, N, t=t, varied=True)
    L2v, _ = links(bc2, cfg, N, t=t, varied=True, sign=1.0)
    U1v = ordered_product(L1v)
    U2inv_v = ordered_product(L2v, reverse=True)
    p_t = cfg.point(t, jets=2)
    p_0 = cfg.point(0.0, jets=2)
    pv_t, _ = vary(cd, p_t, jets=1)
    pv_0, _ = vary(cd, p_0, jets=1)
    W = (f1.o0(pv_t) * U1v * f2.o0(pv_0) * U2inv_v).supertrace()
    measured = W.partial(eps)
    U1 = U1v.drop(eps)
    U2inv = U2inv_v.drop(eps)
    o1 = f1.o0(p_t)
    o2 = f2.o0(p_0)
    d1 = hat_delta_two_sided(cd, bc1, bc2, f1.o0, jets=1)(p_t)
    d2 = hat_delta_two_sided(cd, bc2, bc1, f2.o0, jets=1)(p_0)
    first = (d1 * U1 * o2 * U2inv).supertrace()
    second = (o1 * U1 * d2 * U2inv).supertrace()
    sign = -1 if (not o1.is_zero() and o1.parity()) else 1
    predicted = first + second.scale(sign)
    scale = max((o1 * U1 * o2 * U2inv).norm(), 1e-300)
    return {
        "N": N,
        "value": W.drop(eps),
        "measured": measured,
        "predicted": predicted,
        "measured_norm": measured.norm(),
        "predicted_norm": predicted.norm(),
        "discrepancy": (measured - predicted).norm(),
        "scale": scale,
    }


def boundary_changing_check(bc1, bc2, f1, f2, cfg, t, Ns=(64, 128, 256, 512), tolerance=5.0, closed=False):
    """Compare the measured insertion variation with its two-sided split.

    With ``closed`` set (both forms annihilated by the covariant ``Q``) the
    measured variation is also required to vanish at second order.
    """
    rows = [insertion_variation(bc1, bc2, f1, f2, cfg, t, N) for N in Ns]
    rep = Report("boundary-changing")
    ok = True
    for r in rows:
        bound = tolerance * (t / r["N"]) ** 2 * max(r["scale"], r["predicted_norm"])
        ok = ok and r["discrepancy"] <= bound
    meas = [r["measured_norm"] for r in rows]
    rep.add(Check("variation splits into two-sided covariant pieces", ok,
                  f"|measured - predicted| <= {tolerance:g} dtau^2 scale",
                  values={"N": list(Ns), "measured": meas,
                          "predicted": [r["predicted_norm"] for r in rows],
                          "discrepancy": [r["discrepancy"] for r in rows]}))
    if closed:
        order = fit_order(Ns, meas)
        rep.add(Check("closed insertions: |delta W| -> 0 at second order", 1.8 <= order <= 2.2,
                      "fitted convergence order of the measured variation",
                      values={"fitted_order": order}))
    return rep, rows
