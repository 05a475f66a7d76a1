"""Boundary component fields on the circle and their residual BRST variation.

Field points carry Grassmann-valued jets ``X, X', X'', ...`` of every
component.  Two kinds of auxiliary generators are reserved in the algebra:

* odd ``_eps*`` (ghost -1): ``delta G(p) = d/d eps G(p + eps * delta p)``;
* even nilpotent ``_h*``: ``d/dtau G(p) = d/dh G(p + h * p')``.

A reserved odd ``_theta`` (ghost +1) builds superfields for the one-form
observables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import pi

import numpy as np

from ..grassmann import GeneratorBudgetExceeded, GrassmannAlgebra, GrassmannElement

N_EPS = 3
N_H = 4
FIELDS = ("phi", "eta", "xi", "psi")
# (parity, ghost) of each component, read off the superfield expansion
FIELD_GRADING = {"phi": (0, 0), "eta": (1, -1), "xi": (1, 1), "psi": (0, 0)}


class FourierSeries:
    """``sum_m a_m cos(2 pi m tau) + b_m sin(2 pi m tau)``; ``sin[0]`` is ignored."""

    def __init__(self, cos=(), sin=()):
        self.cos = [float(x) for x in cos]
        self.sin = [float(x) for x in sin]

    def __call__(self, tau, order=0):
        total = 0.0
        w = 2 * pi
        for m, a in enumerate(self.cos):
            if a:
                total += a * _trig_deriv(np.cos, m * w, tau, order)
        for m, b in enumerate(self.sin):
            if b and m:
                total += b * _trig_deriv(np.sin, m * w, tau, order)
        return total

    def to_dict(self):
        return {"cos": self.cos, "sin": self.sin}


def _trig_deriv(fn, k, tau, order):
    if k == 0:
        return (1.0 if order == 0 else 0.0) if fn is np.cos else 0.0
    # d^j/dtau^j cos(k tau) = k^j cos(k tau + j pi/2), same for sin
    return k ** order * float(fn(k * tau + order * pi / 2))


@dataclass
class ProfileTerm:
    series: FourierSeries
    monomial: tuple


@dataclass
class FieldConfig:
    """Generators plus Fourier profiles for every component on the F-chart.

    ``profiles`` maps ``(field, index)`` to a list of :class:`ProfileTerm`;
    missing components are zero.
    """

    split: object
    generators: list  # (name, parity, ghost)
    profiles: dict = field(default_factory=dict)

    def __post_init__(self):
        self.chart = self.split.restricted_chart()
        names = [g[0] for g in self.generators]
        internal = ([f"_eps{i}" for i in range(N_EPS)] + [f"_h{i}" for i in range(N_H)] + ["_theta"])
        clash = set(names) & set(internal)
        if clash:
            raise ValueError(f"generator names {sorted(clash)} are reserved")
        parities = [int(g[1]) for g in self.generators] + [1] * N_EPS + [0] * N_H + [1]
        ghosts = [int(g[2]) for g in self.generators] + [-1] * N_EPS + [0] * N_H + [1]
        self.alg = GrassmannAlgebra(names + internal, parities, ghosts)
        self.user_names = names
        sizes = {"phi": self.chart.n, "eta": self.chart.n, "xi": self.chart.r, "psi": self.chart.r}
        for (fld, idx), terms in self.profiles.items():
            if fld not in sizes:
                raise ValueError(f"unknown field {fld!r}")
            if not 0 <= idx < sizes[fld]:
                raise ValueError(f"{fld} index {idx} out of range")
            par, gh = FIELD_GRADING[fld]
            for t in terms:
                for g in t.monomial:
                    if g not in names:
                        raise GeneratorBudgetExceeded(f"profile uses unknown generator {g!r}")
                mask, _ = self.alg.monomial_mask(t.monomial)
                if mask is None:
                    raise ValueError(f"monomial {t.monomial} vanishes")
                if self.alg.mask_parity(mask) != par or self.alg.mask_ghost(mask) != gh:
                    raise ValueError(f"{fld}[{idx}] term {'*'.join(t.monomial) or '1'} has parity "
                                     f"{self.alg.mask_parity(mask)} and ghost {self.alg.mask_ghost(mask)}, "
                                     f"expected parity {par} and ghost {gh}")

    def point(self, tau, jets=4):
        data = {}
        sizes = {"phi": self.chart.n, "eta": self.chart.n, "xi": self.chart.r, "psi": self.chart.r}
        for fld in FIELDS:
            comps = []
            for idx in range(sizes[fld]):
                js = []
                for order in range(jets):
                    el = GrassmannElement.zero(self.alg)
                    for t in self.profiles.get((fld, idx), []):
                        c = t.series(tau, order)
                        if c:
                            el = el + self.alg.monomial(t.monomial, c)
                    js.append(el)
                comps.append(js)
            data[fld] = comps
        return FieldPoint(self.alg, data)


class FieldPoint:
    """Jets of all components at one parameter value."""

    def __init__(self, alg, data, eps_used=0, h_used=0, theta_used=False):
        self.alg = alg
        self.data = data
        self.eps_used = eps_used
        self.h_used = h_used
        self.theta_used = theta_used
        self._mono = {}
        self._derived = {}  # memoised vary/shift_h results; points are never mutated
        x = self.data["xi"] or self.data["phi"] or self.data["psi"]
        self.jets = len(x[0]) if x else 0
        self.exact = _is_exact(self)

    @classmethod
    def from_jets(cls, alg, data):
        return cls(alg, data)

    def copy_with(self, data, **kw):
        opts = dict(eps_used=self.eps_used, h_used=self.h_used, theta_used=self.theta_used)
        opts.update(kw)
        return FieldPoint(self.alg, data, **opts)

    def get(self, fld, idx, order=0):
        js = self.data[fld][idx]
        if order >= len(js):
            raise ValueError(f"jet order {order} of {fld} not available (have {len(js)})")
        return js[order]

    def one(self):
        return self.alg.scalar(Fraction(1) if self.exact else 1.0, dtype=object if self.exact else float)

    def zero(self):
        return GrassmannElement.zero(self.alg, dtype=object if self.exact else float)

    def monomial(self, exps):
        """``phi^e`` as a scalar element (cached per point)."""
        exps = tuple(exps)
        hit = self._mono.get(exps)
        if hit is not None:
            return hit
        out = self.one()
        for mu, k in enumerate(exps):
            for _ in range(k):
                out = out * self.data["phi"][mu][0]
        self._mono[exps] = out
        return out

    def shift_h(self):
        """``X^(n) -> X^(n) + h X^(n+1)``; returns the new point and the name of ``h``."""
        if self.h_used >= N_H:
            raise GeneratorBudgetExceeded("no auxiliary derivative generator left")
        if self.jets < 2:
            raise ValueError("need at least one derivative jet to differentiate in tau")
        hit = self._derived.get("shift_h")
        if hit is not None:
            return hit
        name = f"_h{self.h_used}"
        h = self.alg.generator(name, dtype=object if self.exact else float)
        data = {}
        for fld, comps in self.data.items():
            data[fld] = [[js[n] + h * js[n + 1] for n in range(len(js) - 1)] for js in comps]
        self._derived["shift_h"] = out = (self.copy_with(data, h_used=self.h_used + 1), name)
        return out

    def superfield(self):
        """``phi -> phi + theta eta``, ``xi -> xi + theta psi`` (jets included)."""
        if self.theta_used:
            raise GeneratorBudgetExceeded("superfield generator already in use")
        th = self.alg.generator("_theta", dtype=object if self.exact else float)
        data = dict(self.data)
        data["phi"] = [[p + th * e for p, e in zip(pj, ej)] for pj, ej in zip(self.data["phi"], self.data["eta"])]
        data["xi"] = [[x + th * s for x, s in zip(xj, sj)] for xj, sj in zip(self.data["xi"], self.data["psi"])]
        return self.copy_with(data, theta_used=True)


def _is_exact(pt):
    for comps in pt.data.values():
        for js in comps:
            for el in js:
                return el.coeffs.dtype == object
    return False


def tau_derivative(fun, pt):
    """``d/dtau fun(pt)`` through one jet shift."""
    shifted, h = pt.shift_h()
    return fun(shifted).partial(h)


# -- polynomial data evaluated at Grassmann points ---------------------------

class CompiledPolys:
    """Array of :class:`Poly` flattened to (exponents, coefficient tensor)."""

    def __init__(self, polys):
        arr = np.asarray(polys, dtype=object)
        self.shape = arr.shape
        exps = sorted({e for p in arr.flat for e in p.terms})
        self.exps = exps
        self.coef_exact = np.empty((len(exps),) + self.shape, dtype=object)
        self.coef_exact.fill(Fraction(0))
        pos = {e: i for i, e in enumerate(exps)}
        for idx, p in np.ndenumerate(arr):
            for e, c in p.terms.items():
                self.coef_exact[(pos[e],) + idx] = c
        self.coef = self.coef_exact.astype(float) if len(exps) else np.zeros((0,) + self.shape)

    def is_zero(self):
        return not self.exps

    def _combine(self, pt):
        if not pt.exact:
            return self._combine_float(pt)
        coef = self.coef_exact
        masks = []
        rows = []
        for k, e in enumerate(self.exps):
            val = pt.monomial(e)
            for m, c in zip(val.masks.tolist(), val.coeffs):
                masks.append(m)
                rows.append(c * coef[k])
        if not masks:
            dt = object if pt.exact else float
            return np.zeros(0, dtype=np.int64), np.zeros((0,) + self.shape, dtype=dt)
        return np.array(masks, dtype=np.int64), np.array(rows, dtype=object if pt.exact else float)

    def _combine_float(self, pt):
        masks = []
        rows = []
        for k, e in enumerate(self.exps):
            val = pt.monomial(e)
            if len(val.masks):
                masks.append(val.masks)
                rows.append(val.coeffs.reshape((-1,) + (1,) * len(self.shape)) * self.coef[k])
        if not masks:
            return np.zeros(0, dtype=np.int64), np.zeros((0,) + self.shape)
        return np.concatenate(masks), np.concatenate(rows)

    def matrix(self, pt, row_par, col_par):
        masks, rows = self._combine(pt)
        if not len(masks):
            return GrassmannElement.zero(pt.alg, dtype=object if pt.exact else float,
                                         row_par=row_par, col_par=col_par)
        return GrassmannElement(pt.alg, masks, rows, row_par, col_par)

    def scalars(self, pt):
        """Dict ``index -> scalar element`` of the nonzero entries."""
        masks, rows = self._combine(pt)
        out = {}
        if not len(masks):
            return out
        for idx in np.ndindex(*self.shape):
            col = rows[(slice(None),) + idx]
            if pt.exact:
                col = np.array(list(col), dtype=object)
            el = GrassmannElement(pt.alg, masks, col)
            if not el.is_zero():
                out[idx] = el
        return out


class ChartData:
    """Structure functions of an F-chart and their first derivatives, compiled."""

    def __init__(self, chart):
        self.chart = chart
        n, r = chart.n, chart.r
        rho = np.empty((n, r), dtype=object)
        for mu in range(n):
            for I in range(r):
                rho[mu, I] = chart.rho(I, mu)
        C = np.empty((r, r, r), dtype=object)
        for K in range(r):
            for I in range(r):
                for J in range(r):
                    C[K, I, J] = chart.C(K, I, J)
        self.rho = CompiledPolys(rho)
        self.drho = [CompiledPolys(np.vectorize(lambda p, nu=nu: p.partial(nu), otypes=[object])(rho)) for nu in range(n)]
        self.C = CompiledPolys(C)
        self.dC = [CompiledPolys(np.vectorize(lambda p, nu=nu: p.partial(nu), otypes=[object])(C)) for nu in range(n)]


def brst_rules(cd, pt):
    """Residual BRST variation of every component at ``pt`` (order-0 values)."""
    n, r = cd.chart.n, cd.chart.r
    rho = cd.rho.scalars(pt)
    C = cd.C.scalars(pt)
    drho = [d.scalars(pt) for d in cd.drho]
    dC = [d.scalars(pt) for d in cd.dC]
    xi = [pt.get("xi", I) for I in range(r)]
    psi = [pt.get("psi", I) for I in range(r)]
    eta = [pt.get("eta", mu) for mu in range(n)]
    out = {fld: [] for fld in FIELDS}
    for mu in range(n):
        d_phi = pt.zero()
        d_eta = -pt.get("phi", mu, 1)
        for I in range(r):
            f = rho.get((mu, I))
            if f is not None:
                d_phi = d_phi - f * xi[I]
                d_eta = d_eta + f * psi[I]
            for nu in range(n):
                g = drho[nu].get((mu, I))
                if g is not None:
                    d_eta = d_eta + g * eta[nu] * xi[I]
        out["phi"].append(d_phi)
        out["eta"].append(d_eta)
    for K in range(r):
        d_xi = pt.zero()
        d_psi = -pt.get("xi", K, 1)
        for I in range(r):
            for J in range(r):
                c = C.get((K, I, J))
                if c is not None:
                    d_xi = d_xi + (c * xi[I] * xi[J]).scale(Fraction(1, 2))
                    d_psi = d_psi - c * psi[I] * xi[J]
                for nu in range(n):
                    g = dC[nu].get((K, I, J))
                    if g is not None:
                        d_psi = d_psi - (g * eta[nu] * xi[I] * xi[J]).scale(Fraction(1, 2))
        out["xi"].append(d_xi)
        out["psi"].append(d_psi)
    return out


def brst_delta(cd, pt, orders=1):
    """Variations with ``orders`` jets: ``{field: [[dX, dX', ...] per index]}``.

    Higher jets use ``(delta X)' = d/dh delta X(p + h p')``.
    """
    base = brst_rules(cd, pt)
    out = {fld: [[x] for x in vals] for fld, vals in base.items()}
    if orders <= 1:
        return out
    shifted, h = pt.shift_h()
    deeper = brst_delta(cd, shifted, orders - 1)
    for fld in FIELDS:
        for idx, js in enumerate(deeper[fld]):
            out[fld][idx].extend(x.partial(h) for x in js)
    return out


def vary(cd, pt, jets=None):
    """``p + eps delta p``; returns the new point and the name of ``eps``."""
    if pt.eps_used >= N_EPS:
        raise GeneratorBudgetExceeded("no variation generator left")
    keep = pt.jets - 1 if jets is None else jets
    if keep < 1 or keep > pt.jets - 1:
        raise ValueError(f"cannot keep {keep} jets after a variation (point has {pt.jets})")
    key = ("vary", cd, keep)
    hit = pt._derived.get(key)
    if hit is not None:
        return hit
    name = f"_eps{pt.eps_used}"
    eps = pt.alg.generator(name, dtype=object if pt.exact else float)
    d = brst_delta(cd, pt, keep)
    data = {}
    for fld in FIELDS:
        data[fld] = [[pt.data[fld][idx][o] + eps * d[fld][idx][o] for o in range(keep)]
                     for idx in range(len(pt.data[fld]))]
    pt._derived[key] = out = (pt.copy_with(data, eps_used=pt.eps_used + 1), name)
    return out


def delta(cd, fun, pt, jets=None):
    """``delta fun`` at ``pt`` for a functional ``fun(point) -> element``."""
    varied, eps = vary(cd, pt, jets)
    return fun(varied).partial(eps)


def delta_of(cd, fun, jets=None):
    """Functional ``p -> delta fun(p)``."""
    return lambda pt: delta(cd, fun, pt, jets)


def graded_monomials(alg, names, parity, ghost, max_len=3):
    """All products of distinct user generators with the given parity and ghost number."""
    from itertools import combinations

    out = []
    for k in range(max_len + 1):
        for combo in combinations(names, k):
            mask, _ = alg.monomial_mask(combo)
            if alg.mask_parity(mask) == parity and alg.mask_ghost(mask) == ghost:
                out.append(combo)
    return out


def random_point(rng, cfg, jets=3, exact=True, terms=3, max_len=3):
    """Point with sparse random rational (or float) jets for every component."""
    alg = cfg.alg
    ch = cfg.chart
    sizes = {"phi": ch.n, "eta": ch.n, "xi": ch.r, "psi": ch.r}
    data = {}
    for fld in FIELDS:
        par, gh = FIELD_GRADING[fld]
        monos = graded_monomials(alg, cfg.user_names, par, gh, max_len)
        comps = []
        for _ in range(sizes[fld]):
            js = []
            for _ in range(jets):
                el = GrassmannElement.zero(alg, dtype=object if exact else float)
                if monos:
                    for p in rng.choice(len(monos), size=min(terms, len(monos)), replace=False):
                        c = int(rng.integers(-3, 4))
                        if c:
                            val = Fraction(c) if exact else float(c) * 0.37
                            el = el + alg.monomial(monos[p], val, dtype=object if exact else float)
                js.append(el)
            comps.append(js)
        data[fld] = comps
    return FieldPoint(alg, data)
