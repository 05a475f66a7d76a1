"""Lie algebroid charts, the differential d_E, and axiom validation."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .graded import SuperForm, is_zero_matrix, poly_zeros, sort_sign
from .poly import Poly
from .report import Check, Report


class AlgebroidChart:
    """Local data ``(rho^mu_I, C^K_IJ)`` of a Lie algebroid.

    ``anchor[I][mu]`` is ``rho^mu_I``.  ``bracket`` maps ``(I, J, K)`` with
    ``I < J`` to ``C^K_IJ``; the other ordering is implied by antisymmetry.
    """

    def __init__(self, coords, frame, anchor, bracket=None, name=None):
        self.coords = list(coords)
        self.frame = list(frame)
        self.n = len(self.coords)
        self.r = len(self.frame)
        self.name = name
        if len(anchor) != self.r or any(len(row) != self.n for row in anchor):
            raise ValueError(f"anchor must be {self.r}x{self.n}")
        self.anchor = [[_as_poly(p, self.n) for p in row] for row in anchor]
        self._C = {}
        for (i, j, k), val in (bracket or {}).items():
            if not (0 <= i < self.r and 0 <= j < self.r and 0 <= k < self.r):
                raise ValueError(f"bracket index ({i}, {j}, {k}) out of range")
            if i == j:
                if _as_poly(val, self.n):
                    raise ValueError("bracket must be antisymmetric: C^K_II must vanish")
                continue
            p = _as_poly(val, self.n)
            if i > j:
                i, j, p = j, i, -p
            if (i, j, k) in self._C:
                raise ValueError(f"bracket entry ({i}, {j}, {k}) given twice")
            if p:
                self._C[(i, j, k)] = p

    def rho(self, I, mu):
        return self.anchor[I][mu]

    def C(self, K, I, J):
        """Structure function ``C^K_IJ``."""
        if I == J:
            return Poly(self.n)
        if I < J:
            return self._C.get((I, J, K), Poly(self.n))
        p = self._C.get((J, I, K))
        return -p if p is not None else Poly(self.n)

    def bracket_entries(self):
        return dict(self._C)

    def anchor_apply(self, I, f):
        """``rho^mu_I d_mu f`` for a polynomial ``f``."""
        out = Poly(self.n)
        for mu in range(self.n):
            r = self.anchor[I][mu]
            if r:
                out = out + r * f.partial(mu)
        return out

    def coordinate(self, mu):
        return Poly.var(mu, self.n)

    def __repr__(self):
        return f"AlgebroidChart({self.name or ''} n={self.n}, r={self.r})"


def _as_poly(p, n):
    if isinstance(p, Poly):
        if p.nvars != n:
            raise ValueError(f"structure function has {p.nvars} variables, expected {n}")
        return p
    return Poly.const(p, n)


class AdaptedSplit:
    """Adapted coordinates: primed coordinates/frame span ``Y`` and ``F``."""

    def __init__(self, chart, primed_coords, primed_frame):
        self.chart = chart
        self.primed_coords = sorted(int(i) for i in primed_coords)
        self.primed_frame = sorted(int(i) for i in primed_frame)
        if any(not 0 <= i < chart.n for i in self.primed_coords):
            raise ValueError("primed coordinate index out of range")
        if any(not 0 <= i < chart.r for i in self.primed_frame):
            raise ValueError("primed frame index out of range")
        self.normal_coords = [i for i in range(chart.n) if i not in self.primed_coords]
        self.normal_frame = [i for i in range(chart.r) if i not in self.primed_frame]

    def on_boundary(self, p):
        """Set the normal coordinates to zero and keep the primed variables."""
        return p.restrict(self.primed_coords)

    def restricted_chart(self):
        c = self.chart
        anchor = [[self.on_boundary(c.rho(I, mu)) for mu in self.primed_coords] for I in self.primed_frame]
        bracket = {}
        for a, I in enumerate(self.primed_frame):
            for b, J in enumerate(self.primed_frame):
                if a < b:
                    for k, K in enumerate(self.primed_frame):
                        p = self.on_boundary(c.C(K, I, J))
                        if p:
                            bracket[(a, b, k)] = p
        return AlgebroidChart([c.coords[i] for i in self.primed_coords],
                              [c.frame[i] for i in self.primed_frame], anchor, bracket,
                              name=f"{c.name or 'chart'}|F")


def d_E_apply(chart, w):
    """Lie algebroid differential on ordered components, entrywise on matrices.

    ``(d w)_{K} = sum_i (-1)^i rho_{K_i} w_{K minus K_i}
                 + sum_{i<j} (-1)^{i+j} C^J_{K_i K_j} w_{J, K minus {K_i, K_j}}``
    with 0-based positions.
    """
    return cartan_differential(chart, w, lambda I, m: apply_anchor(chart, I, m))


def cartan_differential(chart, w, act):
    """Component formula with ``act(I, m)`` in place of the anchor action."""
    if w.rank != chart.r or w.nvars != chart.n:
        raise ValueError("form does not live on this chart")
    shape = (w.target.total, w.source.total)
    degrees = sorted({len(k) for k in w.terms})
    out = {}
    for k in degrees:
        if k + 1 > chart.r:
            continue
        for K in combinations(range(chart.r), k + 1):
            acc = poly_zeros(shape, chart.n)
            touched = False
            for i in range(k + 1):
                rest = K[:i] + K[i + 1:]
                if rest in w.terms:
                    term = act(K[i], w.terms[rest])
                    acc = acc + term if i % 2 == 0 else acc - term
                    touched = True
            for i in range(k + 1):
                for j in range(i + 1, k + 1):
                    rest = K[:i] + K[i + 1:j] + K[j + 1:]
                    for J in range(chart.r):
                        c = chart.C(J, K[i], K[j])
                        if not c:
                            continue
                        key, s = sort_sign((J,) + rest)
                        if key is None or key not in w.terms:
                            continue
                        term = w.terms[key] * c
                        if (i + j) % 2 == 1:
                            s = -s
                        acc = acc + term if s > 0 else acc - term
                        touched = True
            if touched and not is_zero_matrix(acc):
                out[K] = acc
    return SuperForm(w.rank, w.nvars, w.source, w.target, out)


def apply_anchor(chart, I, m):
    out = m.copy()
    for idx, p in np.ndenumerate(m):
        out[idx] = chart.anchor_apply(I, p)
    return out


def coordinate_form(chart, mu):
    return SuperForm.scalar(chart.r, chart.n, {(): Poly.var(mu, chart.n)})


def frame_form(chart, K):
    return SuperForm.scalar(chart.r, chart.n, {(K,): 1})


def _residual_lines(form, chart, label):
    out = []
    for key in sorted(form.terms):
        p = form.terms[key][0, 0]
        idx = "".join(chart.frame[i] for i in key) or "-"
        out.append((f"{label}[{idx}]", p.to_string(chart.coords)))
    return out


def validate_algebroid(chart):
    """Check ``d_E^2 = 0`` on every coordinate function and frame covector."""
    report = Report("validate")
    bad = []
    gens = 0
    for mu in range(chart.n):
        gens += 1
        res = d_E_apply(chart, d_E_apply(chart, coordinate_form(chart, mu)))
        if not res.is_zero():
            bad.extend(_residual_lines(res, chart, f"d_E^2 {chart.coords[mu]}"))
    for K in range(chart.r):
        gens += 1
        res = d_E_apply(chart, d_E_apply(chart, frame_form(chart, K)))
        if not res.is_zero():
            bad.extend(_residual_lines(res, chart, f"d_E^2 e^{chart.frame[K]}"))
    detail = (f"d_E^2 = 0 on all {gens} generators" if not bad
              else f"d_E^2 fails on {len({b[0].split('[')[0] for b in bad})} of {gens} generators")
    report.add(Check("algebroid axioms (d_E^2 = 0)", not bad, detail, bad))
    return report


def validate_subalgebroid(split):
    c = split.chart
    report = Report("validate-subalgebroid")
    anchor_bad = []
    for I in split.primed_frame:
        for mu in split.normal_coords:
            p = split.on_boundary(c.rho(I, mu))
            if p:
                anchor_bad.append((f"rho^{c.coords[mu]}_{c.frame[I]}|Y",
                                   p.to_string([c.coords[i] for i in split.primed_coords])))
    report.add(Check("normal anchor components vanish on Y", not anchor_bad, "", anchor_bad))
    bracket_bad = []
    for a, I in enumerate(split.primed_frame):
        for J in split.primed_frame[a + 1:]:
            for K in split.normal_frame:
                p = split.on_boundary(c.C(K, I, J))
                if p:
                    bracket_bad.append((f"C^{c.frame[K]}_{c.frame[I]}{c.frame[J]}|Y",
                                        p.to_string([c.coords[i] for i in split.primed_coords])))
    report.add(Check("normal bracket components vanish on Y", not bracket_bad, "", bracket_bad))
    sub = validate_algebroid(split.restricted_chart())
    inner = sub.checks[0]
    report.add(Check("restricted chart is a Lie algebroid", inner.passed, inner.detail, inner.residuals))
    return report


def scalar_form(chart, components):
    return SuperForm.scalar(chart.r, chart.n, components)
