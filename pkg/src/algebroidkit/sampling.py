"""Random exact data for property suites: polynomials, connections, superconnections."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .connections import EConnection
from .graded import GradedBundle, GradedMatrix, SuperForm, degree_map, poly_identity, poly_zeros
from .homotopy import Superconnection, assemble_alpha, disassemble_alpha, gauge_transform
from .poly import Poly


def random_poly(rng, nvars, max_degree=2, density=0.5, coeff=3):
    terms = {}
    exps = [(0,) * nvars]
    if nvars:
        for d in range(1, max_degree + 1):
            for combo in combinations(range(nvars + d - 1), d):
                # stars and bars: exponent vectors of total degree d
                e = [0] * nvars
                prev = -1
                var = 0
                for c in combo:
                    var += c - prev - 1
                    e[var] += 1
                    prev = c
                exps.append(tuple(e))
    for e in exps:
        if rng.random() < density:
            c = int(rng.integers(-coeff, coeff + 1))
            if c:
                terms[e] = c
    return Poly(nvars, terms)


def random_matrix(rng, shape, nvars, mask=None, **kw):
    m = poly_zeros(shape, nvars)
    for idx in np.ndindex(*shape):
        if mask is None or mask[idx]:
            m[idx] = random_poly(rng, nvars, **kw)
    return m


def random_bundle(rng, lo=-2, hi=2, max_total=4):
    while True:
        ranks = {d: int(rng.integers(0, 2)) for d in range(lo, hi + 1)}
        total = sum(ranks.values())
        if 1 <= total <= max_total:
            return GradedBundle(ranks)


def random_connection(rng, chart, bundle, **kw):
    deg0 = degree_map(bundle, bundle) == 0
    return EConnection(chart, bundle, [random_matrix(rng, (bundle.total,) * 2, chart.n, deg0, **kw)
                                       for _ in range(chart.r)])


def random_form(rng, chart, source, target, form_degree, endo_degree, **kw):
    mask = degree_map(target, source) == endo_degree
    terms = {}
    for I in combinations(range(chart.r), form_degree):
        terms[I] = random_matrix(rng, (target.total, source.total), chart.n, mask, **kw)
    return SuperForm(chart.r, chart.n, source, target, terms)


def random_superconnection(rng, chart, bundle, **kw):
    """Generic (almost never flat) superconnection with every block populated."""
    conn = random_connection(rng, chart, bundle, **kw)
    v = GradedMatrix(bundle, bundle, 1, random_matrix(rng, (bundle.total,) * 2, chart.n,
                                                      degree_map(bundle, bundle) == 1, **kw), chart.n)
    higher = {k: random_form(rng, chart, bundle, bundle, k, 1 - k, **kw) for k in range(2, chart.r + 1)}
    return Superconnection(conn, v, higher)


def random_unipotent(rng, chart, bundle, density=0.4, max_degree=1):
    """``1 + N`` of total degree 0 with ``N`` nilpotent (strictly triangular 0-form part)."""
    b = bundle
    dm = degree_map(b, b)
    tri = np.triu(np.ones((b.total, b.total), dtype=bool), 1) & (dm == 0)
    g = SuperForm(chart.r, chart.n, b, b, {(): poly_identity(b.total, chart.n)})
    kw = dict(max_degree=max_degree, density=density, coeff=2)
    g = g + SuperForm(chart.r, chart.n, b, b, {(): random_matrix(rng, (b.total,) * 2, chart.n, tri, **kw)})
    for k in range(1, chart.r + 1):
        g = g + random_form(rng, chart, b, b, k, -k, **kw)
    return g


def random_flat_superconnection(rng, chart, bundle, **kw):
    """Gauge transform of a flat seed (constant ``v`` between two adjacent degrees)."""
    b = bundle
    degs = sorted(b.ranks)
    v = poly_zeros((b.total, b.total), chart.n)
    pairs = [d for d in degs if d + 1 in b.ranks]
    if pairs:
        a = pairs[int(rng.integers(len(pairs)))]
        for i in b.indices(a + 1):
            for j in b.indices(a):
                v[i, j] = Poly.const(int(rng.integers(-2, 3)), chart.n)
    seed = Superconnection(EConnection.trivial(chart, b), GradedMatrix(b, b, 1, v, chart.n))
    g = random_unipotent(rng, chart, b, **kw)
    return disassemble_alpha(chart, b, gauge_transform(chart, assemble_alpha(seed), g))


def perturb(rng, D, **kw):
    """Add a random nonzero block at a random bidegree ``(k, 1 - k)``."""
    ch = D.chart
    b = D.bundle
    choices = [k for k in range(0, ch.r + 1) if np.any(degree_map(b, b) == 1 - k)]
    if not choices:
        return D
    alpha = assemble_alpha(D)
    for _ in range(20):
        k = choices[int(rng.integers(len(choices)))]
        extra = random_form(rng, ch, b, b, k, 1 - k, **kw)
        if not extra.is_zero():
            return disassemble_alpha(ch, b, alpha + extra)
    return D
