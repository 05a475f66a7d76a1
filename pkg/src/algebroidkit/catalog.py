"""Named charts and couplings used by the examples, the tests and the CLI."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .algebroid import AdaptedSplit, AlgebroidChart
from .connections import EConnection
from .graded import GradedBundle, GradedMatrix, SuperForm, poly_identity, poly_zeros
from .homotopy import Superconnection, assemble_alpha, disassemble_alpha, gauge_transform
from .poly import Poly


def _eps(i, j, k):
    return (i - j) * (j - k) * (k - i) // 2


def tangent(n):
    """Tangent algebroid of ``R^n`` with the coordinate frame."""
    coords = [f"x{i + 1}" for i in range(n)]
    anchor = [[int(i == mu) for mu in range(n)] for i in range(n)]
    return AlgebroidChart(coords, [f"e{i + 1}" for i in range(n)], anchor, {}, name=f"T R^{n}")


def tangent_plane():
    return tangent(2)


def tangent_line():
    return tangent(1)


def abelian(r):
    return AlgebroidChart([], [f"e{i + 1}" for i in range(r)], [[] for _ in range(r)], {}, name=f"abelian rank {r}")


def so3():
    bracket = {(i, j, k): _eps(i, j, k) for i in range(3) for j in range(i + 1, 3) for k in range(3) if _eps(i, j, k)}
    return AlgebroidChart([], ["e1", "e2", "e3"], [[], [], []], bracket, name="so(3)")


def solvable():
    """Two-dimensional non-abelian Lie algebra ``[e1, e2] = e1``."""
    return AlgebroidChart([], ["e1", "e2"], [[], []], {(0, 1, 0): 1}, name="solvable")


def so3_action():
    """Action algebroid of rotations on ``R^3``: ``rho_I = eps_{I nu mu} x^nu d_mu``."""
    n = 3
    anchor = []
    for I in range(3):
        row = []
        for mu in range(3):
            p = Poly(n)
            for nu in range(3):
                e = _eps(I, nu, mu)
                if e:
                    p = p + Poly.var(nu, n) * e
            row.append(p)
        anchor.append(row)
    bracket = {(i, j, k): -_eps(i, j, k) for i in range(3) for j in range(i + 1, 3) for k in range(3) if _eps(i, j, k)}
    return AlgebroidChart(["x1", "x2", "x3"], ["e1", "e2", "e3"], anchor, bracket, name="so(3) x R^3")


def product(a, b, name=None):
    """Direct product of two charts (frames of ``b`` act on ``b``'s coordinates)."""
    n = a.n + b.n
    coords = a.coords + b.coords
    frame = a.frame + b.frame

    def lift(p, shift):
        return Poly(n, {(0,) * shift + e + (0,) * (n - shift - len(e)): c for e, c in p.terms.items()})

    anchor = []
    for I in range(a.r):
        anchor.append([lift(a.rho(I, mu), 0) for mu in range(a.n)] + [Poly(n)] * b.n)
    for I in range(b.r):
        anchor.append([Poly(n)] * a.n + [lift(b.rho(I, mu), a.n) for mu in range(b.n)])
    bracket = {}
    for (i, j, k), p in a.bracket_entries().items():
        bracket[(i, j, k)] = lift(p, 0)
    for (i, j, k), p in b.bracket_entries().items():
        bracket[(i + a.r, j + a.r, k + a.r)] = lift(p, a.n)
    if b.frame and set(a.frame) & set(b.frame):
        frame = [f"{f}a" for f in a.frame] + [f"{f}b" for f in b.frame]
    if set(a.coords) & set(b.coords):
        raise ValueError("product charts need distinct coordinate names")
    return AlgebroidChart(coords, frame, anchor, bracket, name=name or f"{a.name} x {b.name}")


def line_x_solvable():
    return product(tangent_line(), solvable(), name="T R x solvable")


def plane_x_abelian():
    return product(tangent_plane(), abelian(1), name="T R^2 x abelian rank 1")


def twisted_line():
    """Rank 3 over the line, zero anchor, ``C^3_12 = x1``."""
    return AlgebroidChart(["x1"], ["e1", "e2", "e3"], [[0], [0], [0]], {(0, 1, 2): Poly.var(0, 1)},
                          name="twisted bundle of Lie algebras")


def charts():
    """The validation catalog, keyed by a short name."""
    return {
        "plane": tangent_plane(),
        "line": tangent_line(),
        "abelian3": abelian(3),
        "so3": so3(),
        "solvable": solvable(),
        "so3_action": so3_action(),
        "line_x_solvable": line_x_solvable(),
        "plane_x_abelian": plane_x_abelian(),
        "twisted_line": twisted_line(),
    }


def adapted_splits():
    """Adapted splits ``F -> Y`` for each catalog chart.

    Charts with a natural proper subalgebroid get it; the rest use the whole
    chart (Y = X, F = E).
    """
    out = {name: AdaptedSplit(ch, range(ch.n), range(ch.r)) for name, ch in charts().items()}
    out["plane"] = AdaptedSplit(tangent_plane(), [0], [0])
    out["so3_action"] = AdaptedSplit(so3_action(), [2], [2])
    out["line_x_solvable"] = AdaptedSplit(line_x_solvable(), [0], [0, 1])
    return out


# -- couplings -------------------------------------------------------------

def adjoint_matrices(chart):
    """``(ad_I)_{KJ} = C^K_IJ`` for a Lie algebra chart."""
    r = chart.r
    out = []
    for I in range(r):
        m = poly_zeros((r, r), chart.n)
        for J in range(r):
            for K in range(r):
                m[K, J] = chart.C(K, I, J)
        out.append(m)
    return out


def so3_adjoint(scale3=1):
    ch = so3()
    A = adjoint_matrices(ch)
    A[2] = A[2] * Fraction(scale3)
    return EConnection(ch, GradedBundle({0: 3}), A)


def so3_two_term():
    """Adjoint in degrees 0 and 1 with ``v`` the identity between them."""
    ch = so3()
    b = GradedBundle({0: 3, 1: 3})
    A = []
    for ad in adjoint_matrices(ch):
        m = poly_zeros((6, 6), 0)
        m[:3, :3] = ad
        m[3:, 3:] = ad
        A.append(m)
    v = GradedMatrix.from_blocks(b, b, 1, {0: poly_identity(3, 0)}, 0)
    return Superconnection(EConnection(ch, b, A), v)


def so3_adjoint_line():
    """Adjoint in degree 0 plus a trivial line in degree 1, gauged to switch on ``Omega^(2)``."""
    ch = so3()
    b = GradedBundle({0: 3, 1: 1})
    A = []
    for ad in adjoint_matrices(ch):
        m = poly_zeros((4, 4), 0)
        m[:3, :3] = ad
        A.append(m)
    seed = Superconnection(EConnection(ch, b, A))
    g1 = poly_zeros((4, 4), 0)
    g1[1, 3] = Poly.const(1, 0)
    g3 = poly_zeros((4, 4), 0)
    g3[0, 3] = Poly.const(2, 0)
    g = SuperForm(ch.r, ch.n, b, b, {(): poly_identity(4, 0), (0,): g1, (2,): g3})
    return disassemble_alpha(ch, b, gauge_transform(ch, assemble_alpha(seed), g))


def line_to_line(r=1):
    """Trivial line in degrees 0 and 1, ``v = 1``, over an abelian Lie algebra."""
    ch = abelian(r)
    b = GradedBundle({0: 1, 1: 1})
    v = GradedMatrix.from_blocks(b, b, 1, {0: [[1]]}, 0)
    return Superconnection(EConnection.trivial(ch, b), v)


def trivial_line(chart):
    return Superconnection(EConnection.trivial(chart, GradedBundle({0: 1})))


def broken_v():
    """``v = x1`` on the line: not covariantly constant."""
    ch = tangent_line()
    b = GradedBundle({0: 1, 1: 1})
    v = GradedMatrix.from_blocks(b, b, 1, {0: [[Poly.var(0, 1)]]}, 1)
    return Superconnection(EConnection.trivial(ch, b), v)


def super_plane():
    """A flat superconnection with nonzero ``Omega^(2)`` on the tangent plane.

    Built as a polynomial gauge transform of ``v = id: V^0 -> V^1`` on
    ``V = R^2 + R^2[-1]``.
    """
    ch = tangent_plane()
    b = GradedBundle({0: 2, 1: 2})
    x1, x2 = Poly.var(0, 2), Poly.var(1, 2)
    v = GradedMatrix.from_blocks(b, b, 1, {0: poly_identity(2, 2)}, 2)
    seed = Superconnection(EConnection.trivial(ch, b), v)
    g0 = poly_identity(4, 2)
    g0[0, 1] = x1 * x2
    g0[3, 2] = x1 - 1
    g1 = poly_zeros((4, 4), 2)
    g1[0, 2] = x2
    g1[1, 3] = Poly.const(1, 2)
    g2 = poly_zeros((4, 4), 2)
    g2[1, 2] = x1 * x1
    g = SuperForm(ch.r, ch.n, b, b, {(): g0, (0,): g1, (1,): g2})
    alpha = gauge_transform(ch, assemble_alpha(seed), g)
    return disassemble_alpha(ch, b, alpha)


def two_term_non_flat_nabla():
    """``A`` non-flat but compensated by ``Omega^(2)`` (third equation holds)."""
    return super_plane()


def superconnections():
    return {
        "so3_two_term": so3_two_term(),
        "so3_adjoint_line": so3_adjoint_line(),
        "line_to_line": line_to_line(),
        "broken_v": broken_v(),
        "super_plane": super_plane(),
    }


def gl_matrix(rows, nvars=0):
    return np.array([[Poly.const(x, nvars) for x in row] for row in rows], dtype=object)
