"""Fraction-free elimination over the rationals.

Rows are scaled to integers first so the Bareiss recurrence runs on Python
ints; ranks and kernels are therefore exact.
"""

from fractions import Fraction
from math import lcm


def _integer_rows(rows):
    out = []
    for row in rows:
        row = [Fraction(x) for x in row]
        den = 1
        for x in row:
            den = lcm(den, x.denominator)
        out.append([int(x * den) for x in row])
    return out


def echelon(rows, ncols=None):
    """Bareiss row echelon form.

    Returns ``(matrix, pivots)`` where ``matrix`` is the integer echelon form
    and ``pivots`` the pivot column indices.
    """
    m = _integer_rows(rows)
    if not m:
        return [], []
    ncols = len(m[0]) if ncols is None else ncols
    nrows = len(m)
    pivots = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        for i in range(r + 1, nrows):
            mic = m[i][c]
            row_i = m[i]
            row_r = m[r]
            for j in range(c, ncols):
                row_i[j] = (p * row_i[j] - mic * row_r[j]) // prev
        prev = p
        pivots.append(c)
        r += 1
    return m, pivots


def rank(rows, ncols=None):
    if not rows:
        return 0
    return len(echelon(rows, ncols)[1])


def nullspace(rows, ncols):
    """Basis of {x : A x = 0} as lists of Fractions."""
    if not rows:
        basis = []
        for k in range(ncols):
            e = [Fraction(0)] * ncols
            e[k] = Fraction(1)
            basis.append(e)
        return basis
    m, pivots = echelon(rows, ncols)
    # back-substitute on the echelon form using exact fractions
    red = [[Fraction(x) for x in row] for row in m[: len(pivots)]]
    for i in range(len(pivots) - 1, -1, -1):
        c = pivots[i]
        p = red[i][c]
        red[i] = [x / p for x in red[i]]
        for k in range(i):
            f = red[k][c]
            if f:
                red[k] = [a - f * b for a, b in zip(red[k], red[i])]
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for i, c in enumerate(pivots):
            x[c] = -red[i][f]
        basis.append(x)
    return basis
