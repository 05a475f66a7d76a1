from fractions import Fraction

import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from algebroidkit.linalg import nullspace, rank

from oracles import brute_rank
from strategies import small_fracs


def matrices(max_rows=5, max_cols=5):
    return st.integers(1, max_cols).flatmap(
        lambda c: st.lists(st.lists(small_fracs, min_size=c, max_size=c), min_size=1, max_size=max_rows))


@given(matrices())
def test_rank_matches_sympy(rows):
    assert rank(rows) == brute_rank(rows)


@given(matrices())
def test_nullspace_is_kernel_of_right_dimension(rows):
    ncols = len(rows[0])
    basis = nullspace(rows, ncols)
    assert len(basis) == ncols - brute_rank(rows)
    for x in basis:
        for row in rows:
            assert sum(Fraction(a) * b for a, b in zip(row, x)) == 0
    if basis:
        assert sp.Matrix([[sp.Rational(v.numerator, v.denominator) for v in x] for x in basis]).rank() == len(basis)


def test_rank_low_rank_product():
    # rank-one outer product with a zero column in the middle
    u = [1, Fraction(2, 3), -4]
    v = [3, 0, Fraction(1, 7), 5]
    rows = [[a * b for b in v] for a in u]
    assert rank(rows) == 1


def test_empty():
    assert rank([]) == 0
    assert len(nullspace([], 3)) == 3
