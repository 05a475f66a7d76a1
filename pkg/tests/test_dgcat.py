from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from algebroidkit import catalog
from algebroidkit.dgcat import MorphismComplex, cohomology_point, euler_characteristic, hom_differential
from algebroidkit.homotopy import mc_residual
from algebroidkit.graded import wedge
from algebroidkit.sampling import random_bundle, random_form, random_superconnection

from oracles import ce_betti_point, line_to_line_oracle
from strategies import rng_from, seeds

CHARTS = catalog.charts()


def betti(pair):
    return [b for _, b in cohomology_point(pair)]


def test_so3_trivial_coefficients():
    D = catalog.trivial_line(catalog.so3())
    assert betti(MorphismComplex(D, D)) == [1, 0, 0, 1]
    assert ce_betti_point(catalog.so3()) == [1, 0, 0, 1]


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_abelian_binomials(r):
    D = catalog.trivial_line(catalog.abelian(r))
    assert betti(MorphismComplex(D, D)) == [comb(r, k) for k in range(r + 1)]


def test_solvable_matches_dense_oracle():
    D = catalog.trivial_line(catalog.solvable())
    assert betti(MorphismComplex(D, D)) == ce_betti_point(catalog.solvable())


def test_line_to_line_endomorphisms():
    D = catalog.line_to_line()
    got = dict(cohomology_point(MorphismComplex(D, D)))
    assert got == line_to_line_oracle()
    assert all(b == 0 for b in got.values())


def test_euler_characteristic_equals_alternating_betti():
    for D in (catalog.line_to_line(), catalog.trivial_line(catalog.so3()), catalog.so3_adjoint_line()):
        pair = MorphismComplex(D, D)
        assert euler_characteristic(pair) == sum((-1) ** m * b for m, b in cohomology_point(pair))


@given(seeds, st.sampled_from(sorted(n for n, c in CHARTS.items() if c.r <= 3)))
def test_square_of_differential(seed, name):
    rng = rng_from(seed)
    ch = CHARTS[name]
    D1 = random_superconnection(rng, ch, random_bundle(rng, max_total=3), max_degree=1)
    D2 = random_superconnection(rng, ch, random_bundle(rng, max_total=3), max_degree=1)
    pair = MorphismComplex(D1, D2)
    k = int(rng.integers(0, ch.r + 1))
    m = int(rng.integers(-2, 3))
    w = random_form(rng, ch, D1.bundle, D2.bundle, k, m - k, max_degree=1)
    dw = hom_differential(pair, w, degree=m)
    lhs = hom_differential(pair, dw, degree=m + 1)
    assert lhs == wedge(mc_residual(D2), w) - wedge(w, mc_residual(D1))


def test_cohomology_needs_a_point():
    D = catalog.trivial_line(catalog.tangent_plane())
    with pytest.raises(ValueError):
        cohomology_point(MorphismComplex(D, D))


def test_adjoint_coefficients_have_no_cohomology():
    # nontrivial irreducible coefficients over a semisimple algebra
    from algebroidkit.homotopy import Superconnection
    a = catalog.trivial_line(catalog.so3())
    ad = Superconnection(catalog.so3_adjoint())
    assert all(b == 0 for _, b in cohomology_point(MorphismComplex(a, ad)))
