import pytest
from hypothesis import given
from hypothesis import strategies as st

from algebroidkit import catalog
from algebroidkit.algebroid import (AdaptedSplit, AlgebroidChart, d_E_apply, frame_form, validate_algebroid,
                                    validate_subalgebroid)
from algebroidkit.graded import SuperForm
from algebroidkit.poly import Poly
from algebroidkit.sampling import random_form

from oracles import lie_jacobi_ok, structure_residuals
from strategies import rng_from, seeds

CHARTS = catalog.charts()


def test_so3_d_e3():
    ch = catalog.so3()
    w = d_E_apply(ch, frame_form(ch, 2))
    assert w.terms.keys() == {(0, 1)}
    assert w.coefficient((0, 1))[0, 0] == Poly.const(-1, 0)


@pytest.mark.parametrize("name", sorted(CHARTS))
def test_catalog_passes_and_matches_oracle(name):
    ch = CHARTS[name]
    assert validate_algebroid(ch).passed
    assert structure_residuals(ch) == []


@pytest.mark.parametrize("name", sorted(CHARTS))
@given(seed=seeds, k=st.integers(0, 3))
def test_d_e_squares_to_zero_on_random_forms(name, seed, k):
    ch = CHARTS[name]
    if k > ch.r:
        return
    from algebroidkit.graded import LINE
    w = random_form(rng_from(seed), ch, LINE, LINE, k, 0, max_degree=2)
    assert d_E_apply(ch, d_E_apply(ch, w)).is_zero()


@given(seeds)
def test_d_e_is_a_derivation(seed):
    from algebroidkit.graded import LINE, wedge
    ch = CHARTS["so3_action"]
    rng = rng_from(seed)
    k = int(rng.integers(0, 3))
    a = random_form(rng, ch, LINE, LINE, k, 0, max_degree=1)
    b = random_form(rng, ch, LINE, LINE, int(rng.integers(0, 2)), 0, max_degree=1)
    lhs = d_E_apply(ch, wedge(a, b))
    rhs = wedge(d_E_apply(ch, a), b)
    tail = wedge(a, d_E_apply(ch, b))
    assert lhs == (rhs - tail if k % 2 else rhs + tail)


def rank3_over_line(c3_12, c1_23, c2_31):
    x = Poly.var(0, 1)
    val = lambda c: x if c == "x1" else c  # noqa: E731
    br = {(0, 1, 2): val(c3_12), (1, 2, 0): val(c1_23), (0, 2, 1): -val(c2_31)}
    return AlgebroidChart(["x1"], ["e1", "e2", "e3"], [[0], [0], [0]], br)


def test_twisted_bundle_passes():
    assert validate_algebroid(catalog.twisted_line()).passed


def test_cyclic_rescaling_keeps_jacobi():
    # C^3_12 = 1, C^1_23 = 1, C^2_31 = x1 is a pointwise rescaling of so(3), so it stays valid
    ch = rank3_over_line(1, 1, "x1")
    assert structure_residuals(ch) == []
    assert validate_algebroid(ch).passed


def test_non_cyclic_mutation_fails_with_residual():
    ch = rank3_over_line(1, 1, "x1")
    br = dict(ch.bracket_entries())
    br[(0, 1, 0)] = Poly.const(1, 1)
    bad = AlgebroidChart(ch.coords, ch.frame, [[0], [0], [0]], br)
    rep = validate_algebroid(bad)
    assert not rep.passed
    assert rep.checks[0].residuals
    assert structure_residuals(bad)


def test_lie_jacobi_oracle_agrees_on_so3_mutations():
    ch = catalog.so3()
    base = {(K, I, J): ch.C(K, I, J).constant_value() for K in range(3) for I in range(3) for J in range(I + 1, 3)}
    seen = set()
    for key in base:
        for val in (0, 2, -1):
            C = dict(base)
            C[key] = val
            br = {(I, J, K): v for (K, I, J), v in C.items() if v}
            mutated = AlgebroidChart([], ch.frame, [[], [], []], br)
            seen.add(lie_jacobi_ok(C, 3))
            assert validate_algebroid(mutated).passed == lie_jacobi_ok(C, 3)
    assert seen == {True, False}


def test_subalgebroid_conditions():
    so3 = catalog.so3()
    assert not validate_subalgebroid(AdaptedSplit(so3, [], [0, 1])).passed
    assert validate_subalgebroid(AdaptedSplit(so3, [], [0])).passed
    solv = catalog.solvable()
    assert validate_subalgebroid(AdaptedSplit(solv, [], [0])).passed
    for name, split in catalog.adapted_splits().items():
        assert validate_subalgebroid(split).passed, name


def test_anchor_must_be_tangent_on_boundary():
    # tangent plane with F = span(e2) on Y = {x2 = 0}: rho_2 points off Y
    plane = catalog.tangent_plane()
    rep = validate_subalgebroid(AdaptedSplit(plane, [0], [1]))
    assert not rep.passed
    assert rep.checks[0].residuals


def test_bracket_validation():
    with pytest.raises(ValueError):
        AlgebroidChart([], ["a", "b"], [[], []], {(0, 0, 1): 1})
    with pytest.raises(ValueError):
        AlgebroidChart([], ["a"], [[]], {(0, 1, 0): 1})
