from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from algebroidkit.grassmann import (ConvergenceError, GeneratorBudgetExceeded, GrassmannAlgebra, GrassmannElement,
                                    expm, gcommutator)

from strategies import rng_from, seeds

ALG = GrassmannAlgebra(["t1", "t2", "t3", "t4", "h"], [1, 1, 1, 1, 0], [1, -1, 1, 0, 0])


def word_product(a, b, parities):
    """Reference product on dicts {tuple of generator indices: coeff} by explicit reordering."""
    out = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            word = list(wa) + list(wb)
            if len(set(word)) != len(word):
                continue
            sign = 1
            for i in range(len(word)):
                for j in range(len(word) - 1 - i):
                    if word[j] > word[j + 1]:
                        if parities[word[j]] and parities[word[j + 1]]:
                            sign = -sign
                        word[j], word[j + 1] = word[j + 1], word[j]
            key = tuple(word)
            out[key] = out.get(key, 0) + sign * ca * cb
    return {k: v for k, v in out.items() if v}


def to_words(el):
    return {tuple(i for i in range(el.alg.size) if (m >> i) & 1): c for m, c in el.terms()}


def random_scalar(rng, alg=ALG, nterms=4):
    el = GrassmannElement.zero(alg, dtype=object)
    for _ in range(nterms):
        mask = int(rng.integers(0, 1 << alg.size))
        gens = [alg.names[i] for i in range(alg.size) if (mask >> i) & 1]
        el = el + alg.monomial(gens, Fraction(int(rng.integers(-3, 4))), dtype=object)
    return el


def random_matrix_el(rng, row_par, col_par, parity=None, nterms=3, alg=ALG):
    el = GrassmannElement.zero(alg, dtype=object, row_par=row_par, col_par=col_par)
    for _ in range(nterms):
        mask = int(rng.integers(0, 1 << alg.size))
        m = np.empty((len(row_par), len(col_par)), dtype=object)
        for i in range(len(row_par)):
            for j in range(len(col_par)):
                ok = parity is None or (alg.mask_parity(mask) + row_par[i] + col_par[j]) % 2 == parity
                m[i, j] = Fraction(int(rng.integers(-2, 3))) if ok else Fraction(0)
        coef = GrassmannElement.from_matrix(alg, m, row_par, col_par, dtype=object)
        gens = [alg.names[i] for i in range(alg.size) if (mask >> i) & 1]
        el = el + alg.monomial(gens, Fraction(1), dtype=object) * coef
    return el


def test_left_derivative_signs():
    t12 = ALG.monomial(["t1", "t2"], dtype=object)
    assert to_words(t12.partial("t1")) == {(1,): 1}
    assert to_words(t12.partial("t2")) == {(0,): -1}


def test_even_generator_commutes():
    h, t = ALG.generator("h", dtype=object), ALG.generator("t1", dtype=object)
    assert h * t == t * h
    assert t * t == 0


@given(seeds)
def test_product_matches_word_oracle(seed):
    rng = rng_from(seed)
    a, b = random_scalar(rng), random_scalar(rng)
    assert to_words(a * b) == word_product(to_words(a), to_words(b), ALG.parities)


@given(seeds)
def test_scalar_associativity(seed):
    rng = rng_from(seed)
    a, b, c = (random_scalar(rng) for _ in range(3))
    assert (a * b) * c == a * (b * c)


@given(seeds)
def test_matrix_associativity(seed):
    rng = rng_from(seed)
    p1, p2, p3, p4 = [0, 1], [1, 0, 1], [0, 0], [1]
    a = random_matrix_el(rng, p1, p2)
    b = random_matrix_el(rng, p2, p3)
    c = random_matrix_el(rng, p3, p4)
    assert (a * b) * c == a * (b * c)


@given(seeds, st.integers(0, 1), st.integers(0, 1))
def test_supertrace_graded_cyclic(seed, pa, pb):
    rng = rng_from(seed)
    par = [0, 1, 1]
    a = random_matrix_el(rng, par, par, parity=pa)
    b = random_matrix_el(rng, par, par, parity=pb)
    lhs = (a * b).supertrace()
    rhs = (b * a).supertrace()
    assert lhs == (-rhs if pa and pb else rhs)
    assert gcommutator(a, b).supertrace() == 0


@given(seeds)
def test_left_derivative_is_graded_derivation(seed):
    rng = rng_from(seed)
    a, b = random_scalar(rng, nterms=3), random_scalar(rng, nterms=3)
    # restrict a to one parity so the Leibniz sign is well defined
    a = GrassmannElement(ALG, *_parity_part(a, 1))
    lhs = (a * b).partial("t2")
    rhs = a.partial("t2") * b - a * b.partial("t2")
    assert lhs == rhs


def _parity_part(el, p):
    keep = np.array([ALG.mask_parity(m) == p for m in el.masks.tolist()], dtype=bool)
    return el.masks[keep], el.coeffs[keep]


def test_exact_exponential_of_nilpotent():
    t1, t2 = ALG.generator("t1", dtype=object), ALG.generator("t2", dtype=object)
    x = GrassmannElement.from_matrix(ALG, [[Fraction(1)]], [0], dtype=object) * (t1 * t2)
    e = expm(x)
    assert e == GrassmannElement.identity(ALG, [0], dtype=object) + x


@given(seeds)
def test_float_exponential_inverse(seed):
    rng = rng_from(seed)
    par = [0, 0, 1]
    x = random_matrix_el(rng, par, par, parity=0, nterms=3).astype(float).scale(0.3)
    one = GrassmannElement.identity(ALG, par)
    assert (expm(x) * expm(-x)).allclose(one, atol=1e-10)


def test_float_exponential_body_matches_numpy():
    m = np.array([[0.0, -1.3], [1.3, 0.0]])
    e = expm(GrassmannElement.from_matrix(ALG, m, [0, 0]))
    c, s = np.cos(1.3), np.sin(1.3)
    assert np.allclose(e.body(), [[c, -s], [s, c]], atol=1e-13)


def test_exponential_non_convergence_is_reported():
    x = GrassmannElement.from_matrix(ALG, np.eye(1) * 0.4, [0])
    with pytest.raises(ConvergenceError):
        expm(x, max_order=2, tol=1e-30)


def test_unknown_generator():
    with pytest.raises(GeneratorBudgetExceeded):
        ALG.generator("nope")


def test_ghost_bookkeeping():
    mask, sign = ALG.monomial_mask(["t2", "t1"])
    assert sign == -1
    assert ALG.mask_ghost(mask) == 0
    assert ALG.mask_parity(mask) == 0
