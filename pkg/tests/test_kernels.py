from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from algebroidkit import _kernels
from algebroidkit.grassmann import GrassmannAlgebra, GrassmannElement


def _random_operands(seed, ngen=6, na=7, nb=5, shape=(2, 3, 2)):
    rng = np.random.default_rng(seed)
    r, c, d = shape
    ma = np.unique(rng.integers(0, 1 << ngen, size=na)).astype(np.int64)
    mb = np.unique(rng.integers(0, 1 << ngen, size=nb)).astype(np.int64)
    A = rng.integers(-3, 4, size=(len(ma), r, c)).astype(float)
    Atw = rng.integers(-3, 4, size=(len(ma), r, c)).astype(float)
    B = rng.integers(-3, 4, size=(len(mb), c, d)).astype(float)
    odd = int(rng.integers(0, 1 << ngen))
    bodd = np.bitwise_count((mb & odd).astype(np.uint64)) % 2 == 1
    return ma, A, Atw, mb, B, bodd, odd


@given(st.integers(0, 2**31))
def test_numba_matches_numpy(seed):
    args = _random_operands(seed)
    m1, c1 = _kernels.mul_numpy(*args)
    m2, c2 = _kernels.mul_numba(*args)
    assert np.array_equal(m1, m2)
    assert np.array_equal(c1, c2)


@given(st.integers(0, 2**31))
def test_object_path_matches_float(seed):
    ma, A, Atw, mb, B, bodd, odd = _random_operands(seed)
    to_obj = np.vectorize(lambda x: Fraction(int(x)), otypes=[object])
    m1, c1 = _kernels.mul_numpy(ma, A, Atw, mb, B, bodd, odd)
    m2, c2 = _kernels.mul_numpy(ma, to_obj(A), to_obj(Atw), mb, to_obj(B), bodd, odd)
    assert np.array_equal(m1, m2)
    assert np.array_equal(c1, c2.astype(float))


def test_pair_signs_by_hand():
    # theta1 * theta0 = -theta0 theta1; theta0 * theta1 keeps its sign
    odd = 0b11
    signs = _kernels.pair_signs(np.array([0b10, 0b01]), np.array([0b01, 0b10]), odd)
    assert list(signs) == [-1, 1]


def test_empty_operands():
    z = np.zeros(0, dtype=np.int64)
    m, c = _kernels.mul(z, np.zeros((0, 2, 2)), np.zeros((0, 2, 2)), np.array([1]), np.ones((1, 2, 2)),
                        np.array([True]), 1)
    assert len(m) == 0 and c.shape == (0, 2, 2)


def test_backend_flag(monkeypatch):
    monkeypatch.setenv("ALGEBROIDKIT_BACKEND", "numpy")
    assert _kernels.backend() == "numpy"
    monkeypatch.setenv("ALGEBROIDKIT_BACKEND", " NumBa ")
    assert _kernels.backend() == "numba"
    monkeypatch.setenv("ALGEBROIDKIT_BACKEND", "cuda")
    with pytest.raises(ValueError, match="ALGEBROIDKIT_BACKEND"):
        _kernels.backend()


def test_element_products_agree_across_backends(monkeypatch):
    alg = GrassmannAlgebra(["a", "b", "c", "d"], [1, 1, 0, 1])
    rng = np.random.default_rng(3)
    par = np.array([0, 1])

    def rand():
        masks = np.arange(16, dtype=np.int64)
        return GrassmannElement(alg, masks, rng.normal(size=(16, 2, 2)), par, par)

    x, y = rand(), rand()
    monkeypatch.setenv("ALGEBROIDKIT_BACKEND", "numba")
    p1 = x * y
    monkeypatch.setenv("ALGEBROIDKIT_BACKEND", "numpy")
    p2 = x * y
    assert np.array_equal(p1.masks, p2.masks)
    assert np.allclose(p1.coeffs, p2.coeffs, rtol=0, atol=1e-13)
