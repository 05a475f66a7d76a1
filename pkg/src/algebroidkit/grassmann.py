"""Finite Grassmann algebras with (graded) matrix coefficients.

An element is a sparse sum ``sum_m theta^m (x) X_m`` over generator subsets
``m`` (bitmasks, generators multiplied in increasing index order).  Every
generator is nilpotent, odd or even; only odd generators contribute signs.
Matrix coefficients carry a parity per row and column and multiply by the
Koszul rule ``(theta^a X)(theta^b Y) = (-1)^{|X||b|} theta^a theta^b XY``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import _kernels


class GeneratorMismatch(ValueError):
    pass


class GeneratorBudgetExceeded(ValueError):
    """Raised when a requested generator does not exist in the algebra."""


class ConvergenceError(ArithmeticError):
    def __init__(self, message, bound):
        super().__init__(f"{message} (remainder bound {bound:.3e})")
        self.bound = bound


class GrassmannAlgebra:
    def __init__(self, names, parities, ghosts=None):
        names = list(names)
        if len(set(names)) != len(names):
            raise ValueError("generator names must be unique")
        if len(names) > 62:
            raise ValueError("at most 62 generators are supported")
        self.names = names
        self.parities = [int(p) % 2 for p in parities]
        self.ghosts = [0] * len(names) if ghosts is None else [int(g) for g in ghosts]
        if not (len(self.parities) == len(self.ghosts) == len(names)):
            raise ValueError("parity/ghost tables must match the generator list")
        self.index = {n: i for i, n in enumerate(names)}
        self.odd_mask = sum(1 << i for i, p in enumerate(self.parities) if p)
        self.size = len(names)

    def __eq__(self, other):
        return (isinstance(other, GrassmannAlgebra) and self.names == other.names
                and self.parities == other.parities and self.ghosts == other.ghosts)

    def __hash__(self):
        return hash((tuple(self.names), tuple(self.parities), tuple(self.ghosts)))

    def gen_index(self, g):
        if isinstance(g, str):
            if g not in self.index:
                raise GeneratorBudgetExceeded(f"unknown generator {g!r}")
            return self.index[g]
        g = int(g)
        if not 0 <= g < self.size:
            raise GeneratorBudgetExceeded(f"generator index {g} out of range")
        return g

    def mask_parity(self, mask):
        return bin(int(mask) & self.odd_mask).count("1") % 2

    def mask_ghost(self, mask):
        return sum(self.ghosts[i] for i in range(self.size) if (int(mask) >> i) & 1)

    def monomial_mask(self, gens):
        """Mask and sign of the ordered product of ``gens``; ``(None, 0)`` if it vanishes."""
        idx = [self.gen_index(g) for g in gens]
        if len(set(idx)) != len(idx):
            return None, 0
        sign = 1
        arr = idx[:]
        for i in range(1, len(arr)):
            j = i
            while j > 0 and arr[j - 1] > arr[j]:
                if self.parities[arr[j - 1]] and self.parities[arr[j]]:
                    sign = -sign
                arr[j - 1], arr[j] = arr[j], arr[j - 1]
                j -= 1
        return sum(1 << i for i in idx), sign

    # -- element constructors -----------------------------------------
    def scalar(self, value, dtype=float):
        return GrassmannElement.constant(self, value, dtype=dtype)

    def generator(self, g, coeff=1, dtype=float):
        i = self.gen_index(g)
        return GrassmannElement(self, np.array([1 << i], dtype=np.int64), _coeff_array([coeff], dtype))

    def monomial(self, gens, coeff=1, dtype=float):
        mask, sign = self.monomial_mask(gens)
        if mask is None:
            return GrassmannElement.zero(self, dtype=dtype)
        return GrassmannElement(self, np.array([mask], dtype=np.int64), _coeff_array([coeff * sign], dtype))


def _coeff_array(values, dtype):
    if dtype is object:
        arr = np.empty(len(values), dtype=object)
        for i, v in enumerate(values):
            arr[i] = v
        return arr
    return np.asarray(values, dtype=dtype)


def _as_parity(p):
    if type(p) is np.ndarray and p.dtype == np.int64:
        return p
    return np.asarray(p, dtype=np.int64)


def _nonzero_rows(coeffs):
    if coeffs.dtype == object:
        flat = coeffs.reshape(len(coeffs), -1)
        return np.array([any(bool(x) for x in row) for row in flat], dtype=bool)
    return coeffs.reshape(len(coeffs), -1).any(axis=1)


class GrassmannElement:
    """Sparse element; ``coeffs[i]`` is the coefficient of ``masks[i]``.

    ``row_par``/``col_par`` are ``None`` for scalar elements.
    """

    __slots__ = ("alg", "masks", "coeffs", "row_par", "col_par")

    def __init__(self, alg, masks, coeffs, row_par=None, col_par=None, normalize=True):
        self.alg = alg
        if type(masks) is not np.ndarray or masks.dtype != np.int64:
            masks = np.asarray(masks, dtype=np.int64)
        if normalize and len(masks):
            if len(masks) > 1 and not (masks[1:] > masks[:-1]).all():
                order = np.argsort(masks, kind="mergesort")
                masks = masks[order]
                coeffs = coeffs[order]
                if np.any(masks[1:] == masks[:-1]):
                    uniq, inv = np.unique(masks, return_inverse=True)
                    acc = np.zeros((len(uniq),) + coeffs.shape[1:], dtype=coeffs.dtype)
                    if coeffs.dtype == object:
                        acc.fill(0)
                        for p in range(len(inv)):
                            acc[inv[p]] = acc[inv[p]] + coeffs[p]
                    else:
                        np.add.at(acc, inv, coeffs)
                    masks, coeffs = uniq, acc
            keep = _nonzero_rows(coeffs)
            if not keep.all():
                masks = masks[keep]
                coeffs = coeffs[keep]
        self.masks = masks
        self.coeffs = coeffs
        if (row_par is None) != (col_par is None):
            raise ValueError("row and column parities must both be given or both omitted")
        self.row_par = None if row_par is None else _as_parity(row_par)
        self.col_par = None if col_par is None else _as_parity(col_par)
        if self.row_par is not None and coeffs.shape[1:] != (len(self.row_par), len(self.col_par)):
            raise ValueError("coefficient shape does not match parity vectors")

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, alg, shape=None, dtype=float, row_par=None, col_par=None):
        if shape is None and row_par is not None:
            shape = (len(row_par), len(col_par))
        shape = () if shape is None else tuple(shape)
        coeffs = np.zeros((0,) + shape, dtype=dtype)
        if shape and row_par is None:
            row_par = np.zeros(shape[0], dtype=np.int64)
            col_par = np.zeros(shape[1], dtype=np.int64)
        return cls(alg, np.zeros(0, dtype=np.int64), coeffs, row_par, col_par)

    @classmethod
    def constant(cls, alg, value, dtype=float):
        return cls(alg, np.array([0], dtype=np.int64), _coeff_array([value], dtype))

    @classmethod
    def from_matrix(cls, alg, matrix, row_par, col_par=None, dtype=None):
        if col_par is None:
            col_par = row_par
        m = np.asarray(matrix, dtype=dtype if dtype is not None else None)
        if m.dtype != object:
            m = m.astype(float)
        return cls(alg, np.array([0], dtype=np.int64), m[None, ...].copy(), row_par, col_par)

    @classmethod
    def identity(cls, alg, row_par, dtype=float):
        n = len(row_par)
        if dtype is object:
            m = np.empty((n, n), dtype=object)
            for i in range(n):
                for j in range(n):
                    m[i, j] = Fraction(int(i == j))
        else:
            m = np.eye(n)
        return cls.from_matrix(alg, m, row_par, row_par, dtype=dtype)

    # -- basic properties ---------------------------------------------
    @property
    def is_scalar(self):
        return self.row_par is None

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    @property
    def dtype(self):
        return self.coeffs.dtype

    def _like(self, masks, coeffs, normalize=True):
        return GrassmannElement(self.alg, masks, coeffs, self.row_par, self.col_par, normalize)

    def is_zero(self):
        return len(self.masks) == 0

    def coefficient(self, mask):
        hit = np.searchsorted(self.masks, mask)
        if hit < len(self.masks) and self.masks[hit] == mask:
            return self.coeffs[hit]
        if self.coeffs.dtype == object:
            out = np.empty(self.shape, dtype=object)
            out.fill(0)
            return out if self.shape else 0
        return np.zeros(self.shape, dtype=self.coeffs.dtype) if self.shape else 0.0

    def body(self):
        return self.coefficient(0)

    def soul(self):
        keep = self.masks != 0
        return self._like(self.masks[keep], self.coeffs[keep], normalize=False)

    def terms(self):
        return list(zip(self.masks.tolist(), self.coeffs))

    def norm(self):
        """Sum over masks of the infinity-norm of the coefficient (submultiplicative)."""
        if self.is_zero():
            return 0.0
        c = self.coeffs
        if c.dtype == object:
            c = np.vectorize(lambda x: float(abs(x)), otypes=[float])(c) if c.size else c.astype(float)
        else:
            c = np.abs(c)
        if self.is_scalar:
            return float(np.sum(c))
        return float(np.sum(np.max(np.sum(c, axis=2), axis=1))) if c.shape[1] and c.shape[2] else 0.0

    def ghosts(self, row_deg=None, col_deg=None):
        """Ghost numbers present.

        With ``row_deg``/``col_deg`` given, each nonzero matrix entry also
        contributes its degree ``row_deg[i] - col_deg[j]``.
        """
        out = set()
        for m, c in zip(self.masks.tolist(), self.coeffs):
            g = self.alg.mask_ghost(m)
            if row_deg is None or self.is_scalar:
                out.add(g)
                continue
            for (i, j), x in np.ndenumerate(c):
                if x:
                    out.add(g + int(row_deg[i]) - int(col_deg[j]))
        return out

    def parities(self):
        out = set()
        for m, c in zip(self.masks.tolist(), self.coeffs):
            pm = self.alg.mask_parity(m)
            if self.is_scalar:
                out.add(pm)
                continue
            for (i, j), x in np.ndenumerate(c):
                if x:
                    out.add((pm + int(self.row_par[i]) + int(self.col_par[j])) % 2)
        return out

    def parity(self):
        ps = self.parities()
        if len(ps) > 1:
            raise ValueError("element is not parity-homogeneous")
        return ps.pop() if ps else 0

    # -- arithmetic ---------------------------------------------------
    def _check(self, other):
        if not isinstance(other, GrassmannElement):
            raise TypeError(f"expected GrassmannElement, got {type(other).__name__}")
        if other.alg is not self.alg and other.alg != self.alg:
            raise GeneratorMismatch("elements belong to different Grassmann algebras")

    def _promote_dtype(self, other):
        if self.coeffs.dtype == object or other.coeffs.dtype == object:
            return object
        return np.result_type(self.coeffs.dtype, other.coeffs.dtype)

    def __add__(self, other):
        if not isinstance(other, GrassmannElement):
            if other == 0:
                return self
            other = GrassmannElement.constant(self.alg, other, dtype=self.coeffs.dtype if self.coeffs.dtype == object else float)
            if not self.is_scalar:
                raise TypeError("cannot add a number to a matrix element")
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        dt = self._promote_dtype(other)
        masks = np.concatenate([self.masks, other.masks])
        coeffs = np.concatenate([self.coeffs.astype(dt), other.coeffs.astype(dt)])
        rp = self.row_par if self.row_par is not None else other.row_par
        cp = self.col_par if self.col_par is not None else other.col_par
        return GrassmannElement(self.alg, masks, coeffs, rp, cp)

    __radd__ = __add__

    def __neg__(self):
        return self._like(self.masks, -self.coeffs, normalize=False)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        if self.coeffs.dtype != object and isinstance(c, Fraction):
            c = float(c)
        return self._like(self.masks, self.coeffs * c)

    def _stack(self, n_other_rows=None):
        """3-d coefficient stack and its parity-twisted variant."""
        c = self.coeffs
        if self.is_scalar:
            return c.reshape(len(c), 1, 1), c.reshape(len(c), 1, 1)
        sgn = np.where((self.row_par[:, None] + self.col_par[None, :]) % 2 == 1, -1, 1)
        if c.dtype == object:
            tw = c.copy()
            for (i, j), s in np.ndenumerate(sgn):
                if s < 0:
                    tw[:, i, j] = -tw[:, i, j]
        else:
            tw = c * sgn[None, :, :]
        return c, tw

    def __mul__(self, other):
        if not isinstance(other, GrassmannElement):
            return self.scale(other)
        self._check(other)
        alg = self.alg
        if self.is_zero() or other.is_zero():
            return _zero_product(self, other)
        dt = self._promote_dtype(other)
        A, Atw = self._stack()
        B, _ = other._stack()
        if dt == object:
            A, Atw, B = A.astype(object), Atw.astype(object), B.astype(object)
        bodd = (np.bitwise_count(other.masks & alg.odd_mask) & 1).astype(bool)
        if self.is_scalar and not other.is_scalar:
            # broadcast scalar as a multiple of the identity on the rows of ``other``
            n = other.shape[0]
            A = _diag_stack(A[:, 0, 0], n)
            Atw = A
            rp, cp = other.row_par, other.col_par
        elif not self.is_scalar and other.is_scalar:
            n = self.shape[1]
            B = _diag_stack(B[:, 0, 0], n)
            rp, cp = self.row_par, self.col_par
        elif self.is_scalar:
            rp = cp = None
        else:
            if self.shape[1] != other.shape[0]:
                raise ValueError(f"matrix shapes {self.shape} and {other.shape} do not compose")
            if not np.array_equal(self.col_par, other.row_par):
                raise ValueError("inner parities do not match")
            rp, cp = self.row_par, other.col_par
        masks, coeffs = _kernels.mul(self.masks, A, Atw, other.masks, B, bodd, alg.odd_mask)
        if rp is None:
            coeffs = coeffs.reshape(len(coeffs))
        # kernel output is already sorted and unique; only cancellations remain
        keep = _nonzero_rows(coeffs) if len(masks) else None
        if keep is not None and not keep.all():
            masks, coeffs = masks[keep], coeffs[keep]
        return GrassmannElement(alg, masks, coeffs, rp, cp, normalize=False)

    def __rmul__(self, c):
        return self.scale(c)

    def __truediv__(self, c):
        if self.coeffs.dtype == object:
            return self.scale(Fraction(1) / Fraction(c))
        return self.scale(1.0 / c)

    def partial(self, g):
        """Left derivative with respect to generator ``g``."""
        i = self.alg.gen_index(g)
        bit = 1 << i
        hit = (self.masks & bit) != 0
        masks = self.masks[hit]
        coeffs = self.coeffs[hit]
        if self.alg.parities[i]:
            lower = self.alg.odd_mask & (bit - 1)
            signs = np.array([-1 if bin(m & lower).count("1") % 2 else 1 for m in masks.tolist()], dtype=np.int64)
            if coeffs.dtype == object:
                coeffs = coeffs.copy()
                for p, s in enumerate(signs):
                    if s < 0:
                        coeffs[p] = -coeffs[p]
            else:
                coeffs = coeffs * signs.reshape((-1,) + (1,) * (coeffs.ndim - 1))
        return self._like(masks & ~bit, coeffs)

    def drop(self, g):
        """Set generator ``g`` to zero."""
        bit = 1 << self.alg.gen_index(g)
        keep = (self.masks & bit) == 0
        return self._like(self.masks[keep], self.coeffs[keep], normalize=False)

    def supertrace(self):
        if self.is_scalar:
            raise ValueError("supertrace needs a matrix element")
        if self.shape[0] != self.shape[1] or not np.array_equal(self.row_par, self.col_par):
            raise ValueError("supertrace needs a square element with matching parities")
        signs = np.where(self.row_par % 2 == 1, -1, 1)
        c = self.coeffs
        if c.dtype == object:
            vals = np.empty(len(c), dtype=object)
            for p in range(len(c)):
                acc = 0
                for i in range(c.shape[1]):
                    acc = acc + (c[p, i, i] if signs[i] > 0 else -c[p, i, i])
                vals[p] = acc
        else:
            vals = np.einsum("pii,i->p", c, signs.astype(c.dtype))
        return GrassmannElement(self.alg, self.masks.copy(), vals)

    def trace(self):
        if self.is_scalar:
            raise ValueError("trace needs a matrix element")
        c = self.coeffs
        if c.dtype == object:
            vals = np.empty(len(c), dtype=object)
            for p in range(len(c)):
                vals[p] = sum((c[p, i, i] for i in range(c.shape[1])), 0)
        else:
            vals = np.einsum("pii->p", c)
        return GrassmannElement(self.alg, self.masks.copy(), vals)

    def map_coeffs(self, fn):
        out = np.empty(self.coeffs.shape, dtype=object)
        for idx, x in np.ndenumerate(self.coeffs):
            out[idx] = fn(x)
        return self._like(self.masks, out)

    def astype(self, dtype):
        if dtype is object:
            return self._like(self.masks, self.coeffs.astype(object), normalize=False)
        return self._like(self.masks, np.asarray(self.coeffs.tolist(), dtype=float).reshape(self.coeffs.shape))

    def allclose(self, other, atol=1e-12):
        diff = self - other
        return diff.norm() <= atol

    def __eq__(self, other):
        if not isinstance(other, GrassmannElement):
            if other == 0:
                return self.is_zero()
            return NotImplemented
        d = self - other
        return d.is_zero()

    __hash__ = None

    def __repr__(self):
        names = self.alg.names
        parts = []
        for m, c in zip(self.masks.tolist()[:6], self.coeffs[:6]):
            mono = "*".join(names[i] for i in range(self.alg.size) if (m >> i) & 1) or "1"
            parts.append(f"{mono}:{c!r}" if self.is_scalar else f"{mono}:<{c.shape[0]}x{c.shape[1]}>")
        more = "" if len(self.masks) <= 6 else f", ... ({len(self.masks)} terms)"
        return f"GrassmannElement({', '.join(parts)}{more})"


def _diag_stack(vals, n):
    out = np.zeros((len(vals), n, n), dtype=vals.dtype)
    if vals.dtype == object:
        out.fill(0)
    for i in range(n):
        out[:, i, i] = vals
    return out


def _zero_product(a, b):
    if a.is_scalar and b.is_scalar:
        return GrassmannElement.zero(a.alg, dtype=a._promote_dtype(b))
    if a.is_scalar:
        return GrassmannElement.zero(a.alg, dtype=a._promote_dtype(b), row_par=b.row_par, col_par=b.col_par)
    if b.is_scalar:
        return GrassmannElement.zero(a.alg, dtype=a._promote_dtype(b), row_par=a.row_par, col_par=a.col_par)
    return GrassmannElement.zero(a.alg, dtype=a._promote_dtype(b), row_par=a.row_par, col_par=b.col_par)


def gcommutator(a, b):
    """Graded commutator ``ab - (-1)^{|a||b|} ba`` of parity-homogeneous elements."""
    pa = a.parity()
    pb = b.parity()
    ab = a * b
    ba = b * a
    return ab + ba if pa and pb else ab - ba


def expm(x, max_order=30, tol=1e-15):
    """Exponential of a square even element by scaling, Taylor series and squaring.

    The Taylor series runs over the full element (body and nilpotent soul);
    if the remainder bound ``||Y||^{K+1}/(K+1)! e^{||Y||}`` is not below
    ``tol`` after ``max_order`` terms a :class:`ConvergenceError` is raised.
    """
    if x.is_scalar or x.shape[0] != x.shape[1]:
        raise ValueError("exponential needs a square matrix element")
    exact = x.coeffs.dtype == object
    eye = GrassmannElement.identity(x.alg, x.row_par, dtype=object if exact else float)
    if x.is_zero():
        return eye
    if exact:
        if np.any(x.masks == 0) and not _is_zero_obj(x.body()):
            raise ValueError("exact exponential requires a nilpotent (soul-only) argument")
        total = eye
        term = eye
        k = 0
        while True:
            k += 1
            term = (term * x) / k
            if term.is_zero():
                return total
            total = total + term
    nrm = x.norm()
    s = 0
    if nrm > 0.5:
        s = int(math.ceil(math.log2(nrm / 0.5)))
    y = x.scale(1.0 / (2 ** s))
    ny = y.norm()
    total = eye
    term = eye
    bound = None
    for k in range(1, max_order + 1):
        term = (term * y).scale(1.0 / k)
        total = total + term
        if term.is_zero():
            bound = 0.0
            break
        bound = ny ** (k + 1) / math.factorial(k + 1) * math.exp(ny)
        if bound <= tol:
            break
    else:
        raise ConvergenceError(f"exponential series not converged at order {max_order}", bound)
    for _ in range(s):
        total = total * total
    return total


def _is_zero_obj(c):
    return all(not v for v in np.asarray(c).flat)
