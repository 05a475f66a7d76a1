"""Sparse Grassmann product kernels.

Two interchangeable implementations of the same contraction:

* a numba ``@njit`` double loop over support pairs (float64 only);
* a vectorised numpy path that also handles object dtype (exact rationals).

``ALGEBROIDKIT_BACKEND=numpy`` forces the numpy path; otherwise numba is used
for float64 data whenever it imports.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def backend():
    choice = os.environ.get("ALGEBROIDKIT_BACKEND", "numba").strip().lower()
    if choice not in ("numba", "numpy"):
        raise ValueError(f"ALGEBROIDKIT_BACKEND must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba" and not HAVE_NUMBA:
        return "numpy"
    return choice


def _popcount(x):
    return np.bitwise_count(x.astype(np.uint64)).astype(np.int64)


def pair_signs(ma, mb, odd):
    """Sign of ``theta^a theta^b -> theta^(a|b)`` for arrays of disjoint masks."""
    ao = ma & odd
    bo = mb & odd
    inv = np.zeros(len(ma), dtype=np.int64)
    bits = int(odd).bit_length()
    for j in range(bits):
        has = (bo >> j) & 1
        if not has.any():
            continue
        inv += has * _popcount(ao >> (j + 1))
    return np.where(inv % 2 == 1, -1, 1)


def mul_numpy(ma, A, Atw, mb, B, bodd, odd):
    """Product of two sparse elements with 3-d coefficient stacks.

    ``A`` has shape (na, r, c), ``B`` (nb, c, d); ``Atw`` is ``A`` conjugated
    by the row/column parity signs and is used where the right factor's mask
    is odd.  Returns ``(masks, coeffs)`` with masks sorted and unique.
    """
    if len(ma) == 0 or len(mb) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros((0, A.shape[1], B.shape[2]), dtype=np.result_type(A, B))
    disjoint = (ma[:, None] & mb[None, :]) == 0
    ii, jj = np.nonzero(disjoint)
    if len(ii) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros((0, A.shape[1], B.shape[2]), dtype=np.result_type(A, B))
    sa = ma[ii]
    sb = mb[jj]
    sign = pair_signs(sa, sb, odd)
    left = np.where(bodd[jj][:, None, None], Atw[ii], A[ii])
    prod = np.matmul(left, B[jj])
    if prod.dtype == object:
        neg = sign < 0
        prod[neg] = -prod[neg]
    else:
        prod = prod * sign[:, None, None]
    out_m = sa | sb
    uniq, inv = np.unique(out_m, return_inverse=True)
    if prod.dtype == object:
        out = np.empty((len(uniq),) + prod.shape[1:], dtype=object)
        out.fill(0)
        for p in range(len(inv)):
            out[inv[p]] = out[inv[p]] + prod[p]
    else:
        out = np.zeros((len(uniq),) + prod.shape[1:], dtype=prod.dtype)
        np.add.at(out, inv, prod)
    return uniq, out


@njit(cache=True)
def _mul_numba_core(ma, A, Atw, mb, B, bodd, odd):
    na = ma.shape[0]
    nb = mb.shape[0]
    r = A.shape[1]
    c = A.shape[2]
    d = B.shape[2]
    npairs = 0
    for i in range(na):
        for j in range(nb):
            if ma[i] & mb[j] == 0:
                npairs += 1
    out_m = np.empty(npairs, dtype=np.int64)
    out_c = np.zeros((npairs, r, d))
    p = 0
    for i in range(na):
        ao = ma[i] & odd
        for j in range(nb):
            if ma[i] & mb[j] != 0:
                continue
            bo = mb[j] & odd
            inv = 0
            bits = bo
            pos = 0
            while bits:
                if bits & 1:
                    x = ao >> (pos + 1)
                    while x:
                        inv += x & 1
                        x >>= 1
                bits >>= 1
                pos += 1
            s = -1.0 if inv % 2 == 1 else 1.0
            out_m[p] = ma[i] | mb[j]
            for a in range(r):
                for k in range(c):
                    x = Atw[i, a, k] if bodd[j] else A[i, a, k]
                    if x == 0.0:
                        continue
                    x *= s
                    for b in range(d):
                        out_c[p, a, b] += x * B[j, k, b]
            p += 1
    order = np.argsort(out_m, kind="mergesort")
    nuniq = 0
    last = -1
    for q in range(npairs):
        mm = out_m[order[q]]
        if q == 0 or mm != last:
            nuniq += 1
            last = mm
    um = np.empty(nuniq, dtype=np.int64)
    uc = np.zeros((nuniq, r, d))
    u = -1
    last = -1
    for q in range(npairs):
        src = order[q]
        mm = out_m[src]
        if q == 0 or mm != last:
            u += 1
            um[u] = mm
            last = mm
        for a in range(r):
            for b in range(d):
                uc[u, a, b] += out_c[src, a, b]
    return um, uc


def mul_numba(ma, A, Atw, mb, B, bodd, odd):
    return _mul_numba_core(ma, np.ascontiguousarray(A, dtype=np.float64),
                           np.ascontiguousarray(Atw, dtype=np.float64), mb,
                           np.ascontiguousarray(B, dtype=np.float64),
                           bodd.astype(np.bool_), np.int64(odd))


def mul(ma, A, Atw, mb, B, bodd, odd):
    if A.dtype == object or B.dtype == object or backend() == "numpy":
        return mul_numpy(ma, A, Atw, mb, B, bodd, odd)
    return mul_numba(ma, A, Atw, mb, B, bodd, odd)
