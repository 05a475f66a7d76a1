"""Exact multivariate polynomials over the rationals.

A :class:`Poly` stores a map from dense exponent tuples to nonzero
:class:`fractions.Fraction` coefficients.  Instances are treated as
immutable values; every operation returns a new polynomial.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational

__all__ = ["Poly", "PolySyntaxError", "parse_poly", "poly_partial", "poly_eval"]


class PolySyntaxError(ValueError):
    """Raised by :func:`parse_poly`; ``offset`` is the character position."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


def _coerce(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"polynomial coefficients must be rational, got {type(c).__name__}")


class Poly:
    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars, terms=None):
        self.nvars = int(nvars)
        clean = {}
        if terms:
            for exp, c in terms.items():
                c = _coerce(c)
                if c != 0:
                    exp = tuple(int(e) for e in exp)
                    if len(exp) != self.nvars:
                        raise ValueError("exponent length does not match variable count")
                    clean[exp] = c
        self.terms = clean
        self._hash = None

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, nvars):
        return cls(nvars)

    @classmethod
    def const(cls, c, nvars):
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, i, nvars):
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range for {nvars} variables")
        exp = [0] * nvars
        exp[i] = 1
        return cls(nvars, {tuple(exp): 1})

    # -- basic queries -----------------------------------------------
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def degree(self):
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def is_constant(self):
        return all(not any(e) for e in self.terms)

    def constant_value(self):
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self.terms == ({(0,) * self.nvars: other} if other != 0 else {})

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    # -- arithmetic ---------------------------------------------------
    def _lift(self, other):
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
            return other
        return Poly.const(_coerce(other), self.nvars)

    def __add__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return _raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return _raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            try:
                c = _coerce(other)
            except TypeError:
                return NotImplemented
            if c == 0:
                return Poly(self.nvars)
            return _raw(self.nvars, {e: v * c for e, v in self.terms.items()})
        other = self._lift(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return _raw(self.nvars, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = _coerce(other)
        return self * (1 / c)

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = Poly.const(1, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- calculus / evaluation ---------------------------------------
    def partial(self, mu):
        if not 0 <= mu < self.nvars:
            raise IndexError(f"coordinate index {mu} out of range for {self.nvars} variables")
        out = {}
        for e, c in self.terms.items():
            if e[mu]:
                ne = list(e)
                ne[mu] -= 1
                out[tuple(ne)] = c * e[mu]
        return _raw(self.nvars, out)

    def evaluate(self, point, one=1):
        """Evaluate at ``point``.

        ``point`` may hold Fractions, floats, or any commutative ring
        elements (e.g. even Grassmann numbers); ``one`` is the unit of that
        ring.  Powers are cached per variable.
        """
        if len(point) != self.nvars:
            raise ValueError(f"point has length {len(point)}, expected {self.nvars}")
        if not self.terms:
            return 0 * one
        powers = [[one] for _ in range(self.nvars)]
        total = None
        for e, c in self.terms.items():
            term = None
            for i, k in enumerate(e):
                if k:
                    cache = powers[i]
                    while len(cache) <= k:
                        cache.append(cache[-1] * point[i])
                    term = cache[k] if term is None else term * cache[k]
            if isinstance(one, float) or isinstance(term, float):
                cf = float(c)
            else:
                cf = c
            term = cf * one if term is None else term * cf
            total = term if total is None else total + term
        return total

    def restrict(self, keep, nvars_out=None):
        """Set every variable not in ``keep`` to zero and re-index the rest.

        ``keep`` lists the surviving variable indices in their new order.
        """
        keep = list(keep)
        kept = set(keep)
        out = {}
        for e, c in self.terms.items():
            if any(e[i] for i in range(self.nvars) if i not in kept):
                continue
            ne = tuple(e[i] for i in keep)
            out[ne] = out.get(ne, 0) + c
        return Poly(len(keep) if nvars_out is None else nvars_out, out)

    # -- printing -----------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-x for x in t[0])))

    def to_string(self, coords=None):
        if coords is None:
            coords = [f"x{i + 1}" for i in range(self.nvars)]
        if not self.terms:
            return "0"
        pieces = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                coords[i] if k == 1 else f"{coords[i]}^{k}" for i, k in enumerate(e) if k
            )
            mag = abs(c)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{mag}*{mono}"
            else:
                body = str(mag)
            sign = "-" if c < 0 else "+"
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"Poly({self.to_string()!r}, nvars={self.nvars})"

    def __str__(self):
        return self.to_string()


def _raw(nvars, terms):
    # trusted constructor: terms already canonical
    p = Poly.__new__(Poly)
    p.nvars = nvars
    p.terms = terms
    p._hash = None
    return p


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^])|(?P<bad>\S))")


def _tokenize(text):
    pos = 0
    toks = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group("bad") is not None:
            ch = m.group("bad")
            off = m.start("bad")
            if ch == ".":
                raise PolySyntaxError("decimal literals are not allowed; write a fraction", off)
            raise PolySyntaxError(f"unexpected character {ch!r}", off)
        for kind in ("num", "name", "op"):
            if m.group(kind) is not None:
                toks.append((kind, m.group(kind), m.start(kind)))
                break
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


def parse_poly(text, coords):
    """Parse ``text`` into a :class:`Poly` in the variables ``coords``.

    Grammar: a sum of terms, each an optional rational coefficient ``a`` or
    ``a/b`` times ``*``-separated powers ``name^k``; unary minus allowed.
    """
    coords = list(coords)
    index = {name: i for i, name in enumerate(coords)}
    n = len(coords)
    toks = _tokenize(text)
    pos = 0

    def peek():
        return toks[pos]

    def take():
        nonlocal pos
        t = toks[pos]
        pos += 1
        return t

    def integer():
        kind, val, off = take()
        if kind != "num":
            raise PolySyntaxError("expected an integer", off)
        return int(val), off

    def factor():
        kind, val, off = peek()
        if kind == "num":
            take()
            num = int(val)
            if peek()[1] == "/" and peek()[0] == "op":
                take()
                den, doff = integer()
                if den == 0:
                    raise PolySyntaxError("zero denominator", doff)
                return Poly.const(Fraction(num, den), n)
            return Poly.const(num, n)
        if kind == "name":
            take()
            if val not in index:
                raise PolySyntaxError(f"unknown coordinate {val!r}", off)
            p = Poly.var(index[val], n)
            if peek()[0] == "op" and peek()[1] == "^":
                take()
                k, _ = integer()
                p = p**k
            return p
        raise PolySyntaxError("expected a number or coordinate", off)

    def term():
        p = factor()
        while peek()[0] == "op" and peek()[1] == "*":
            take()
            p = p * factor()
        return p

    if peek()[0] == "end":
        raise PolySyntaxError("empty polynomial", 0)
    total = Poly(n)
    sign = 1
    if peek()[0] == "op" and peek()[1] in "+-":
        sign = -1 if take()[1] == "-" else 1
    total = total + term() * sign
    while True:
        kind, val, off = peek()
        if kind == "end":
            break
        if kind == "op" and val in "+-":
            take()
            s = -1 if val == "-" else 1
            if peek()[0] == "op" and peek()[1] == "-":
                take()
                s = -s
            total = total + term() * s
        else:
            raise PolySyntaxError(f"unexpected token {val!r}", off)
    return total


def poly_partial(p, mu):
    return p.partial(mu)


def poly_eval(p, point):
    """Evaluate ``p``; exact for rational points, binary64 for float points."""
    if len(point) != p.nvars:
        raise ValueError(f"point has length {len(point)}, expected {p.nvars}")
    if any(isinstance(x, float) for x in point):
        return float(p.evaluate([float(x) for x in point], one=1.0)) if p.terms else 0.0
    return Fraction(p.evaluate([Fraction(x) for x in point], one=Fraction(1)))
