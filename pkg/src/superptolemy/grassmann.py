"""Finite-rank Grassmann algebras over a coefficient field.

An element is stored as a map from bitmasks to nonzero coefficients; bit
``i - 1`` of a mask stands for the generator ``e_i``.  Monomials are kept
in increasing index order, so ``e2*e1`` is stored as ``-e1*e2``.
"""

from __future__ import annotations

import re

from .errors import NotInvertible, RankMismatch
from .scalars import RationalField

__all__ = ["GrassmannAlgebra", "GrassmannElement", "MAX_RANK"]

MAX_RANK = 16


def _popcount(x):
    return bin(x).count("1")


def _merge_sign(a, b):
    """Sign of ``e_a * e_b`` relative to the sorted monomial ``e_{a|b}``."""
    swaps = 0
    while b:
        low = b & -b
        swaps += _popcount(a & ~((low << 1) - 1))
        b ^= low
    return -1 if swaps & 1 else 1


class GrassmannAlgebra:
    """The exterior algebra on ``rank`` odd generators over ``field``."""

    def __init__(self, rank=2, field=None):
        if not isinstance(rank, int) or rank < 0 or rank > MAX_RANK:
            raise ValueError(f"rank must be an integer in [0, {MAX_RANK}], got {rank!r}")
        self.rank = rank
        self.field = field if field is not None else RationalField()
        self._sign_cache = {}

    def __eq__(self, other):
        return (
            isinstance(other, GrassmannAlgebra)
            and other.rank == self.rank
            and other.field == self.field
        )

    def __hash__(self):
        return hash((self.rank, self.field))

    def __repr__(self):
        return f"GrassmannAlgebra(rank={self.rank}, field={self.field!r})"

    def sign(self, a, b):
        key = (a, b)
        s = self._sign_cache.get(key)
        if s is None:
            s = _merge_sign(a, b)
            self._sign_cache[key] = s
        return s

    # constructors -------------------------------------------------------

    def element(self, terms=None):
        return GrassmannElement(self, terms or {})

    def __call__(self, value):
        """Coerce a scalar, string or element of this algebra."""
        if isinstance(value, GrassmannElement):
            if value.algebra != self:
                raise RankMismatch("element belongs to a different algebra")
            return value
        if isinstance(value, str):
            return self.parse(value)
        return GrassmannElement(self, {0: self.field(value)})

    @property
    def zero(self):
        return GrassmannElement(self, {})

    @property
    def one(self):
        return self(1)

    def generator(self, i):
        """The odd generator ``e_i`` (1-based)."""
        if not 1 <= i <= self.rank:
            raise RankMismatch(f"generator e{i} outside rank {self.rank}")
        return GrassmannElement(self, {1 << (i - 1): self.field.one})

    def generators(self):
        return [self.generator(i) for i in range(1, self.rank + 1)]

    def monomial(self, indices, coef=1):
        mask = 0
        sign = 1
        for i in indices:
            if not 1 <= i <= self.rank:
                raise RankMismatch(f"generator e{i} outside rank {self.rank}")
            bit = 1 << (i - 1)
            if mask & bit:
                return self.zero
            sign *= self.sign(mask, bit)
            mask |= bit
        return GrassmannElement(self, {mask: self.field(coef) * sign})

    def random_element(self, rng, parity=None, density=0.6):
        """Random element; ``parity`` is ``'even'``, ``'odd'`` or ``None``."""
        terms = {}
        for mask in range(1 << self.rank):
            size = _popcount(mask)
            if parity == "even" and size % 2:
                continue
            if parity == "odd" and size % 2 == 0:
                continue
            if mask and rng.random() > density:
                continue
            terms[mask] = self.field.random_element(rng)
        return GrassmannElement(self, terms)

    def random_unit(self, rng, parity="even"):
        """Random element with nonzero body."""
        x = self.random_element(rng, parity=parity)
        body = self.field.random_element(rng, nonzero=True)
        return x - x.body() + body

    # text ---------------------------------------------------------------

    def parse(self, text):
        """Parse ``"3 + 2*e1*e2"``; coefficients may be parenthesized literals."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty Grassmann literal")
        total = self.zero
        for sign, term in _split_terms(s):
            coef = self.field.one
            indices = []
            for factor in _split_factors(term):
                m = re.fullmatch(r"e(\d+)", factor)
                if m:
                    indices.append(int(m.group(1)))
                    continue
                if factor.startswith("(") and factor.endswith(")"):
                    factor = factor[1:-1]
                coef = coef * self.field.parse(factor)
            total = total + self.monomial(indices, coef) * sign
        return total


def _split_terms(s):
    depth = 0
    start = 0
    sign = 1
    out = []
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0:
            if i == start:
                sign = -sign if ch == "-" else sign
                start = i + 1
            elif s[i - 1] not in "*/eE":
                out.append((sign, s[start:i]))
                sign = 1 if ch == "+" else -1
                start = i + 1
    if start >= len(s) or depth:
        raise ValueError(f"bad Grassmann literal {s!r}")
    out.append((sign, s[start:]))
    return out


def _split_factors(term):
    depth = 0
    start = 0
    out = []
    for i, ch in enumerate(term):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "*" and depth == 0:
            out.append(term[start:i])
            start = i + 1
    out.append(term[start:])
    if any(not f for f in out):
        raise ValueError(f"bad Grassmann term {term!r}")
    return out


class GrassmannElement:
    """Immutable element of a :class:`GrassmannAlgebra`."""

    __slots__ = ("algebra", "_terms", "_hash")

    def __init__(self, algebra, terms):
        self.algebra = algebra
        f = algebra.field
        clean = {}
        for mask, v in terms.items():
            if not f.is_zero(v):
                clean[mask] = v
        self._terms = clean
        self._hash = None

    # access -------------------------------------------------------------

    @property
    def field(self):
        return self.algebra.field

    @property
    def terms(self):
        """Copy of the ``{mask: coefficient}`` map."""
        return dict(self._terms)

    def coefficient(self, indices=()):
        mask = 0
        for i in indices:
            mask |= 1 << (i - 1)
        return self._terms.get(mask, self.field.zero)

    def body(self):
        return self._terms.get(0, self.field.zero)

    def soul(self):
        return GrassmannElement(self.algebra, {k: v for k, v in self._terms.items() if k})

    def even_part(self):
        return GrassmannElement(
            self.algebra, {k: v for k, v in self._terms.items() if _popcount(k) % 2 == 0}
        )

    def odd_part(self):
        return GrassmannElement(
            self.algebra, {k: v for k, v in self._terms.items() if _popcount(k) % 2}
        )

    def parity(self):
        """One of ``'zero'``, ``'even'``, ``'odd'``, ``'mixed'``."""
        if not self._terms:
            return "zero"
        kinds = {_popcount(k) % 2 for k in self._terms}
        if kinds == {0}:
            return "even"
        if kinds == {1}:
            return "odd"
        return "mixed"

    def is_even(self):
        return self.parity() in ("zero", "even")

    def is_odd(self):
        return self.parity() in ("zero", "odd")

    def is_zero(self):
        return not self._terms

    def is_scalar(self):
        return all(k == 0 for k in self._terms)

    def is_invertible(self):
        return not self.field.is_zero(self.body())

    def max_degree(self):
        return max((_popcount(k) for k in self._terms), default=-1)

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, GrassmannElement):
            if other.algebra != self.algebra:
                raise RankMismatch(
                    f"rank {self.algebra.rank} element combined with rank {other.algebra.rank}"
                )
            return other
        try:
            return GrassmannElement(self.algebra, {0: self.field(other)})
        except (TypeError, ValueError):
            return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self._terms)
        for k, v in o._terms.items():
            out[k] = out[k] + v if k in out else v
        return GrassmannElement(self.algebra, out)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(self.algebra, {k: -v for k, v in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def scale(self, c):
        c = self.field(c)
        return GrassmannElement(self.algebra, {k: v * c for k, v in self._terms.items()})

    def _mul(self, a, b):
        sign = self.algebra.sign
        out = {}
        for ka, va in a._terms.items():
            for kb, vb in b._terms.items():
                if ka & kb:
                    continue
                v = va * vb
                if sign(ka, kb) < 0:
                    v = -v
                k = ka | kb
                out[k] = out[k] + v if k in out else v
        return GrassmannElement(self.algebra, out)

    def __mul__(self, other):
        if isinstance(other, GrassmannElement):
            o = self._coerce(other)
            return self._mul(self, o)
        try:
            return self.scale(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __rmul__(self, other):
        # scalars are central
        try:
            return self.scale(other)
        except (TypeError, ValueError):
            return NotImplemented

    def invert(self):
        """Two-sided inverse via the terminating geometric series."""
        body = self.body()
        if self.field.is_zero(body):
            raise NotInvertible(f"element with zero body is not invertible: {self}")
        inv_body = self.field.inverse(body)
        n = (self - body).scale(-inv_body)
        result = self.algebra.one
        power = self.algebra.one
        for _ in range(self.algebra.rank):
            power = power * n
            if power.is_zero():
                break
            result = result + power
        return result.scale(inv_body)

    def __truediv__(self, other):
        if isinstance(other, GrassmannElement):
            return self * self._coerce(other).invert()
        o = self.field(other)
        return self.scale(self.field.inverse(o))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.invert()

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        base = self if k >= 0 else self.invert()
        result = self.algebra.one
        for _ in range(abs(k)):
            result = result * base
        return result

    # comparison -----------------------------------------------------------

    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, GrassmannElement) else other
        if o is None:
            return NotImplemented
        if o.algebra != self.algebra:
            return False
        return (self - o).is_zero()

    def __hash__(self):
        if self._hash is None:
            if self.is_scalar():
                self._hash = hash(self.body())
            else:
                self._hash = hash(tuple(sorted((k, hash(v)) for k, v in self._terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    # text -----------------------------------------------------------------

    def render(self):
        if not self._terms:
            return "0"
        f = self.field
        pieces = []
        for mask in sorted(self._terms, key=lambda m: (_popcount(m), m)):
            coef = f.render(self._terms[mask])
            gens = [f"e{i + 1}" for i in range(self.algebra.rank) if mask >> i & 1]
            negative = False
            if re.fullmatch(r"-?\d+(/\d+)?", coef):
                if coef.startswith("-"):
                    negative = True
                    coef = coef[1:]
            else:
                coef = f"({coef})"
            if gens and coef == "1":
                body = "*".join(gens)
            else:
                body = "*".join([coef] + gens)
            pieces.append((negative, body))
        first_neg, first = pieces[0]
        out = ("-" if first_neg else "") + first
        for neg, body in pieces[1:]:
            out += (" - " if neg else " + ") + body
        return out

    __str__ = render

    def __repr__(self):
        return f"GrassmannElement({self.render()!r}, rank={self.algebra.rank})"
