"""Coefficient fields and Laurent polynomials in one variable ``t``.

Three concrete fields are provided:

* :class:`RationalField` -- ``fractions.Fraction`` elements,
* :class:`QuadraticField` -- exact elements ``p + q*sqrt(d)`` of Q(sqrt(d)),
* :class:`ComplexField` -- mpmath complex numbers at a configurable precision,

plus :class:`SymbolicField`, a thin sympy wrapper used to derive equations
with indeterminate coefficients.

Field elements use the ordinary Python operators; a field object is only
needed for coercion, zero tests, parsing and rendering.
"""

from __future__ import annotations

import re
from fractions import Fraction

import mpmath

from .errors import DivisionByZero, ZeroPolynomial

__all__ = [
    "Field",
    "RationalField",
    "QuadraticField",
    "QuadraticNumber",
    "ComplexField",
    "SymbolicField",
    "LaurentPoly",
    "field_from_selector",
    "parse_exact",
    "scalar_det",
    "laurent_det",
    "normalize_poly",
]


# ---------------------------------------------------------------------------
# exact literal grammar:  sum of terms, each term a product of rationals,
# decimals and at most one sqrt(d); e.g. "1/2+1/2*sqrt(-3)", "-4", "0.25"
# ---------------------------------------------------------------------------

_TERM_SPLIT = re.compile(r"(?<=[^eE*/(^])(?=[+-])")
_SQRT = re.compile(r"^sqrt\((-?\d+)\)$")


def parse_exact(text):
    """Parse an exact literal into ``(p, q, d)`` meaning ``p + q*sqrt(d)``.

    ``d`` is 0 when no square root occurs.  Raises ``ValueError`` on bad input.
    """
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty scalar literal")
    p = Fraction(0)
    q = Fraction(0)
    d = 0
    for term in _TERM_SPLIT.split(s):
        if not term:
            raise ValueError(f"bad scalar literal {text!r}")
        sign = 1
        while term and term[0] in "+-":
            if term[0] == "-":
                sign = -sign
            term = term[1:]
        coef = Fraction(sign)
        root = None
        # tokens separated by * or /, each optionally preceded by the operator
        for op, tok in re.findall(r"([*/]?)([^*/]+)", term):
            m = _SQRT.match(tok)
            if m:
                if op == "/" or root is not None:
                    raise ValueError(f"bad square root in {text!r}")
                root = int(m.group(1))
                continue
            try:
                val = Fraction(tok)
            except ValueError as exc:
                raise ValueError(f"bad scalar literal {text!r}") from exc
            if op == "/":
                if val == 0:
                    raise ValueError(f"division by zero in {text!r}")
                coef /= val
            else:
                coef *= val
        if root is None:
            p += coef
        else:
            if d not in (0, root):
                raise ValueError(f"mixed square roots in {text!r}")
            d = root
            q += coef
    if d == 0 and q:
        # sqrt(0)
        q = Fraction(0)
    return p, q, d


def _is_squarefree(n):
    n = abs(n)
    if n < 2:
        return n == 1
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


def _frac_str(x):
    return str(Fraction(x))


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------


class Field:
    """Interface shared by all coefficient fields."""

    exact = True
    name = "field"

    def __call__(self, value):
        raise NotImplementedError

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def is_zero(self, x):
        return x == 0

    def eq(self, x, y):
        return self.is_zero(x - y)

    def inverse(self, x):
        if self.is_zero(x):
            raise DivisionByZero("inverse of zero")
        return self.one / x

    def div(self, x, y):
        if self.is_zero(y):
            raise DivisionByZero("division by zero")
        return x / y

    def parse(self, text):
        p, q, d = parse_exact(text)
        return self.from_exact(p, q, d)

    def from_exact(self, p, q, d):
        raise NotImplementedError

    def render(self, x):
        return str(x)

    def is_canonical_positive(self, x):
        raise NotImplementedError

    def magnitude(self, x):
        """A non-negative real size used for pivoting and residual norms."""
        raise NotImplementedError

    def random_element(self, rng, nonzero=False):
        raise NotImplementedError

    def __repr__(self):
        return f"<{self.name}>"


class RationalField(Field):
    name = "rational"

    def __call__(self, value):
        if isinstance(value, Fraction):
            return value
        if isinstance(value, str):
            return self.parse(value)
        return Fraction(value)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("rational")

    def div(self, x, y):
        if y == 0:
            raise DivisionByZero("division by zero")
        return Fraction(x) / y

    def from_exact(self, p, q, d):
        if q:
            raise ValueError(f"sqrt({d}) is not rational")
        return p

    def render(self, x):
        return _frac_str(x)

    def is_canonical_positive(self, x):
        return x > 0

    def magnitude(self, x):
        return float(abs(x))

    def random_element(self, rng, nonzero=False, bound=9):
        while True:
            x = Fraction(rng.randint(-bound, bound), rng.randint(1, 4))
            if x or not nonzero:
                return x


class QuadraticNumber:
    """Immutable element ``p + q*sqrt(d)`` with rational ``p``, ``q``."""

    __slots__ = ("p", "q", "d")

    def __init__(self, p, q, d):
        self.p = Fraction(p)
        self.q = Fraction(q)
        self.d = d

    def _coerce(self, other):
        if isinstance(other, QuadraticNumber):
            if other.d != self.d:
                raise ValueError("elements of different quadratic fields")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticNumber(other, 0, self.d)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticNumber(self.p + o.p, self.q + o.q, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.p, -self.q, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticNumber(self.p - o.p, self.q - o.q, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticNumber(
            self.p * o.p + self.d * self.q * o.q, self.p * o.q + self.q * o.p, self.d
        )

    __rmul__ = __mul__

    def norm(self):
        return self.p * self.p - self.d * self.q * self.q

    def conjugate(self):
        return QuadraticNumber(self.p, -self.q, self.d)

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise DivisionByZero("inverse of zero")
        return QuadraticNumber(self.p / n, -self.q / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        base = self if k >= 0 else self.inverse()
        result = QuadraticNumber(1, 0, self.d)
        for _ in range(abs(k)):
            result = result * base
        return result

    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, QuadraticNumber) else other
        if o is None:
            return NotImplemented
        return self.p == o.p and self.q == o.q and self.d == o.d

    def __hash__(self):
        if self.q == 0:
            return hash(self.p)
        return hash((self.p, self.q, self.d))

    def __bool__(self):
        return bool(self.p) or bool(self.q)

    def __complex__(self):
        return complex(float(self.p)) + float(self.q) * complex(self.d) ** 0.5

    def __repr__(self):
        return f"QuadraticNumber({self.p}, {self.q}, d={self.d})"

    def __str__(self):
        if self.q == 0:
            return _frac_str(self.p)
        root = f"sqrt({self.d})"
        if self.q == 1:
            qs = root
        elif self.q == -1:
            qs = f"-{root}"
        else:
            qs = f"{_frac_str(self.q)}*{root}"
        if self.p == 0:
            return qs
        sign = "+" if self.q > 0 else ""
        return f"{_frac_str(self.p)}{sign}{qs}"


class QuadraticField(Field):
    """Q(sqrt(d)) for a square-free integer ``d`` (default -3)."""

    def __init__(self, d=-3):
        if d in (0, 1) or not _is_squarefree(d):
            raise ValueError(f"d={d} must be a square-free integer other than 0, 1")
        self.d = d
        self.name = f"quadratic:{d}"

    def __eq__(self, other):
        return isinstance(other, QuadraticField) and other.d == self.d

    def __hash__(self):
        return hash(("quadratic", self.d))

    def __call__(self, value):
        if isinstance(value, QuadraticNumber):
            if value.d != self.d:
                raise ValueError("element of a different quadratic field")
            return value
        if isinstance(value, str):
            return self.parse(value)
        return QuadraticNumber(Fraction(value), 0, self.d)

    @property
    def sqrt_d(self):
        return QuadraticNumber(0, 1, self.d)

    def from_exact(self, p, q, d):
        if q and d != self.d:
            raise ValueError(f"sqrt({d}) is not in Q(sqrt({self.d}))")
        return QuadraticNumber(p, q, self.d)

    def is_zero(self, x):
        if isinstance(x, QuadraticNumber):
            return not x
        return x == 0

    def render(self, x):
        return str(self(x))

    def is_canonical_positive(self, x):
        x = self(x)
        return (x.p, x.q) > (0, 0)

    def magnitude(self, x):
        return abs(complex(self(x)))

    def random_element(self, rng, nonzero=False, bound=6):
        while True:
            x = QuadraticNumber(
                Fraction(rng.randint(-bound, bound), rng.randint(1, 3)),
                Fraction(rng.randint(-bound, bound), rng.randint(1, 3)),
                self.d,
            )
            if x or not nonzero:
                return x


class ComplexField(Field):
    """Arbitrary-precision complex numbers (mpmath) with a zero tolerance."""

    exact = False

    def __init__(self, bits=256, tolerance=None):
        self.bits = bits
        self.ctx = mpmath.MPContext()
        self.ctx.prec = bits
        self.tolerance = self.ctx.mpf(tolerance) if tolerance is not None else self.ctx.mpf("1e-30")
        self.name = f"complex:{bits}"

    def __eq__(self, other):
        return isinstance(other, ComplexField) and other.bits == self.bits

    def __hash__(self):
        return hash(("complex", self.bits))

    def __call__(self, value):
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, Fraction):
            return self.ctx.mpc(self.ctx.mpf(value.numerator) / value.denominator)
        if isinstance(value, QuadraticNumber):
            return self.from_exact(value.p, value.q, value.d)
        return self.ctx.mpc(value)

    def parse(self, text):
        try:
            return super().parse(text)
        except ValueError:
            return self.ctx.mpc(complex(text.replace(" ", "").replace("i", "j")))

    def from_exact(self, p, q, d):
        ctx = self.ctx
        val = ctx.mpc(ctx.mpf(p.numerator) / p.denominator)
        if q:
            val += ctx.mpf(q.numerator) / q.denominator * ctx.sqrt(ctx.mpc(d))
        return val

    def is_zero(self, x):
        return abs(self(x)) <= self.tolerance

    def render(self, x, digits=None):
        x = self(x)
        digits = digits or max(15, int(self.bits * 0.30103) - 5)
        # parts below the zero tolerance are rounding noise
        floor = self.tolerance * max(1, abs(x))
        if abs(x.real) <= floor:
            x = self.ctx.mpc(0, x.imag)
        if abs(x.imag) <= floor:
            x = self.ctx.mpc(x.real, 0)
        re_ = self.ctx.nstr(x.real, digits)
        im = self.ctx.nstr(abs(x.imag), digits)
        sign = "-" if x.imag < 0 else "+"
        return f"{re_}{sign}{im}j"

    def is_canonical_positive(self, x):
        x = self(x)
        if abs(x.real) > self.tolerance:
            return x.real > 0
        return x.imag > 0

    def magnitude(self, x):
        return abs(self(x))

    def random_element(self, rng, nonzero=False):
        return self.ctx.mpc(rng.uniform(-2, 2), rng.uniform(-2, 2))


class SymbolicField(Field):
    """Sympy expressions; used to derive equations with symbolic entries."""

    def __init__(self):
        import sympy

        self.sp = sympy
        self.name = "symbolic"

    def __call__(self, value):
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, QuadraticNumber):
            return self.from_exact(value.p, value.q, value.d)
        return self.sp.sympify(value)

    def from_exact(self, p, q, d):
        sp = self.sp
        return sp.Rational(p.numerator, p.denominator) + sp.Rational(
            q.numerator, q.denominator
        ) * sp.sqrt(d)

    def is_zero(self, x):
        return self.sp.simplify(x) == 0

    def render(self, x):
        return str(self.sp.simplify(x))

    def is_canonical_positive(self, x):
        return not self.sp.sympify(x).could_extract_minus_sign()

    def magnitude(self, x):
        return abs(complex(self.sp.N(x)))

    def random_element(self, rng, nonzero=False):
        return self.sp.Rational(rng.randint(1, 9), rng.randint(1, 4))


def field_from_selector(selector):
    """Build a field from ``rational``, ``quadratic[:d]`` or ``complex[:bits]``."""
    kind, _, arg = selector.strip().partition(":")
    if kind == "rational":
        return RationalField()
    if kind == "quadratic":
        return QuadraticField(int(arg) if arg else -3)
    if kind == "complex":
        return ComplexField(int(arg) if arg else 256)
    if kind == "symbolic":
        return SymbolicField()
    raise ValueError(f"unknown field selector {selector!r}")


# ---------------------------------------------------------------------------
# Laurent polynomials
# ---------------------------------------------------------------------------


class LaurentPoly:
    """Immutable Laurent polynomial in ``t`` over a :class:`Field`."""

    __slots__ = ("field", "_coeffs")

    def __init__(self, field, coeffs=None):
        self.field = field
        clean = {}
        for k, v in (coeffs or {}).items():
            v = field(v)
            if not field.is_zero(v):
                clean[int(k)] = v
        self._coeffs = dict(sorted(clean.items()))

    @classmethod
    def constant(cls, field, c):
        return cls(field, {0: c})

    @classmethod
    def monomial(cls, field, k, c=1):
        return cls(field, {k: c})

    @classmethod
    def t(cls, field):
        return cls(field, {1: 1})

    @property
    def coeffs(self):
        return dict(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def __getitem__(self, k):
        return self._coeffs.get(k, self.field.zero)

    def is_zero(self):
        return not self._coeffs

    def __bool__(self):
        return bool(self._coeffs)

    @property
    def min_degree(self):
        return min(self._coeffs) if self._coeffs else None

    @property
    def max_degree(self):
        return max(self._coeffs) if self._coeffs else None

    @property
    def degree_span(self):
        if not self._coeffs:
            return None
        return self.max_degree - self.min_degree

    def _lift(self, other):
        if isinstance(other, LaurentPoly):
            return other
        return LaurentPoly.constant(self.field, other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self._coeffs)
        for k, v in other._coeffs.items():
            out[k] = out[k] + v if k in out else v
        return LaurentPoly(self.field, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.field, {k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            return self.scale(other)
        out = {}
        for a, x in self._coeffs.items():
            for b, y in other._coeffs.items():
                k = a + b
                out[k] = out[k] + x * y if k in out else x * y
        return LaurentPoly(self.field, out)

    __rmul__ = __mul__

    def scale(self, c):
        return LaurentPoly(self.field, {k: v * c for k, v in self._coeffs.items()})

    def shift(self, k):
        """Multiply by ``t**k``."""
        return LaurentPoly(self.field, {e + k: v for e, v in self._coeffs.items()})

    def evaluate(self, x):
        x = self.field(x)
        total = self.field.zero
        for k, v in self._coeffs.items():
            total = total + v * x**k
        return total

    def divide_exact(self, other):
        """Quotient in the Laurent ring; the remainder is discarded.

        Exact over exact fields whenever ``other`` divides ``self``.
        """
        if other.is_zero():
            raise DivisionByZero("division by the zero polynomial")
        if self.is_zero():
            return self
        f = self.field
        a = {k - self.min_degree: v for k, v in self._coeffs.items()}
        b = {k - other.min_degree: v for k, v in other._coeffs.items()}
        db = max(b)
        lead = b[db]
        quot = {}
        rem = dict(a)
        while rem and max(rem) >= db:
            top = max(rem)
            c = rem.pop(top) / lead
            quot[top - db] = c
            for k, v in b.items():
                if k == db:
                    continue
                e = k + top - db
                nv = rem.get(e, f.zero) - c * v
                if f.is_zero(nv):
                    rem.pop(e, None)
                else:
                    rem[e] = nv
        return LaurentPoly(f, quot).shift(self.min_degree - other.min_degree)

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            diff = self - other
            return diff.is_zero()
        return self == self._lift(other)

    def __hash__(self):
        return hash(tuple(self._coeffs))

    def to_json(self):
        """``{"exponent": "coefficient"}`` in increasing exponent order."""
        return {str(k): self.field.render(v) for k, v in self._coeffs.items()}

    @classmethod
    def from_json(cls, field, data):
        return cls(field, {int(k): field.parse(v) for k, v in data.items()})

    def __repr__(self):
        if not self._coeffs:
            return "0"
        parts = []
        for k, v in sorted(self._coeffs.items(), reverse=True):
            c = self.field.render(v)
            if k == 0:
                parts.append(f"({c})")
            elif k == 1:
                parts.append(f"({c})*t")
            else:
                parts.append(f"({c})*t^{k}")
        return " + ".join(parts)


def normalize_poly(p):
    """Canonical representative of ``p`` modulo multiplication by ``+-t^k``.

    The result has minimum exponent 0 and a canonically positive constant
    coefficient.
    """
    if p.is_zero():
        raise ZeroPolynomial("cannot normalize the zero polynomial")
    q = p.shift(-p.min_degree)
    if not p.field.is_canonical_positive(q[0]):
        q = -q
    return q


def polys_equal_up_to_scalar(p, q, tolerance=None):
    """True when ``p == lam * q`` for some nonzero scalar ``lam``."""
    if p.is_zero() or q.is_zero():
        return p.is_zero() and q.is_zero()
    if set(p.coeffs) != set(q.coeffs):
        return False
    f = p.field
    k = p.min_degree
    lam = p[k] / q[k]
    diff = p - q.scale(lam)
    if tolerance is None:
        return diff.is_zero()
    return all(f.magnitude(v) <= tolerance * max(1.0, float(f.magnitude(lam))) for _, v in diff.items())


# ---------------------------------------------------------------------------
# determinants
# ---------------------------------------------------------------------------


def scalar_det(matrix, field):
    """Determinant over ``field`` by Gaussian elimination with pivoting."""
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix is not square")
    a = [[field(x) for x in row] for row in matrix]
    det = field.one
    for k in range(n):
        if field.exact:
            piv = next((i for i in range(k, n) if not field.is_zero(a[i][k])), None)
        else:
            piv = max(range(k, n), key=lambda i: field.magnitude(a[i][k]))
            if field.is_zero(a[piv][k]):
                piv = None
        if piv is None:
            return field.zero
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        pivot = a[k][k]
        det = det * pivot
        for i in range(k + 1, n):
            if field.is_zero(a[i][k]):
                continue
            factor = a[i][k] / pivot
            row_k = a[k]
            row_i = a[i]
            for j in range(k + 1, n):
                row_i[j] = row_i[j] - factor * row_k[j]
    return det


def laurent_det(matrix, field=None):
    """Determinant of a square matrix of :class:`LaurentPoly` entries.

    Fraction-free (Bareiss) elimination; every division is exact in the
    Laurent ring, so exact fields give exact results.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix is not square")
    if field is None:
        field = next(
            (x.field for row in matrix for x in row if isinstance(x, LaurentPoly)), None
        )
        if field is None:
            raise ValueError("cannot infer the field of a matrix without Laurent entries")
    if n == 0:
        return LaurentPoly.constant(field, 1)

    def lift(x):
        return x if isinstance(x, LaurentPoly) else LaurentPoly.constant(field, x)

    a = [[lift(x) for x in row] for row in matrix]
    sign = 1
    prev = LaurentPoly.constant(field, 1)
    for k in range(n - 1):
        if a[k][k].is_zero():
            piv = next((i for i in range(k + 1, n) if not a[i][k].is_zero()), None)
            if piv is None:
                return LaurentPoly(field)
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            for j in range(k + 1, n):
                num = a[i][j] * akk - aik * a[k][j]
                a[i][j] = num.divide_exact(prev)
            a[i][k] = LaurentPoly(field)
        prev = akk
    det = a[n - 1][n - 1]
    return det if sign == 1 else -det


def isclose(field, x, y, tolerance):
    return field.magnitude(field(x) - field(y)) <= tolerance

