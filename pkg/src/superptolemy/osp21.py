"""Even 2|1 x 2|1 super-matrices, the group OSp(2|1) and its pairings.

A super-matrix is written

    [[a, b, alpha],
     [c, d, beta ],
     [gamma, delta, e]]

with ``a, b, c, d, e`` even and ``alpha, beta, gamma, delta`` odd.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DegeneratePair, NotInvertible, NotOSp, NotUnimodular, RankMismatch

__all__ = [
    "SuperMatrix",
    "SuperVector",
    "OSpCheck",
    "identity",
    "embed_sl2",
    "unipotent",
    "counter_diagonal",
    "borel",
    "body_map",
    "super_transpose",
    "berezinian",
    "is_osp",
    "osp_inverse",
    "pair2",
    "pair3",
    "act",
    "coset_normal_form",
    "random_osp",
    "sl2_det",
]

_EVEN_SLOTS = ((0, 0), (0, 1), (1, 0), (1, 1), (2, 2))
_ODD_SLOTS = ((0, 2), (1, 2), (2, 0), (2, 1))


class SuperMatrix:
    """Immutable 3x3 matrix of Grassmann elements with the 2|1 block structure."""

    __slots__ = ("algebra", "rows")

    def __init__(self, algebra, rows, check_parity=True):
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError("a super-matrix needs 3 rows of 3 entries")
        self.algebra = algebra
        self.rows = tuple(tuple(algebra(x) for x in row) for row in rows)
        if check_parity:
            for i, j in _EVEN_SLOTS:
                if not self.rows[i][j].is_even():
                    raise ValueError(f"entry ({i},{j}) must be even, got {self.rows[i][j]}")
            for i, j in _ODD_SLOTS:
                if not self.rows[i][j].is_odd():
                    raise ValueError(f"entry ({i},{j}) must be odd, got {self.rows[i][j]}")

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    @property
    def entries(self):
        """The named entries ``(a, b, c, d, e, alpha, beta, gamma, delta)``."""
        r = self.rows
        return r[0][0], r[0][1], r[1][0], r[1][1], r[2][2], r[0][2], r[1][2], r[2][0], r[2][1]

    def _check(self, other):
        if not isinstance(other, SuperMatrix):
            raise TypeError("expected a SuperMatrix")
        if other.algebra != self.algebra:
            raise RankMismatch("super-matrices over different algebras")

    def __matmul__(self, other):
        self._check(other)
        a, b = self.rows, other.rows
        out = []
        for i in range(3):
            row = []
            for j in range(3):
                s = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j]
                row.append(s)
            out.append(row)
        return SuperMatrix(self.algebra, out, check_parity=False)

    __mul__ = __matmul__

    def __eq__(self, other):
        if not isinstance(other, SuperMatrix) or other.algebra != self.algebra:
            return NotImplemented
        return all(x == y for ra, rb in zip(self.rows, other.rows) for x, y in zip(ra, rb))

    def __hash__(self):
        return hash(self.rows)

    def map(self, fn):
        return SuperMatrix(self.algebra, [[fn(x) for x in row] for row in self.rows], False)

    def is_even(self):
        return all(self.rows[i][j].is_even() for i, j in _EVEN_SLOTS) and all(
            self.rows[i][j].is_odd() for i, j in _ODD_SLOTS
        )

    def has_odd_part(self):
        return any(not x.is_scalar() for row in self.rows for x in row)

    def render(self):
        return "[" + ", ".join("[" + ", ".join(x.render() for x in row) + "]" for row in self.rows) + "]"

    __str__ = render

    def __repr__(self):
        return f"SuperMatrix({self.render()})"


def identity(algebra):
    one, zero = algebra.one, algebra.zero
    return SuperMatrix(algebra, [[one, zero, zero], [zero, one, zero], [zero, zero, one]])


def sl2_det(m):
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def embed_sl2(algebra, m):
    """The block-diagonal image of a determinant-one 2x2 matrix."""
    m = [[algebra(x) for x in row] for row in m]
    if sl2_det(m) != 1:
        raise NotUnimodular(f"determinant {sl2_det(m)} is not 1")
    z = algebra.zero
    return SuperMatrix(algebra, [[m[0][0], m[0][1], z], [m[1][0], m[1][1], z], [z, z, algebra.one]])


def unipotent(algebra, b, alpha):
    """Element of the unipotent subgroup N with even ``b`` and odd ``alpha``."""
    one, z = algebra.one, algebra.zero
    alpha = algebra(alpha)
    return SuperMatrix(algebra, [[one, b, alpha], [z, one, z], [z, -alpha, one]])


def counter_diagonal(algebra, c):
    """The long-edge shape ``[[0, -1/c, 0], [c, 0, 0], [0, 0, 1]]``."""
    c = algebra(c)
    z = algebra.zero
    return SuperMatrix(algebra, [[z, -c.invert(), z], [c, z, z], [z, z, algebra.one]])


def borel(algebra, s, b=0, alpha=0):
    """``[[s, b, alpha], [0, 1/s, 0], [0, -alpha/s, 1]]``, the deformed short-edge shape."""
    s = algebra(s)
    sinv = s.invert()
    alpha = algebra(alpha)
    z = algebra.zero
    return SuperMatrix(
        algebra,
        [[s, algebra(b), alpha], [z, sinv, z], [z, -alpha * sinv, algebra.one]],
    )


def body_map(g):
    """The body of the upper-left block as a 2x2 scalar matrix."""
    return [[g[0, 0].body(), g[0, 1].body()], [g[1, 0].body(), g[1, 1].body()]]


def super_transpose(g):
    """``(A^t, C^t; -B^t, D^t)``."""
    a, b, c, d, e, alpha, beta, gamma, delta = g.entries
    return SuperMatrix(
        g.algebra, [[a, c, gamma], [b, d, delta], [-alpha, -beta, e]], check_parity=False
    )


def berezinian(g):
    """``det(A - B D^-1 C) / det(D)``; requires invertible ``A`` and ``D``."""
    a, b, c, d, e, alpha, beta, gamma, delta = g.entries
    if not e.is_invertible():
        raise NotInvertible("the odd-odd block D is not invertible")
    if not (a * d - b * c).is_invertible():
        raise NotInvertible("the even-even block A is not invertible")
    einv = e.invert()
    a2 = a - alpha * einv * gamma
    b2 = b - alpha * einv * delta
    c2 = c - beta * einv * gamma
    d2 = d - beta * einv * delta
    return (a2 * d2 - b2 * c2) * einv


@dataclass(frozen=True)
class OSpCheck:
    """Result of :func:`is_osp`; truthy iff every relation holds."""

    failed: tuple = ()
    residuals: dict = field(default_factory=dict)

    def __bool__(self):
        return not self.failed

    def describe(self):
        if not self.failed:
            return "OSp(2|1) relations hold"
        return "; ".join(f"{name} off by {self.residuals[name]}" for name in self.failed)


def osp_relations(g):
    """Residuals of the scalar relations defining OSp(2|1)."""
    a, b, c, d, e, alpha, beta, gamma, delta = g.entries
    out = {
        "ad-bc-gamma*delta=1": a * d - b * c - gamma * delta - 1,
        "e^2+2*alpha*beta=1": e * e + 2 * alpha * beta - 1,
        "a*beta-c*alpha-e*gamma=0": a * beta - c * alpha - e * gamma,
        "b*beta-d*alpha-e*delta=0": b * beta - d * alpha - e * delta,
    }
    if e.is_invertible():
        einv = e.invert()
        out["Ber=1"] = (a * d - b * c) * (1 - 2 * alpha * beta * einv * einv) * einv - 1
    else:
        out["Ber=1"] = None
    return out


def is_osp(g):
    """Check evenness and the defining relations; returns an :class:`OSpCheck`."""
    if not g.is_even():
        return OSpCheck(("evenness",), {"evenness": "block parity violated"})
    res = osp_relations(g)
    failed = []
    for name, r in res.items():
        if r is None:
            failed.append(name)
            res[name] = "e not invertible"
        elif not r.is_zero():
            failed.append(name)
    return OSpCheck(tuple(failed), res)


def osp_inverse(g):
    """Closed-form inverse of an OSp(2|1) element."""
    check = is_osp(g)
    if not check:
        raise NotOSp(check.describe())
    a, b, c, d, e, alpha, beta, gamma, delta = g.entries
    return SuperMatrix(g.algebra, [[d, -b, delta], [-c, a, -gamma], [-beta, alpha, e]])


# ---------------------------------------------------------------------------
# vectors and pairings
# ---------------------------------------------------------------------------


class SuperVector:
    """Column ``(a, b, alpha)`` with even ``a, b`` and odd ``alpha``."""

    __slots__ = ("algebra", "a", "b", "alpha")

    def __init__(self, algebra, a, b, alpha=0):
        self.algebra = algebra
        self.a = algebra(a)
        self.b = algebra(b)
        self.alpha = algebra(alpha)
        if not (self.a.is_even() and self.b.is_even() and self.alpha.is_odd()):
            raise ValueError("a super-vector needs even, even, odd components")

    def components(self):
        return self.a, self.b, self.alpha

    def in_a21(self):
        """Membership in A^{2|1}: the body ``(a, b)`` is not the zero vector."""
        f = self.algebra.field
        return not (f.is_zero(self.a.body()) and f.is_zero(self.b.body()))

    def __eq__(self, other):
        if not isinstance(other, SuperVector):
            return NotImplemented
        return self.components() == other.components()

    def __hash__(self):
        return hash(self.components())

    def __repr__(self):
        return f"SuperVector({self.a}, {self.b}, {self.alpha})"

    @classmethod
    def left_column(cls, g):
        return cls(g.algebra, g[0, 0], g[1, 0], g[2, 0])


def pair2(u, v):
    """Even bilinear pairing ``ad - bc - alpha*beta``."""
    return u.a * v.b - u.b * v.a - u.alpha * v.alpha


def pair3(u, v, w):
    """Odd trilinear pairing: the 3x3 determinant of the columns minus ``2*alpha*beta*gamma``."""
    det = (
        u.alpha * (v.a * w.b - w.a * v.b)
        - v.alpha * (u.a * w.b - w.a * u.b)
        + w.alpha * (u.a * v.b - v.a * u.b)
    )
    return det - 2 * u.alpha * v.alpha * w.alpha


def act(g, v, check=True):
    """Matrix-vector product of an OSp(2|1) element and a super-vector."""
    if check:
        result = is_osp(g)
        if not result:
            raise NotOSp(result.describe())
    r = g.rows
    comps = v.components()
    out = [r[i][0] * comps[0] + r[i][1] * comps[1] + r[i][2] * comps[2] for i in range(3)]
    return SuperVector(g.algebra, *out)


def coset_normal_form(g, h):
    """Representatives ``g' = g n1`` and ``h' = h n2`` with ``g'^-1 h'`` counter-diagonal.

    Returns ``(g', h', c)`` where ``c`` is the pairing of the two cosets.
    """
    for x in (g, h):
        check = is_osp(x)
        if not check:
            raise NotOSp(check.describe())
    alg = g.algebra
    x = osp_inverse(g) @ h
    a, c, gamma = x[0, 0], x[1, 0], x[2, 0]
    if alg.field.is_zero(c.body()):
        raise DegeneratePair("the cosets pair to an element with zero body")
    cinv = c.invert()
    n1 = unipotent(alg, a * cinv, -gamma * cinv)
    y = osp_inverse(n1) @ x
    d, beta = y[1, 1], y[1, 2]
    alpha2 = -beta * cinv
    b2 = (beta * alpha2 - d) * cinv
    n2 = unipotent(alg, b2, alpha2)
    g2 = g @ n1
    h2 = h @ n2
    z = osp_inverse(g2) @ h2
    if z != counter_diagonal(alg, z[1, 0]):
        raise DegeneratePair("normal form elimination did not reach the counter-diagonal shape")
    return g2, h2, z[1, 0]


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def random_osp(algebra, rng, length=6, odd_generators=None):
    """Random word of length at most ``length`` in embedded SL2 and N generators."""
    f = algebra.field
    gens = odd_generators
    if gens is None:
        gens = list(range(1, algebra.rank + 1))
    g = identity(algebra)
    for _ in range(rng.randint(1, length)):
        kind = rng.randrange(4)
        if kind == 0:
            k = f.random_element(rng)
            g = g @ embed_sl2(algebra, [[1, k], [0, 1]])
        elif kind == 1:
            k = f.random_element(rng)
            g = g @ embed_sl2(algebra, [[1, 0], [k, 1]])
        elif kind == 2:
            s = f.random_element(rng, nonzero=True)
            g = g @ embed_sl2(algebra, [[s, 0], [0, f.inverse(s)]])
        else:
            alpha = algebra.zero
            for i in gens:
                alpha = alpha + algebra.generator(i) * f.random_element(rng)
            b = algebra(f.random_element(rng))
            if algebra.rank >= 2 and rng.random() < 0.5:
                b = b + algebra.generator(1) * algebra.generator(2) * f.random_element(rng)
            g = g @ unipotent(algebra, b, alpha)
    return g
