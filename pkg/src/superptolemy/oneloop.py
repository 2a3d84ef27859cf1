"""Face matrices, the 1-loop invariant and the 1-loop polynomial.

Throughout, odd values live in a Grassmann algebra with one generator, so
``theta_i theta_j = 0`` and the even equation reduces to the (deformed)
Ptolemy relation.  A face matrix keeps two of the four odd equations of each
tetrahedron; the two are named by their common edge ``e_Delta``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from itertools import product

from .errors import ChoiceInvalid, ValidationError, WeightsMissing
from .grassmann import GrassmannAlgebra
from .ptolemy import (
    SuperPtolemyAssignment,
    check_sigma,
    odd_equation_coefficients,
    tet_edge_values,
    tet_sigma,
)
from .scalars import ComplexField, LaurentPoly, laurent_det, normalize_poly, scalar_det
from .triangulation import EDGES, lift_exponents, truncate

__all__ = [
    "EdgeChoice",
    "FaceMatrix",
    "NoLift",
    "tet_face_matrix",
    "build_face_matrix",
    "one_loop_invariant",
    "one_loop_polynomial",
    "face_matrix_kernel",
    "lift_to_super",
    "sigma_edge_ratio",
    "ROW_SIGNS",
]

ROW_SIGNS = (1, -1, 1, -1)


def tet_face_matrix(cv):
    """Skew-symmetric 4x4 face matrix of one tetrahedron (rows ``E_f0, -E_f1, E_f2, -E_f3``)."""
    c = cv
    return [
        [0, c[(2, 3)], -c[(1, 3)], c[(1, 2)]],
        [-c[(2, 3)], 0, c[(0, 3)], -c[(0, 2)]],
        [c[(1, 3)], -c[(0, 3)], 0, c[(0, 1)]],
        [-c[(1, 2)], c[(0, 2)], -c[(0, 1)], 0],
    ]


def sigma_edge_ratio(s, edge):
    """Sigma factor multiplying ``c(e)`` in both odd equations that contain ``e``."""
    i, j = edge
    table = {
        (0, 1): lambda: s(0, 1, 2) / s(3, 1, 2),
        (0, 2): lambda: 1,
        (0, 3): lambda: s(3, 0, 1) / s(2, 0, 1),
        (1, 2): lambda: s(1, 2, 3) / s(0, 2, 3),
        (1, 3): lambda: 1,
        (2, 3): lambda: s(1, 0, 3) / s(2, 0, 3),
    }
    return table[(i, j)]()


@dataclass(frozen=True)
class EdgeChoice:
    """One edge ``(i, j)``, ``i < j``, per tetrahedron."""

    edges: tuple

    def __post_init__(self):
        edges = tuple(tuple(e) for e in self.edges)
        for e in edges:
            if len(e) != 2 or tuple(sorted(e)) not in EDGES or e[0] == e[1]:
                raise ChoiceInvalid(f"{e!r} is not an edge of a tetrahedron")
        object.__setattr__(self, "edges", tuple(tuple(sorted(e)) for e in edges))

    @classmethod
    def uniform(cls, n, edge=(0, 1)):
        return cls((edge,) * n)

    @classmethod
    def parse(cls, text, n=None):
        """``"03,12"`` or ``"0-3 1-2"``: one edge per tetrahedron."""
        parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
        edges = []
        for p in parts:
            digits = p.replace("-", "").replace("[", "").replace("]", "")
            if not re.fullmatch(r"[0-3]{2}", digits):
                raise ChoiceInvalid(f"bad edge {p!r}; write two vertex digits like 03")
            edges.append((int(digits[0]), int(digits[1])))
        choice = cls(tuple(edges))
        if n is not None:
            choice.check(n)
        return choice

    @classmethod
    def all(cls, n):
        for combo in product(EDGES, repeat=n):
            yield cls(combo)

    def check(self, n):
        if len(self.edges) != n:
            raise ChoiceInvalid(f"need {n} edges, one per tetrahedron, got {len(self.edges)}")
        return self

    def selected_slots(self, t):
        i, j = self.edges[t]
        return [k for k in range(4) if k not in (i, j)]

    def render(self):
        return ",".join(f"{i}{j}" for i, j in self.edges)


@dataclass
class FaceMatrix:
    """Selected odd equations of every tetrahedron as a square matrix.

    ``rows[r][f]`` is the coefficient of ``theta(f)``; ``row_labels[r]`` is
    ``(tet, slot)``.  ``edge_values`` and ``choice_values`` hold the factors
    divided out by the 1-loop invariant.
    """

    rows: list
    row_labels: list
    field: object
    edge_values: list
    choice_values: list
    twisted: bool = False
    choice: EdgeChoice = None
    extras: dict = dc_field(default_factory=dict)

    @property
    def size(self):
        return len(self.rows)

    def prefactor(self):
        f = self.field
        denom = f.one
        for x in self.edge_values + self.choice_values:
            denom = denom * x
        if f.is_zero(denom):
            raise ValidationError("edge values must be nonzero")
        return f.inverse(denom)

    def determinant(self):
        if self.twisted:
            return laurent_det(self.rows, self.field)
        return scalar_det(self.rows, self.field)

    def evaluate(self, t):
        """Scalar matrix at ``t`` (twisted matrices only)."""
        return [[x.evaluate(t) if isinstance(x, LaurentPoly) else x for x in row] for row in self.rows]

    def to_json(self):
        f = self.field

        def cell(x):
            if isinstance(x, LaurentPoly):
                return x.to_json()
            return f.render(x)

        return {
            "rows": [[cell(x) for x in row] for row in self.rows],
            "row_labels": [list(lbl) for lbl in self.row_labels],
            "choice": self.choice.render() if self.choice else None,
        }


def _as_field(field, c):
    return {k: field(v) for k, v in c.items()}


def build_face_matrix(tri, c, choice=None, *, sigma=None, weights=None, twisted=False,
                      field=None, tc=None):
    """Face matrix for Ptolemy values ``c`` (per edge class).

    ``sigma`` gives the deformed equations, ``twisted`` inserts ``t``
    powers from the face weights (``weights`` or the triangulation's own).
    Faces of one class met twice by a row add up.
    """
    if field is None:
        raise ValidationError("build_face_matrix needs a field")
    choice = (choice or EdgeChoice.uniform(tri.n)).check(tri.n)
    c = _as_field(field, c)
    for eid in range(tri.num_edges):
        if eid not in c:
            raise ValidationError(f"no value for edge class {eid}")
    tc = tc or truncate(tri)
    if sigma is not None:
        sigma = _as_field(field, sigma)
        check_sigma(tri, sigma, field, tc)
    exps = None
    if twisted:
        w = weights if weights is not None else tri.face_weights
        if w is None:
            raise WeightsMissing("a twisted face matrix needs face weights")
        exps = lift_exponents(tri, w)
    nf = tri.num_faces
    zero = LaurentPoly(field) if twisted else field.zero
    rows, labels, choice_values = [], [], []
    for t in range(tri.n):
        cv = tet_edge_values(tri, c, t)
        s = tet_sigma(tri, sigma, t, tc) if sigma is not None else (lambda *_: field.one)
        eqs = odd_equation_coefficients(cv, s)
        for k in choice.selected_slots(t):
            row = [zero] * nf
            for slot, coef in eqs[k].items():
                fid = tri.face_id(t, slot)
                entry = coef * ROW_SIGNS[k]
                if twisted:
                    entry = LaurentPoly.monomial(field, exps[(t, slot)], entry)
                row[fid] = row[fid] + entry
            rows.append(row)
            labels.append((t, k))
        i, j = choice.edges[t]
        choice_values.append(sigma_edge_ratio(s, (i, j)) * cv[(i, j)])
    if len(rows) != nf:
        raise ValidationError(
            f"face matrix is {len(rows)}x{nf}; the triangulation needs as many faces as 2 x tetrahedra"
        )
    edge_values = [c[e] for e in range(tri.num_edges)]
    return FaceMatrix(rows, labels, field, edge_values, choice_values, twisted, choice)


def one_loop_invariant(tri, c, choice=None, *, sigma=None, field=None):
    """``det F / (prod c(e) * prod c^sigma(e_Delta))``."""
    fm = build_face_matrix(tri, c, choice, sigma=sigma, field=field)
    return fm.determinant() * fm.prefactor()


def one_loop_polynomial(tri, c, choice=None, *, sigma=None, weights=None, field=None,
                        normalize=True):
    """Twisted 1-loop polynomial, normalized up to ``+-t^k`` unless ``normalize=False``."""
    fm = build_face_matrix(tri, c, choice, sigma=sigma, weights=weights, twisted=True, field=field)
    poly = fm.determinant().scale(fm.prefactor())
    return normalize_poly(poly) if normalize else poly


# ---------------------------------------------------------------------------
# kernels and lifts
# ---------------------------------------------------------------------------


def _exact_kernel(rows, field):
    a = [list(r) for r in rows]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, nrows) if not field.is_zero(a[i][col])), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = field.inverse(a[r][col])
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and not field.is_zero(a[i][col]):
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
        if r == nrows:
            break
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for fcol in free:
        v = [field.zero] * ncols
        v[fcol] = field.one
        for row, pcol in enumerate(pivots):
            v[pcol] = -a[row][fcol]
        basis.append(v)
    return basis


def _float_kernel(rows, field, tolerance):
    ctx = field.ctx
    a = ctx.matrix([[field(x) for x in r] for r in rows])
    n = a.cols
    u, s, vh = ctx.svd_c(a)
    scale = max([abs(x) for x in s] + [ctx.mpf(1)])
    basis = []
    for k in range(n):
        sk = abs(s[k]) if k < len(s) else ctx.mpf(0)
        if sk <= tolerance * scale:
            basis.append([ctx.conj(vh[k, j]) for j in range(n)])
    return basis


def face_matrix_kernel(fm, tolerance=None):
    """Basis of the kernel of a scalar face matrix.

    Exact fields give an exact basis in reduced echelon form; floating fields
    use singular values below ``tolerance`` times the largest one.
    """
    if fm.twisted:
        raise ValidationError("kernel of a twisted face matrix is not defined pointwise")
    field = fm.field
    if getattr(field, "exact", True):
        return _exact_kernel(fm.rows, field)
    tol = field.ctx.mpf(tolerance) if tolerance is not None else field.ctx.mpf("1e-20")
    return _float_kernel(fm.rows, field, tol)


@dataclass
class NoLift:
    """Returned when the 1-loop invariant is nonzero, so every ``theta`` vanishes."""

    delta: object

    def __bool__(self):
        return False


def lift_to_super(tri, c, choice=None, *, sigma=None, field=None, tolerance=None):
    """Super-Ptolemy assignment ``(c, eta * v)`` with ``v`` in the face-matrix kernel.

    ``eta`` is the generator of a rank-one Grassmann algebra.  Returns
    :class:`NoLift` when the kernel is trivial.
    """
    fm = build_face_matrix(tri, c, choice, sigma=sigma, field=field)
    basis = face_matrix_kernel(fm, tolerance)
    if not basis:
        return NoLift(fm.determinant() * fm.prefactor())
    v = basis[0]
    if isinstance(field, ComplexField):
        big = max(range(len(v)), key=lambda k: abs(v[k]))
        v = [x / v[big] for x in v]
    algebra = GrassmannAlgebra(1, field)
    eta = algebra.generator(1)
    theta = {fid: eta * v[fid] for fid in range(tri.num_faces)}
    cg = {e: algebra(field(x)) for e, x in c.items()}
    sg = {s: algebra(field(x)) for s, x in sigma.items()} if sigma is not None else None
    return SuperPtolemyAssignment(tri, algebra, cg, theta, sg)
