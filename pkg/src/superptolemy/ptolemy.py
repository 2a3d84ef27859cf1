"""Ptolemy and super-Ptolemy assignments, sigma deformations and natural cocycles.

Values may be scalars of a :mod:`superptolemy.scalars` field or
:class:`~superptolemy.grassmann.GrassmannElement` instances; every function
only uses ring operations, so the same code evaluates residuals over
rationals, quadratic fields, floating complex numbers, sympy expressions and
Grassmann algebras.

Edge values are stored per edge class on the orientation given by the vertex
order of any tetrahedron (ordered triangulations make this consistent);
``c(-e) = -c(e)`` is applied by :func:`tet_edge_values` accessors.  Face
values ``theta`` are stored per face class and short-edge values ``sigma`` per
short-edge class on the stored orientation ``e^v_{ab}``, ``a < b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import mpmath

from .errors import (
    NoConvergence,
    NotComposable,
    NotGeneric,
    NotInvertible,
    ResidualNonzero,
    SigmaNotCocycle,
    SingularJacobian,
    ValidationError,
)
from .grassmann import GrassmannAlgebra, GrassmannElement
from .osp21 import (
    SuperMatrix,
    counter_diagonal,
    identity,
    is_osp,
    osp_inverse,
    pair2,
    pair3,
)
from .scalars import ComplexField, QuadraticField, QuadraticNumber, RationalField
from .triangulation import EDGES, face_vertices, truncate

__all__ = [
    "SuperPtolemyAssignment",
    "Residuals",
    "tet_edge_values",
    "tet_face_values",
    "tet_sigma",
    "sigma_from_triangulation",
    "check_sigma",
    "odd_equation_coefficients",
    "even_equation_terms",
    "ptolemy_residuals",
    "deformed_ptolemy_residuals",
    "super_residuals",
    "sigma_residuals",
    "tet_super_residuals",
    "solve_ptolemy",
    "SolveResult",
    "track_ptolemy",
    "scale_action",
    "natural_cocycle",
    "verify_cocycle",
    "path_holonomy",
    "decoration_to_super_ptolemy",
    "is_zero_value",
]


def is_zero_value(x, field=None):
    if isinstance(x, GrassmannElement):
        return x.is_zero()
    if field is not None:
        return field.is_zero(x)
    return x == 0


def _magnitude(x, field):
    if isinstance(x, GrassmannElement):
        return max((field.magnitude(v) for v in x.terms.values()), default=0)
    return field.magnitude(x)


# ---------------------------------------------------------------------------
# per-tetrahedron accessors
# ---------------------------------------------------------------------------


def tet_edge_values(tri, c, t):
    """``{(i, j): c_ij}`` for all six ``i < j`` of tetrahedron ``t``."""
    out = {}
    for i, j in EDGES:
        eid, sign = tri.edge_id(t, i, j)
        out[(i, j)] = c[eid] if sign > 0 else -c[eid]
    return out


def tet_face_values(tri, theta, t):
    """``[theta_0, ..., theta_3]`` with ``theta_k`` on the face opposite ``k``."""
    return [theta[tri.face_id(t, k)] for k in range(4)]


def _unit_sigma(v, a, b):
    # an exact 1 keeps sigma ratios out of float arithmetic
    return Fraction(1)


def tet_sigma(tri, sigma, t, tc=None):
    """Accessor ``s(v, a, b)`` for the oriented short edges of tetrahedron ``t``.

    ``sigma`` is ``None`` for the undeformed case.
    """
    if sigma is None:
        return _unit_sigma
    tc = tc or truncate(tri)

    def s(v, a, b):
        sid, sign = tc.short_id(t, v, a, b)
        value = sigma[sid]
        return value if sign > 0 else 1 / value

    return s


def sigma_from_triangulation(tri, field, params=None, default_one=True):
    """Evaluate the ``sigma`` monomials of a triangulation at parameter values."""
    values = {}
    params = dict(params or {})
    nshort = 6 * tri.n
    for sid in range(nshort):
        mono = tri.sigma.get(sid)
        if mono is None:
            if not default_one:
                raise ValidationError(f"no sigma value for short-edge class {sid}")
            values[sid] = field.one
        else:
            values[sid] = mono.evaluate(field, params)
    return values


def check_sigma(tri, sigma, field=None, tc=None):
    """Raise :class:`SigmaNotCocycle` unless every corner triangle is multiplicative."""
    if sigma is None:
        return
    tc = tc or truncate(tri)
    for t in range(tri.n):
        s = tet_sigma(tri, sigma, t, tc)
        for v in range(4):
            j, k, l = face_vertices(v)
            if is_zero_value(s(v, j, k), field) or is_zero_value(s(v, k, l), field):
                raise SigmaNotCocycle(f"sigma vanishes at tetrahedron {t}, vertex {v}")
            diff = s(v, j, l) - s(v, j, k) * s(v, k, l)
            if not is_zero_value(diff, field):
                raise SigmaNotCocycle(
                    f"sigma(e^{v}_{j}{l}) != sigma(e^{v}_{j}{k}) sigma(e^{v}_{k}{l}) in tetrahedron {t}"
                )


# ---------------------------------------------------------------------------
# equations
# ---------------------------------------------------------------------------


def odd_equation_coefficients(cv, s):
    """Coefficients of the four (deformed) odd face equations of one tetrahedron.

    Returns ``{k: {slot: coefficient}}`` for the equation ``E_{f_k}``; with
    ``s`` identically 1 these are the undeformed equations.
    """
    c = cv
    r12 = s(1, 2, 3) / s(0, 2, 3)
    r01 = s(0, 1, 2) / s(3, 1, 2)
    r03 = s(3, 0, 1) / s(2, 0, 1)
    r23 = s(1, 0, 3) / s(2, 0, 3)
    return {
        3: {0: r12 * c[(1, 2)], 1: -c[(0, 2)], 2: r01 * c[(0, 1)]},
        2: {0: c[(1, 3)], 1: -r03 * c[(0, 3)], 3: r01 * c[(0, 1)]},
        1: {0: r23 * c[(2, 3)], 2: -r03 * c[(0, 3)], 3: c[(0, 2)]},
        0: {1: r23 * c[(2, 3)], 2: -c[(1, 3)], 3: r12 * c[(1, 2)]},
    }


def even_equation_terms(cv, s):
    """``(body, theta0theta2_coefficient)`` of the (deformed) even equation.

    The full residual is ``body + coefficient * theta_0 * theta_2``.  The
    sign of the second term is the one forced by the natural cocycle and the
    pairing formulas (the triangle condition at vertex 0).
    """
    c = cv
    k02 = s(2, 0, 3) * s(3, 1, 2) / (s(1, 0, 3) * s(0, 1, 2))
    k03 = s(3, 0, 2) * s(2, 1, 3) / (s(1, 0, 2) * s(0, 1, 3))
    body = c[(0, 1)] * c[(2, 3)] - k02 * c[(0, 2)] * c[(1, 3)] + k03 * c[(0, 3)] * c[(1, 2)]
    coef = -(s(3, 0, 2) / s(1, 0, 2)) * c[(0, 1)] * c[(0, 3)] * c[(1, 2)] * c[(1, 3)] * c[(2, 3)]
    return body, coef


@dataclass
class Residuals:
    """Even residual and the four odd residuals (indexed by face slot) per tetrahedron."""

    even: list
    odd: list

    def all_values(self):
        for e in self.even:
            yield e
        for row in self.odd:
            yield from row

    def is_zero(self, field=None):
        return all(is_zero_value(x, field) for x in self.all_values())

    def max_norm(self, field):
        return max((_magnitude(x, field) for x in self.all_values()), default=0)


def _ring_one(values):
    for x in values:
        if isinstance(x, GrassmannElement):
            return x.algebra.one
    return 1


def tet_super_residuals(cv, th, s=None):
    """Residuals of one tetrahedron from ``{(i,j): c_ij}`` and ``[theta_0..theta_3]``."""
    s = s or _unit_sigma
    body, coef = even_equation_terms(cv, s)
    even = body + coef * th[0] * th[2]
    eqs = odd_equation_coefficients(cv, s)
    odd = []
    for k in range(4):
        total = 0
        for slot, co in eqs[k].items():
            total = total + co * th[slot]
        odd.append(total)
    return even, odd


def ptolemy_residuals(tri, c):
    """``c01 c23 - c02 c13 + c03 c12`` per tetrahedron."""
    out = []
    for t in range(tri.n):
        cv = tet_edge_values(tri, c, t)
        out.append(cv[(0, 1)] * cv[(2, 3)] - cv[(0, 2)] * cv[(1, 3)] + cv[(0, 3)] * cv[(1, 2)])
    return out


def deformed_ptolemy_residuals(tri, c, sigma, tc=None):
    """Body-level sigma-deformed Ptolemy residual per tetrahedron."""
    tc = tc or truncate(tri)
    out = []
    for t in range(tri.n):
        cv = tet_edge_values(tri, c, t)
        body, _ = even_equation_terms(cv, tet_sigma(tri, sigma, t, tc))
        out.append(body)
    return out


def super_residuals(tri, c, theta):
    """Even and odd super-Ptolemy residuals of every tetrahedron."""
    return sigma_residuals(tri, None, c, theta)


def sigma_residuals(tri, sigma, c, theta, field=None, tc=None, check=True):
    """Sigma-deformed residuals; ``sigma=None`` gives the undeformed equations."""
    tc = tc or truncate(tri)
    if check and sigma is not None:
        check_sigma(tri, sigma, field, tc)
    even, odd = [], []
    for t in range(tri.n):
        cv = tet_edge_values(tri, c, t)
        th = tet_face_values(tri, theta, t)
        e, o = tet_super_residuals(cv, th, tet_sigma(tri, sigma, t, tc))
        even.append(e)
        odd.append(o)
    return Residuals(even, odd)


# ---------------------------------------------------------------------------
# numeric solver
# ---------------------------------------------------------------------------


@dataclass
class SolveResult:
    c: dict
    params: dict
    residual_norm: object
    iterations: int
    trace: list = field(default_factory=list)


def solve_ptolemy(tri, field=None, guess=None, *, params=None, free_params=None,
                  pin=0, tolerance=None, max_iter=100, sigma_builder=None):
    """Newton iteration for the (sigma-deformed) Ptolemy equations.

    ``guess`` maps edge ids to starting values; the edge ``pin`` is held at
    its guessed value to fix the scaling action.  ``free_params`` maps
    parameter names to starting values; these parameters are solved for too
    (for instance the longitude eigenvalue at a fixed meridian value).
    ``sigma_builder(params)`` returns sigma values, by default the
    triangulation's ``sigma`` monomials.  Returns a :class:`SolveResult`.
    """
    field = field or ComplexField(256)
    if not isinstance(field, ComplexField):
        raise ValidationError("the Newton solver needs a floating complex field")
    ctx = field.ctx
    tolerance = ctx.mpf(tolerance) if tolerance is not None else field.tolerance
    params = {k: field(v) for k, v in (params or {}).items()}
    free = {k: field(v) for k, v in (free_params or {}).items()}
    if guess is None:
        raise ValidationError("solve_ptolemy needs an initial guess")
    guess = {int(k): field(v) for k, v in guess.items()}
    for eid in range(tri.num_edges):
        if eid not in guess:
            raise ValidationError(f"initial guess lacks edge class {eid}")
        if field.is_zero(guess[eid]):
            raise ValidationError(f"initial guess for edge class {eid} is zero")
    if sigma_builder is None:
        deformed = bool(tri.sigma)

        def sigma_builder(p):
            return sigma_from_triangulation(tri, field, p) if deformed else None

    tc = truncate(tri)
    unknown_edges = [e for e in range(tri.num_edges) if e != pin]
    free_names = sorted(free)

    def unpack(x):
        c = dict(guess)
        for k, eid in enumerate(unknown_edges):
            c[eid] = x[k]
        p = dict(params)
        for k, name in enumerate(free_names):
            p[name] = x[len(unknown_edges) + k]
        return c, p

    def residual(x):
        c, p = unpack(x)
        return deformed_ptolemy_residuals(tri, c, sigma_builder(p), tc)

    x = [guess[e] for e in unknown_edges] + [free[n] for n in free_names]
    nvar = len(x)
    trace = []
    h = ctx.mpf(2) ** (-(field.bits // 3))
    for it in range(max_iter + 1):
        r = residual(x)
        norm = max((abs(v) for v in r), default=ctx.mpf(0))
        trace.append(norm)
        if norm < tolerance:
            c, p = unpack(x)
            return SolveResult(c, p, norm, it, trace)
        if it == max_iter or nvar == 0:
            break
        jac = ctx.matrix(len(r), nvar)
        for k in range(nvar):
            xp = list(x)
            xm = list(x)
            step = h * max(1, abs(x[k]))
            xp[k] += step
            xm[k] -= step
            rp, rm = residual(xp), residual(xm)
            for i in range(len(r)):
                jac[i, k] = (rp[i] - rm[i]) / (2 * step)
        rhs = ctx.matrix([-v for v in r])
        try:
            if len(r) == nvar:
                dx = ctx.lu_solve(jac, rhs)
            else:
                jh = jac.H
                dx = ctx.lu_solve(jh * jac, jh * rhs)
        except ZeroDivisionError as exc:
            raise SingularJacobian(f"singular Jacobian at iteration {it}") from exc
        if any(not ctx.isfinite(abs(d)) for d in dx):
            raise SingularJacobian(f"singular Jacobian at iteration {it}")
        # backtracking keeps the iteration from jumping between solution branches
        step = ctx.mpf(1)
        for _ in range(30):
            trial = [x[k] + step * dx[k] for k in range(nvar)]
            try:
                tnorm = max((abs(v) for v in residual(trial)), default=ctx.mpf(0))
            except ZeroDivisionError:
                tnorm = None
            if tnorm is not None and tnorm < norm:
                break
            step /= 2
        x = trial
    raise NoConvergence(
        f"no convergence after {max_iter} iterations (residual {mpmath.nstr(trace[-1], 5)})",
        trace,
    )


def track_ptolemy(tri, field, start_c, start_params, name, target, *, free_params=(),
                  steps=16, pin=0, tolerance=None, max_iter=50):
    """Follow a solution while the fixed parameter ``name`` moves to ``target``.

    ``start_c`` and ``start_params`` must solve the equations already;
    parameters listed in ``free_params`` are re-solved at every step.
    """
    field = field or ComplexField(256)
    c = {k: field(v) for k, v in start_c.items()}
    params = {k: field(v) for k, v in start_params.items()}
    start = params[name]
    target = field(target)
    result = None
    for k in range(1, steps + 1):
        fixed = {key: v for key, v in params.items() if key not in free_params}
        fixed[name] = start + (target - start) * k / steps
        free = {key: params[key] for key in free_params}
        result = solve_ptolemy(tri, field, c, params=fixed, free_params=free, pin=pin,
                               tolerance=tolerance, max_iter=max_iter)
        c, params = result.c, result.params
    return result


# ---------------------------------------------------------------------------
# scaling action
# ---------------------------------------------------------------------------


def scale_action(tri, x, c, theta=None):
    """Act by per-cusp invertible values ``x`` on ``(c, theta)``."""
    for xi in x:
        if isinstance(xi, GrassmannElement):
            if not xi.is_invertible():
                raise NotInvertible("scaling values need nonzero body")
        elif xi == 0:
            raise NotInvertible("scaling values must be nonzero")
    if len(x) != tri.num_cusps:
        raise ValidationError(f"need {tri.num_cusps} scaling values, got {len(x)}")
    new_c = {}
    for eid, members in enumerate(tri.edge_members):
        t, i, j = members[0]
        new_c[eid] = x[tri.cusp_class[(t, i)]] * x[tri.cusp_class[(t, j)]] * c[eid]
    new_theta = None
    if theta is not None:
        new_theta = {}
        for fid, ((t, k), _) in enumerate(tri.face_sides):
            i, j, l = face_vertices(k)
            w = x[tri.cusp_class[(t, i)]] * x[tri.cusp_class[(t, j)]] * x[tri.cusp_class[(t, l)]]
            new_theta[fid] = theta[fid] / w
    return new_c, new_theta


# ---------------------------------------------------------------------------
# natural cocycles
# ---------------------------------------------------------------------------


@dataclass
class SuperPtolemyAssignment:
    """Edge values ``c``, face values ``theta`` and optional ``sigma`` on a triangulation."""

    triangulation: object
    algebra: GrassmannAlgebra
    c: dict
    theta: dict
    sigma: dict = None

    def residuals(self):
        return sigma_residuals(self.triangulation, self.sigma, self.c, self.theta,
                               self.algebra.field)

    def __bool__(self):
        return True


def _lift(algebra, values):
    if values is None:
        return None
    return {k: algebra(v) for k, v in values.items()}


def _short_matrix(algebra, cv, th, s, v, a, b):
    """Cocycle value of ``e^v_{ab}`` inside one tetrahedron."""
    face = sorted((v, a, b))
    cyclic = [(face[0], face[1], face[2]), (face[1], face[2], face[0]), (face[2], face[0], face[1])]
    if (a, v, b) not in cyclic:
        return osp_inverse(_short_matrix(algebra, cv, th, s, v, b, a))
    i, j, k = a, v, b
    opp = [x for x in range(4) if x not in face][0]

    def cc(p, q):
        return cv[(p, q)] if p < q else -cv[(q, p)]

    sj, si, sk = s(j, i, k), s(i, k, j), s(k, j, i)
    theta = th[opp]
    sj_inv = sj.invert()
    sk_inv = sk.invert()
    even = -(si * sk_inv) * cc(k, i) * (cc(i, j) * cc(j, k)).invert()
    odd = theta * cc(k, i) * sk_inv
    z = algebra.zero
    return SuperMatrix(algebra, [[sj, even, odd], [z, sj_inv, z], [z, -odd * sj_inv, algebra.one]])


def _default_algebra(sample):
    if isinstance(sample, GrassmannElement):
        return sample.algebra
    if isinstance(sample, QuadraticNumber):
        return GrassmannAlgebra(1, QuadraticField(sample.d))
    if isinstance(sample, (int, Fraction)):
        return GrassmannAlgebra(1, RationalField())
    raise ValidationError("pass algebra= for edge values outside the exact fields")


def natural_cocycle(tri, c, theta=None, sigma=None, algebra=None, check=True, tc=None):
    """Cocycle matrices ``{'short': {sid: M}, 'long': {eid: M}}``.

    Short-edge matrices follow the unipotent (or, with ``sigma``, Borel)
    shape; long edges get the counter-diagonal matrix with entry ``c``.
    Raises :class:`ResidualNonzero` if ``(c, theta)`` fails its equations
    or if the two instances of a short-edge class disagree.
    """
    tc = tc or truncate(tri)
    if algebra is None:
        algebra = _default_algebra(next(iter(c.values())))
    cg = _lift(algebra, c)
    if theta is None:
        theta = {fid: 0 for fid in range(tri.num_faces)}
    tg = _lift(algebra, theta)
    sg = _lift(algebra, sigma)
    if check:
        res = sigma_residuals(tri, sg, cg, tg, algebra.field, tc)
        if not res.is_zero():
            raise ResidualNonzero("(c, theta) does not satisfy its Ptolemy equations")
    short = {}
    for sid, members in enumerate(tc.short_members):
        mats = []
        for t, v, a, b in members:
            cv = tet_edge_values(tri, cg, t)
            th = tet_face_values(tri, tg, t)
            s = tet_sigma(tri, sg, t, tc) if sg is not None else (lambda *_: algebra.one)
            mats.append(_short_matrix(algebra, cv, th, s, v, a, b))
        if check and any(m != mats[0] for m in mats[1:]):
            raise ResidualNonzero(f"short-edge class {sid} receives two different matrices")
        short[sid] = mats[0]
    long = {eid: counter_diagonal(algebra, cg[eid]) for eid in range(tri.num_edges)}
    return {"short": short, "long": long, "algebra": algebra}


def _cell_matrix(tri, tc, phi, kind, cell, sign):
    if kind == "s":
        sid = tc.short_class[cell] if isinstance(cell, tuple) else cell
        m = phi["short"][sid]
    else:
        eid = tri.edge_class[cell] if isinstance(cell, tuple) else cell
        m = phi["long"][eid]
    return m if sign > 0 else osp_inverse(m)


@dataclass
class CocycleReport:
    violations: list
    non_osp: list
    checked_hexagons: int
    checked_triangles: int

    @property
    def ok(self):
        return not self.violations and not self.non_osp

    def to_json(self):
        return {
            "ok": self.ok,
            "hexagons": self.checked_hexagons,
            "triangles": self.checked_triangles,
            "violations": [f"{kind} {idx}" for kind, idx, _ in self.violations],
            "non_osp": [f"{kind} {idx}: {why}" for kind, idx, why in self.non_osp],
        }


def verify_cocycle(tri, phi, tc=None):
    """Check that every hexagon and corner triangle multiplies to the identity."""
    tc = tc or truncate(tri)
    algebra = phi["algebra"]
    non_osp = []
    for kind in ("short", "long"):
        for idx, m in phi[kind].items():
            check = is_osp(m)
            if not check:
                non_osp.append((kind, idx, check.describe()))
    violations = []
    one = identity(algebra)
    if non_osp:
        return CocycleReport(violations, non_osp, 0, 0)
    for idx, word in enumerate(tc.hexagons):
        prod = one
        for kind, cell, sign in word:
            prod = prod @ _cell_matrix(tri, tc, phi, kind, cell, sign)
        if prod != one:
            violations.append(("hexagon", idx, prod))
    for idx, word in enumerate(tc.triangles):
        prod = one
        for kind, cell, sign in word:
            prod = prod @ _cell_matrix(tri, tc, phi, kind, cell, sign)
        if prod != one:
            violations.append(("triangle", idx, prod))
    return CocycleReport(violations, non_osp, len(tc.hexagons), len(tc.triangles))


def path_holonomy(tri, phi, path, tc=None):
    """Ordered product of cocycle values along ``[(kind, class_id, sign), ...]``."""
    tc = tc or truncate(tri)
    prod = identity(phi["algebra"])
    position = None
    for kind, idx, sign in path:
        if kind == "s":
            if not 0 <= idx < tc.num_short_classes:
                raise NotComposable(f"unknown short-edge class {idx}")
            start, end = tc.short_endpoints(idx)
        elif kind == "l":
            if not 0 <= idx < tri.num_edges:
                raise NotComposable(f"unknown edge class {idx}")
            start, end = tc.long_endpoints(idx)
        else:
            raise NotComposable(f"unknown cell kind {kind!r}")
        if sign < 0:
            start, end = end, start
        if position is not None and position != start:
            raise NotComposable(f"cell {'-' if sign < 0 else ''}{kind}{idx} does not start where the path is")
        position = end
        prod = prod @ _cell_matrix(tri, tc, phi, kind, idx, sign)
    return prod


# ---------------------------------------------------------------------------
# decorations of one simplex
# ---------------------------------------------------------------------------


def decoration_to_super_ptolemy(vectors):
    """Edge and face values of one tetrahedron decorated by four super-vectors.

    Returns ``({(i, j): c_ij}, [theta_0, ..., theta_3])`` where ``theta_k``
    belongs to the face opposite vertex ``k``.
    """
    if len(vectors) != 4:
        raise ValidationError("a tetrahedron needs four vectors")
    field = vectors[0].algebra.field
    c = {}
    for i, j in combinations(range(4), 2):
        c[(i, j)] = pair2(vectors[i], vectors[j])
        if field.is_zero(c[(i, j)].body()):
            raise NotGeneric(f"pairing of vectors {i} and {j} has zero body")
    theta = []
    for k in range(4):
        i, j, l = face_vertices(k)
        denom = c[(i, j)] * c[(j, l)] * (-c[(i, l)])
        theta.append(pair3(vectors[i], vectors[j], vectors[l]) / denom)
    return c, theta
