"""2-3 Pachner moves on ordered triangulations with Ptolemy transport.

Two distinct tetrahedra ``A`` and ``B`` glued along a face span a bipyramid
with apexes ``a``, ``b`` and equator ``x < y < z``.  The move replaces them
by ``{a,b,x,y}``, ``{a,b,y,z}`` and ``{a,b,x,z}`` around the new edge
``[a, b]``.  Vertex orders of the new tetrahedra are restrictions of one
order on the five bipyramid vertices that extends the orders of ``A`` and
``B``; every face gluing then stays order-preserving.  When both apexes come
before the equator this is the labeling ``0 = a``, ``1 = b``,
``2, 3, 4 = x, y, z``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import combinations

from .errors import (
    DegenerateTransport,
    NotAdjacent,
    NotOrdered,
    OrderingObstruction,
    ResidualNonzero,
    ValidationError,
)
from .oneloop import EdgeChoice, one_loop_polynomial
from .ptolemy import deformed_ptolemy_residuals, even_equation_terms, ptolemy_residuals
from .scalars import polys_equal_up_to_scalar
from .triangulation import Triangulation, face_vertices, lift_exponents, ordered_face_map, truncate

__all__ = [
    "PachnerMove",
    "two_three_move",
    "transport_ptolemy",
    "transport_sigma",
    "pachner_invariance_check",
    "InvarianceReport",
]

APEX_A, APEX_B = "a", "b"
EQUATOR = ("x", "y", "z")
NEW_TETS = (("a", "b", "x", "y"), ("a", "b", "y", "z"), ("a", "b", "x", "z"))


@dataclass
class PachnerMove:
    """A performed 2-3 move and its correspondence tables.

    ``labels_a`` / ``labels_b`` give the bipyramid label of each local vertex
    of the two source tetrahedra; ``new_labels[i]`` lists the labels of the
    local vertices ``0..3`` of the ``i``-th new tetrahedron, whose id is
    ``new_tets[i]``.  ``tet_map`` sends untouched old tetrahedra to new ids.
    """

    source: Triangulation
    target: Triangulation
    tet_a: int
    tet_b: int
    slot_a: int
    slot_b: int
    labels_a: dict
    labels_b: dict
    new_tets: tuple
    new_labels: tuple
    tet_map: dict
    edge_map: dict
    face_map: dict
    new_edge: int
    new_faces: tuple
    removed_face: int
    extras: dict = dc_field(default_factory=dict)

    def local(self, i, label):
        """Local vertex of the ``i``-th new tetrahedron carrying ``label``."""
        return self.new_labels[i].index(label)

    def summary(self):
        return {
            "source": self.source.summary(),
            "target": self.target.summary(),
            "tetrahedra": [self.tet_a, self.tet_b],
            "face": self.slot_a,
            "new_tetrahedra": list(self.new_tets),
            "new_edge": self.new_edge,
            "new_faces": list(self.new_faces),
            "edge_map": {str(k): v for k, v in sorted(self.edge_map.items())},
            "face_map": {str(k): v for k, v in sorted(self.face_map.items())},
        }


def _bipyramid_order(slot_a, slot_b):
    """Merged vertex order of the bipyramid as a sort key per label."""
    key = {lbl: (2 * i + 1, 0) for i, lbl in enumerate(EQUATOR)}
    key[APEX_A] = (2 * slot_a, 0)
    key[APEX_B] = (2 * slot_b, 1)
    return key


def two_three_move(tri, tet_a, tet_b=None, slot_a=None):
    """Perform the 2-3 move across face ``slot_a`` of ``tet_a``.

    ``tet_b`` is optional and, when given, must be the tetrahedron on the
    other side.  Returns a :class:`PachnerMove`.
    """
    if slot_a is None or not 0 <= slot_a < 4 or not 0 <= tet_a < tri.n:
        raise NotAdjacent(f"no face ({tet_a}, {slot_a})")
    partner_t, slot_b = tri.gluing[(tet_a, slot_a)]
    if tet_b is not None and partner_t != tet_b:
        raise NotAdjacent(
            f"face {slot_a} of tetrahedron {tet_a} is glued to tetrahedron {partner_t}, not {tet_b}"
        )
    tet_b = partner_t
    if tet_b == tet_a:
        raise NotAdjacent(f"face {slot_a} of tetrahedron {tet_a} is glued to the same tetrahedron")

    # bipyramid labels of local vertices
    fa = face_vertices(slot_a)
    mp = ordered_face_map(slot_a, slot_b)
    labels_a = {slot_a: APEX_A}
    labels_b = {slot_b: APEX_B}
    for lbl, v in zip(EQUATOR, fa):
        labels_a[v] = lbl
        labels_b[mp[v]] = lbl
    key = _bipyramid_order(slot_a, slot_b)
    new_labels = tuple(tuple(sorted(ls, key=key.__getitem__)) for ls in NEW_TETS)

    # tetrahedron ids: new ones take the places of A and B, the third goes last
    others = [t for t in range(tri.n) if t not in (tet_a, tet_b)]
    tet_map = {t: t for t in others}
    new_tets = (tet_a, tet_b, tri.n)
    n2 = tri.n + 1

    inv_a = {lbl: v for v, lbl in labels_a.items()}
    inv_b = {lbl: v for v, lbl in labels_b.items()}

    # old outer faces -> (new tet, slot)
    outer = {}
    for i, labels in enumerate(new_labels):
        for k in range(4):
            face = set(labels) - {labels[k]}
            if APEX_A in face and APEX_B in face:
                continue
            if APEX_A in face:
                missing = (set(EQUATOR) - face).pop()
                outer[(tet_a, inv_a[missing])] = (new_tets[i], k)
            else:
                missing = (set(EQUATOR) - face).pop()
                outer[(tet_b, inv_b[missing])] = (new_tets[i], k)

    def renamed(slot):
        t, k = slot
        if (t, k) in outer:
            return outer[(t, k)]
        return (tet_map[t], k)

    gluing = {}
    for (t, k), (t2, k2) in tri.gluing.items():
        if (t, k) in ((tet_a, slot_a), (tet_b, slot_b)):
            continue
        gluing[renamed((t, k))] = renamed((t2, k2))
    internal = {}
    for i, labels in enumerate(new_labels):
        for k in range(4):
            face = frozenset(set(labels) - {labels[k]})
            if APEX_A in face and APEX_B in face:
                internal.setdefault(face, []).append((new_tets[i], k))
    for face, pair in internal.items():
        p, q = pair
        gluing[p] = q
        gluing[q] = p

    try:
        target = Triangulation(n2, gluing, name=tri.name, params=tri.params)
    except NotOrdered as exc:
        raise OrderingObstruction(f"the bipyramid cannot be ordered consistently: {exc}") from exc

    def new_position(t, i, j):
        """New tetrahedron and local vertices of old edge ``[i, j]`` of ``t``."""
        if t not in (tet_a, tet_b):
            return tet_map[t], i, j
        labels = labels_a if t == tet_a else labels_b
        li, lj = labels[i], labels[j]
        for idx, nl in enumerate(new_labels):
            if li in nl and lj in nl:
                u, w = nl.index(li), nl.index(lj)
                return new_tets[idx], min(u, w), max(u, w)
        raise AssertionError("every old edge lies in a new tetrahedron")

    edge_map = {}
    for eid, members in enumerate(tri.edge_members):
        t, i, j = members[0]
        nt, u, w = new_position(t, i, j)
        edge_map[eid] = target.edge_class[(nt, u, w)]
    nl0 = new_labels[0]
    u, w = sorted((nl0.index(APEX_A), nl0.index(APEX_B)))
    new_edge = target.edge_class[(new_tets[0], u, w)]

    removed_face = tri.face_id(tet_a, slot_a)
    face_map = {}
    for fid, (s0, _) in enumerate(tri.face_sides):
        if fid == removed_face:
            continue
        face_map[fid] = target.face_id(*renamed(s0))
    new_faces = tuple(sorted({target.face_id(*pair[0]) for pair in internal.values()}))

    move = PachnerMove(
        source=tri, target=target, tet_a=tet_a, tet_b=tet_b, slot_a=slot_a, slot_b=slot_b,
        labels_a=labels_a, labels_b=labels_b, new_tets=new_tets, new_labels=new_labels,
        tet_map=tet_map, edge_map=edge_map, face_map=face_map, new_edge=new_edge,
        new_faces=new_faces, removed_face=removed_face,
        extras={"outer": outer},
    )
    if tri.face_weights is not None:
        move.target = target.with_decorations(face_weights=_transport_weights(move))
    return move


def _transport_weights(move):
    """Face weights of the target, with the new tetrahedra at the lift level of ``A``."""
    tri, target = move.source, move.target
    exps = lift_exponents(tri, tri.face_weights)
    # level(B) - level(A), read across the shared face
    shift = exps[(move.tet_a, move.slot_a)] - exps[(move.tet_b, move.slot_b)]
    new_exp = {}
    inverse_outer = {v: k for k, v in move.extras["outer"].items()}
    for t in range(target.n):
        for k in range(4):
            if (t, k) in inverse_outer:
                ot, ok = inverse_outer[(t, k)]
                e = exps[(ot, ok)]
                if ot == move.tet_b:
                    e += shift
            elif t in move.new_tets:
                e = 0
            else:
                e = exps[(t, k)]
            new_exp[(t, k)] = e
    return {fid: new_exp[s1] - new_exp[s0] for fid, (s0, s1) in enumerate(target.face_sides)}


# ---------------------------------------------------------------------------
# transport of Ptolemy and sigma data
# ---------------------------------------------------------------------------


def transport_sigma(move, sigma):
    """Sigma values on the target from sigma values on the source.

    Short edges outside the bipyramid keep their values.  Inside, each corner
    of the bipyramid is a disk on which the cocycle is a coboundary of a
    potential; the new short edges take quotients of that potential.  Points
    on the new edge get potential 1, a gauge choice that changes the
    deformed 1-loop invariant by an invertible scalar only.
    """
    tri, target = move.source, move.target
    tc_old, tc_new = truncate(tri), truncate(target)
    sample = next(iter(sigma.values()))
    one = sample / sample

    def s_old(t, v, a, b):
        sid, sign = tc_old.short_id(t, v, a, b)
        return sigma[sid] if sign > 0 else 1 / sigma[sid]

    inv = {
        move.tet_a: {lbl: v for v, lbl in move.labels_a.items()},
        move.tet_b: {lbl: v for v, lbl in move.labels_b.items()},
    }
    potential = {}
    for corner in (APEX_A, APEX_B) + EQUATOR:
        phi = {}
        sources = [t for t in (move.tet_a, move.tet_b) if corner in inv[t]]
        pending = True
        while pending:
            pending = False
            for t in sources:
                loc = inv[t]
                pts = [lbl for lbl in loc if lbl != corner]
                if not phi:
                    phi[pts[0]] = one
                known = [p for p in pts if p in phi]
                if not known:
                    pending = True
                    continue
                base = known[0]
                for p in pts:
                    if p not in phi:
                        phi[p] = phi[base] * s_old(t, loc[corner], loc[base], loc[p])
        for lbl in (APEX_A, APEX_B) + EQUATOR:
            if lbl != corner and lbl not in phi:
                phi[lbl] = one
        potential[corner] = phi

    values = {}
    for sid, members in enumerate(tc_new.short_members):
        t, v, a, b = members[0]
        for inst in members:
            if inst[0] not in move.new_tets:
                t, v, a, b = inst
                break
        if t in move.new_tets:
            labels = move.new_labels[move.new_tets.index(t)]
            phi = potential[labels[v]]
            values[sid] = phi[labels[b]] / phi[labels[a]]
        else:
            old_t = next(o for o, n in move.tet_map.items() if n == t)
            values[sid] = s_old(old_t, v, a, b)
    return values


def transport_ptolemy(move, c, sigma=None, new_sigma=None, field=None):
    """Edge values on the target; the new edge is solved from one new tetrahedron.

    Without ``sigma`` this is ``c_ab = (c_ax c_by - c_ay c_bx) / c_xy`` up to
    the signs of the merged order.  With ``sigma`` the deformed relation is
    used and ``new_sigma`` (default: :func:`transport_sigma`) supplies the
    target cocycle.  All three new relations are verified afterwards.
    """
    target = move.target
    new_c = {move.edge_map[e]: v for e, v in c.items()}
    if sigma is not None and new_sigma is None:
        new_sigma = transport_sigma(move, sigma)
    i0 = 0
    t0 = move.new_tets[i0]
    labels = move.new_labels[i0]
    ua, ub = labels.index(APEX_A), labels.index(APEX_B)
    lo, hi = min(ua, ub), max(ua, ub)
    tc = truncate(target)

    def s(v, a, b):
        if new_sigma is None:
            return 1
        sid, sign = tc.short_id(t0, v, a, b)
        return new_sigma[sid] if sign > 0 else 1 / new_sigma[sid]

    def cv_with(x):
        cv = {}
        for i, j in combinations(range(4), 2):
            if (i, j) == (lo, hi):
                cv[(i, j)] = x
            else:
                eid, sign = target.edge_id(t0, i, j)
                cv[(i, j)] = new_c[eid] if sign > 0 else -new_c[eid]
        return cv

    # the relation is affine in the unknown: body(x) = p + q x
    p, _ = even_equation_terms(cv_with(0), s)
    p1, _ = even_equation_terms(cv_with(1), s)
    q = p1 - p
    if (field.is_zero(q) if field is not None else q == 0):
        raise DegenerateTransport("the new edge value is not determined: opposite edge value vanishes")
    new_c[move.new_edge] = -p / q
    if new_sigma is None:
        res = ptolemy_residuals(target, new_c)
    else:
        res = deformed_ptolemy_residuals(target, new_c, new_sigma, tc)
    for t in move.new_tets:
        r = res[t]
        if not (field.is_zero(r) if field is not None else r == 0):
            raise ResidualNonzero(f"transported values fail the relation of new tetrahedron {t}")
    return new_c


# ---------------------------------------------------------------------------
# invariance
# ---------------------------------------------------------------------------


@dataclass
class InvarianceReport:
    equal: bool
    before: object
    after: object
    up_to_scalar: bool
    move: PachnerMove

    def to_json(self):
        return {
            "equal": self.equal,
            "mode": "up to scalar" if self.up_to_scalar else "exact",
            "before": self.before.to_json(),
            "after": self.after.to_json(),
            "move": self.move.summary(),
        }


def pachner_invariance_check(tri, c, *, tet=None, slot=None, sigma=None, field=None,
                             choice=None, tolerance=None):
    """Normalized 1-loop polynomial before and after one 2-3 move.

    The first face joining two distinct tetrahedra is used unless ``tet``
    and ``slot`` are given.  With ``sigma`` the comparison is up to an
    invertible scalar.
    """
    if field is None:
        raise ValidationError("pachner_invariance_check needs a field")
    if tri.face_weights is None:
        raise ValidationError("pachner_invariance_check needs face weights")
    if tet is None:
        tet, slot = next(
            ((t, k) for (t, k), (t2, _) in sorted(tri.gluing.items()) if t2 != t), (None, None)
        )
        if tet is None:
            raise NotAdjacent("no face joins two distinct tetrahedra")
    move = two_three_move(tri, tet, None, slot)
    c = {k: field(v) for k, v in c.items()}
    sig = {k: field(v) for k, v in sigma.items()} if sigma is not None else None
    new_sigma = transport_sigma(move, sig) if sig is not None else None
    new_c = transport_ptolemy(move, c, sig, new_sigma, field)
    before = one_loop_polynomial(tri, c, choice, sigma=sig, field=field)
    after = one_loop_polynomial(move.target, new_c, EdgeChoice.uniform(move.target.n),
                                sigma=new_sigma, field=field)
    if sig is None:
        if getattr(field, "exact", True):
            equal = before == after
        else:
            tol = tolerance or field.tolerance
            keys = set(before.coeffs) | set(after.coeffs)
            equal = all(field.magnitude(before[k] - after[k]) <= tol for k in keys)
        return InvarianceReport(equal, before, after, False, move)
    tol = None if getattr(field, "exact", True) else (tolerance or field.tolerance)
    return InvarianceReport(polys_equal_up_to_scalar(before, after, tol), before, after, True, move)
