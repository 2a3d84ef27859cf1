"""Ordered ideal triangulations: parsing, validation and truncation.

Conventions
-----------
* Tetrahedron vertices are ``0..3``; face slot ``k`` is the face opposite
  vertex ``k``.  A gluing ``(t, k) -> (t', k')`` identifies the two faces
  by the order-preserving bijection of their vertex sets.
* Edge, face and short-edge classes get integer ids in discovery order:
  tetrahedra in increasing order, then edges ``(i, j)`` / slots ``k`` /
  short edges ``(v, a, b)`` lexicographically.
* The short edge ``e^v_{ab}`` (stored with ``a < b``) lies in the corner
  triangle at vertex ``v`` and runs from the point on edge ``[v, a]`` to the
  point on edge ``[v, b]``.
* Side 0 of a face class is its lexicographically smaller ``(tet, slot)``
  embedding; crossing from side 0 to side 1 picks up ``+w(f)``.

File format (``#`` starts a comment)::

    tetrahedra <N>
    glue <t> <k> -> <t'> <k'> [<p0p1p2p3>]
    faceweight <face-id> <integer>
    param <name> <scalar-literal>
    sigma <short-edge-id> <monomial>          e.g.  l^-1*m^-2
    dualloop <name> <signed face ids>          e.g.  +3 -1
    path <name> <signed cells>                 e.g.  s4 -s7 l0
    c <edge-id> <scalar-literal>
    theta <face-id> <grassmann-literal>

The optional permutation after a gluing lists the images of vertices
``0, 1, 2, 3``; when present it must agree with the order-preserving map.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations

from .errors import (
    GluingNotInvolutive,
    NotClosed,
    NotManifold,
    NotOrdered,
    SlotOutOfRange,
    TriangulationSyntaxError,
    ValidationError,
)
from .scalars import parse_exact

__all__ = [
    "EDGES",
    "Triangulation",
    "TruncatedComplex",
    "SigmaMonomial",
    "parse_triangulation",
    "render_triangulation",
    "truncate",
    "lift_exponents",
    "evaluate_class_on_loop",
    "edge_cycle_weights",
    "face_vertices",
    "ordered_face_map",
]

EDGES = tuple(combinations(range(4), 2))


def face_vertices(k):
    """Vertices of face slot ``k`` in increasing order."""
    return tuple(v for v in range(4) if v != k)


def ordered_face_map(k, k2):
    """The order-preserving vertex map from face ``k`` to face ``k2``, as a 4-tuple."""
    perm = [None] * 4
    for a, b in zip(face_vertices(k), face_vertices(k2)):
        perm[a] = b
    perm[k] = k2
    return tuple(perm)


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass(frozen=True)
class SigmaMonomial:
    """``coefficient * prod(param**exponent)``; coefficient is a scalar literal."""

    coefficient: str = "1"
    exponents: tuple = ()

    @classmethod
    def parse(cls, text):
        coef = []
        exps = {}
        for factor in text.replace(" ", "").split("*"):
            if not factor:
                raise ValueError(f"bad monomial {text!r}")
            m = re.fullmatch(r"([A-Za-z_]\w*)(?:\^(-?\d+))?", factor)
            if m and not factor.startswith("sqrt"):
                name = m.group(1)
                exps[name] = exps.get(name, 0) + int(m.group(2) or 1)
            else:
                coef.append(factor)
        exponents = tuple(sorted((k, v) for k, v in exps.items() if v))
        coefficient = "*".join(coef) if coef else "1"
        parse_exact(coefficient)
        return cls(coefficient, exponents)

    def render(self):
        parts = [] if self.coefficient == "1" and self.exponents else [self.coefficient]
        for name, e in self.exponents:
            parts.append(name if e == 1 else f"{name}^{e}")
        return "*".join(parts)

    def evaluate(self, field, params):
        value = field.parse(self.coefficient)
        for name, e in self.exponents:
            if name not in params:
                raise ValidationError(f"parameter {name!r} has no value")
            p = params[name]
            value = value * (p**e if e > 0 else field.inverse(p) ** (-e))
        return value

    def inverse(self):
        p, q, d = parse_exact(self.coefficient)
        # 1/(p + q sqrt d) = (p - q sqrt d)/(p^2 - q^2 d)
        norm = p * p - q * q * d
        if norm == 0:
            raise ValueError(f"coefficient {self.coefficient!r} is not invertible")
        p, q = p / norm, -q / norm
        coef = str(p)
        if q:
            coef += f"{'-' if q < 0 else '+'}{abs(q)}*sqrt({d})"
        return SigmaMonomial(coef, tuple((k, -v) for k, v in self.exponents))


class Triangulation:
    """A validated ordered ideal triangulation with optional decorations.

    ``gluing`` maps every ``(tet, slot)`` to ``(tet', slot')``.  Decorations
    (face weights, sigma monomials, dual loops, paths, parameters and an
    assignment) are kept as parsed text-level data.
    """

    def __init__(self, n, gluing, perms=None, *, face_weights=None, sigma=None,
                 dual_loops=None, paths=None, params=None, c_values=None,
                 theta_values=None, name=None):
        self.n = int(n)
        if self.n < 1:
            raise ValidationError("a triangulation needs at least one tetrahedron")
        self.gluing = dict(gluing)
        self._validate(perms or {})
        self._derive()
        self.face_weights = dict(face_weights) if face_weights is not None else None
        self.sigma = dict(sigma or {})
        self.dual_loops = dict(dual_loops or {})
        self.paths = dict(paths or {})
        self.params = dict(params or {})
        self.c_values = dict(c_values or {})
        self.theta_values = dict(theta_values or {})
        self.name = name
        self._check_decorations()

    # validation -----------------------------------------------------------

    def _validate(self, perms):
        n = self.n
        for (t, k), (t2, k2) in self.gluing.items():
            for tt, kk in ((t, k), (t2, k2)):
                if not (0 <= tt < n) or not (0 <= kk < 4):
                    raise SlotOutOfRange(f"slot ({tt}, {kk}) outside {n} tetrahedra x 4 faces")
        for t in range(n):
            for k in range(4):
                if (t, k) not in self.gluing:
                    raise GluingNotInvolutive(f"face slot ({t}, {k}) is unglued")
                t2, k2 = self.gluing[(t, k)]
                if (t2, k2) == (t, k):
                    raise GluingNotInvolutive(f"face slot ({t}, {k}) is glued to itself")
                if self.gluing.get((t2, k2)) != (t, k):
                    raise GluingNotInvolutive(
                        f"({t}, {k}) -> ({t2}, {k2}) but ({t2}, {k2}) -> {self.gluing.get((t2, k2))}"
                    )
        for (t, k), perm in perms.items():
            t2, k2 = self.gluing[(t, k)]
            if sorted(perm) != [0, 1, 2, 3] or perm[k] != k2:
                raise NotOrdered(f"gluing ({t}, {k}) has an invalid vertex permutation {perm}")
            if tuple(perm) != ordered_face_map(k, k2):
                raise NotOrdered(
                    f"gluing ({t}, {k}) -> ({t2}, {k2}) with vertex map {perm} is not order-preserving"
                )

    def face_map(self, t, k):
        """Vertex map (4-tuple) of the gluing at ``(t, k)`` into its partner."""
        t2, k2 = self.gluing[(t, k)]
        return ordered_face_map(k, k2)

    def _derive(self):
        n = self.n
        # faces
        self.face_class = {}
        self.face_sides = []
        for t in range(n):
            for k in range(4):
                if (t, k) in self.face_class:
                    continue
                other = self.gluing[(t, k)]
                fid = len(self.face_sides)
                self.face_class[(t, k)] = fid
                self.face_class[other] = fid
                self.face_sides.append(((t, k), other))
        # edges
        uf = _UnionFind()
        for t in range(n):
            for e in EDGES:
                uf.find((t,) + e)
        for (t, k), (t2, k2) in self.gluing.items():
            mp = ordered_face_map(k, k2)
            for i, j in combinations(face_vertices(k), 2):
                uf.union((t, i, j), (t2, mp[i], mp[j]))
        self.edge_class = {}
        self.edge_members = []
        root_id = {}
        for t in range(n):
            for i, j in EDGES:
                r = uf.find((t, i, j))
                if r not in root_id:
                    root_id[r] = len(self.edge_members)
                    self.edge_members.append([])
                eid = root_id[r]
                self.edge_class[(t, i, j)] = eid
                self.edge_members[eid].append((t, i, j))
        # ideal vertices
        uv = _UnionFind()
        for t in range(n):
            for v in range(4):
                uv.find((t, v))
        for (t, k), (t2, k2) in self.gluing.items():
            mp = ordered_face_map(k, k2)
            for v in face_vertices(k):
                uv.union((t, v), (t2, mp[v]))
        self.cusp_class = {}
        roots = {}
        for t in range(n):
            for v in range(4):
                r = uv.find((t, v))
                self.cusp_class[(t, v)] = roots.setdefault(r, len(roots))
        self.num_cusps = len(roots)
        if self.num_cusps == 1 and len(self.edge_members) != n:
            raise NotManifold(
                f"{len(self.edge_members)} edge classes for {n} tetrahedra with one cusp"
            )

    def _check_decorations(self):
        nf = self.num_faces
        if self.face_weights is not None:
            for fid in self.face_weights:
                if not 0 <= fid < nf:
                    raise SlotOutOfRange(f"face weight for unknown face class {fid}")
        for sid in self.sigma:
            if not 0 <= sid < 6 * self.n:
                raise SlotOutOfRange(f"sigma value for unknown short-edge class {sid}")
        for eid in self.c_values:
            if not 0 <= eid < self.num_edges:
                raise SlotOutOfRange(f"c value for unknown edge class {eid}")
        for fid in self.theta_values:
            if not 0 <= fid < nf:
                raise SlotOutOfRange(f"theta value for unknown face class {fid}")
        for name, loop in self.dual_loops.items():
            for fid, _ in loop:
                if not 0 <= fid < nf:
                    raise SlotOutOfRange(f"dual loop {name!r} crosses unknown face class {fid}")

    # derived data -----------------------------------------------------------

    @property
    def num_edges(self):
        return len(self.edge_members)

    @property
    def num_faces(self):
        return len(self.face_sides)

    def edge_id(self, t, i, j):
        """Edge class of ``[i, j]`` in tetrahedron ``t`` and the orientation sign."""
        if i < j:
            return self.edge_class[(t, i, j)], 1
        return self.edge_class[(t, j, i)], -1

    def face_id(self, t, k):
        return self.face_class[(t, k)]

    def face_side(self, t, k):
        """0 or 1: which embedding of its face class ``(t, k)`` is."""
        return self.face_sides[self.face_class[(t, k)]].index((t, k))

    def with_decorations(self, **changes):
        """Copy with some decorations replaced."""
        kw = dict(
            face_weights=self.face_weights, sigma=self.sigma, dual_loops=self.dual_loops,
            paths=self.paths, params=self.params, c_values=self.c_values,
            theta_values=self.theta_values, name=self.name,
        )
        kw.update(changes)
        return Triangulation(self.n, self.gluing, **kw)

    def key(self):
        return (
            self.n,
            tuple(sorted(self.gluing.items())),
            None if self.face_weights is None else tuple(sorted(self.face_weights.items())),
            tuple(sorted(self.sigma.items())),
            tuple(sorted(self.dual_loops.items())),
            tuple(sorted(self.paths.items())),
            tuple(sorted(self.params.items())),
            tuple(sorted(self.c_values.items())),
            tuple(sorted(self.theta_values.items())),
        )

    def __eq__(self, other):
        return isinstance(other, Triangulation) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def summary(self):
        return (
            f"{self.n} tetrahedra, {self.num_edges} edge classes, "
            f"{self.num_faces} face classes, {6 * self.n} short-edge classes"
        )

    def class_tables(self):
        """JSON-ready description of all class ids."""
        tc = truncate(self)
        return {
            "tetrahedra": self.n,
            "cusps": self.num_cusps,
            "edges": [
                {"id": i, "members": [f"{t}:[{a},{b}]" for t, a, b in mem]}
                for i, mem in enumerate(self.edge_members)
            ],
            "faces": [
                {"id": i, "sides": [f"{t}:{k}" for t, k in sides]}
                for i, sides in enumerate(self.face_sides)
            ],
            "short_edges": [
                {"id": i, "members": [f"{t}:e^{v}_{a}{b}" for t, v, a, b in mem]}
                for i, mem in enumerate(tc.short_members)
            ],
        }

    def __repr__(self):
        return f"<Triangulation {self.summary()}>"


# ---------------------------------------------------------------------------
# parsing and rendering
# ---------------------------------------------------------------------------


def _tokens(line):
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _int(tok, lineno):
    text, col = tok
    try:
        return int(text)
    except ValueError:
        raise TriangulationSyntaxError(f"expected an integer, got {text!r}", lineno, col) from None


def parse_triangulation(text, name=None):
    """Parse and validate a triangulation file."""
    n = None
    raw = {}
    perms = {}
    weights = None
    sigma, loops, paths, params, cvals, thetas = {}, {}, {}, {}, {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        toks = _tokens(body)
        if not toks:
            continue
        kw, col = toks[0]
        if n is None:
            if kw != "tetrahedra" or len(toks) != 2:
                raise TriangulationSyntaxError("the first line must be 'tetrahedra <N>'", lineno, col)
            n = _int(toks[1], lineno)
            if n < 1:
                raise TriangulationSyntaxError("need at least one tetrahedron", lineno, toks[1][1])
            continue
        if kw == "glue":
            if len(toks) not in (6, 7) or toks[3][0] != "->":
                raise TriangulationSyntaxError("expected 'glue <t> <k> -> <t'> <k'> [perm]'", lineno, col)
            t, k, t2, k2 = (_int(toks[i], lineno) for i in (1, 2, 4, 5))
            for tt, kk in ((t, k), (t2, k2)):
                if not (0 <= tt < n and 0 <= kk < 4):
                    raise SlotOutOfRange(f"line {lineno}: slot ({tt}, {kk}) out of range")
            for a, b in (((t, k), (t2, k2)), ((t2, k2), (t, k))):
                if raw.get(a, b) != b:
                    raise GluingNotInvolutive(f"line {lineno}: slot {a} glued twice")
                raw[a] = b
            if len(toks) == 7:
                ptxt, pcol = toks[6]
                if not re.fullmatch(r"[0-3]{4}", ptxt):
                    raise TriangulationSyntaxError("permutation must be 4 digits 0-3", lineno, pcol)
                perm = tuple(int(ch) for ch in ptxt)
                perms[(t, k)] = perm
                if sorted(perm) == [0, 1, 2, 3]:
                    inv = [0] * 4
                    for i, p in enumerate(perm):
                        inv[p] = i
                    perms.setdefault((t2, k2), tuple(inv))
        elif kw == "faceweight":
            if len(toks) != 3:
                raise TriangulationSyntaxError("expected 'faceweight <id> <int>'", lineno, col)
            weights = weights or {}
            weights[_int(toks[1], lineno)] = _int(toks[2], lineno)
        elif kw == "sigma":
            if len(toks) != 3:
                raise TriangulationSyntaxError("expected 'sigma <id> <monomial>'", lineno, col)
            try:
                sigma[_int(toks[1], lineno)] = SigmaMonomial.parse(toks[2][0])
            except ValueError as exc:
                raise TriangulationSyntaxError(str(exc), lineno, toks[2][1]) from None
        elif kw == "param":
            if len(toks) != 3 or not re.fullmatch(r"[A-Za-z_]\w*", toks[1][0]):
                raise TriangulationSyntaxError("expected 'param <name> <literal>'", lineno, col)
            params[toks[1][0]] = toks[2][0]
        elif kw == "dualloop":
            if len(toks) < 2:
                raise TriangulationSyntaxError("expected 'dualloop <name> <crossings>'", lineno, col)
            loop = []
            for text_, c in toks[2:]:
                m = re.fullmatch(r"([+-])(\d+)", text_)
                if not m:
                    raise TriangulationSyntaxError(f"bad crossing {text_!r}; use +id or -id", lineno, c)
                loop.append((int(m.group(2)), 1 if m.group(1) == "+" else -1))
            loops[toks[1][0]] = tuple(loop)
        elif kw == "path":
            if len(toks) < 2:
                raise TriangulationSyntaxError("expected 'path <name> <cells>'", lineno, col)
            items = []
            for text_, c in toks[2:]:
                m = re.fullmatch(r"(-?)([sl])(\d+)", text_)
                if not m:
                    raise TriangulationSyntaxError(f"bad path cell {text_!r}", lineno, c)
                items.append((m.group(2), int(m.group(3)), -1 if m.group(1) else 1))
            paths[toks[1][0]] = tuple(items)
        elif kw == "c":
            if len(toks) != 3:
                raise TriangulationSyntaxError("expected 'c <edge-id> <literal>'", lineno, col)
            cvals[_int(toks[1], lineno)] = toks[2][0]
        elif kw == "theta":
            if len(toks) < 3:
                raise TriangulationSyntaxError("expected 'theta <face-id> <literal>'", lineno, col)
            thetas[_int(toks[1], lineno)] = "".join(t for t, _ in toks[2:])
        elif kw == "tetrahedra":
            raise TriangulationSyntaxError("'tetrahedra' given twice", lineno, col)
        else:
            raise TriangulationSyntaxError(f"unknown keyword {kw!r}", lineno, col)
    if n is None:
        raise TriangulationSyntaxError("empty triangulation file", 1, 1)
    return Triangulation(
        n, raw, perms, face_weights=weights, sigma=sigma, dual_loops=loops, paths=paths,
        params=params, c_values=cvals, theta_values=thetas, name=name,
    )


def parse_assignment(text, tri=None):
    """Parse ``param``/``c``/``theta`` lines of a standalone assignment file.

    Returns ``(params, c_values, theta_values)`` as text-level dictionaries.
    """
    params, cvals, thetas = {}, {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _tokens(line.split("#", 1)[0])
        if not toks:
            continue
        kw, col = toks[0]
        if kw == "param" and len(toks) == 3:
            params[toks[1][0]] = toks[2][0]
        elif kw == "c" and len(toks) == 3:
            cvals[_int(toks[1], lineno)] = toks[2][0]
        elif kw == "theta" and len(toks) >= 3:
            thetas[_int(toks[1], lineno)] = "".join(t for t, _ in toks[2:])
        else:
            raise TriangulationSyntaxError(f"unexpected assignment line {line.strip()!r}", lineno, col)
    if tri is not None:
        tri.with_decorations(params=params, c_values=cvals, theta_values=thetas)
    return params, cvals, thetas


def render_triangulation(tri):
    """Canonical text form; ``parse_triangulation`` inverts it."""
    out = [f"tetrahedra {tri.n}"]
    for (t, k), (t2, k2) in sorted(tri.gluing.items()):
        if (t, k) < (t2, k2):
            out.append(f"glue {t} {k} -> {t2} {k2}")
    for name, value in sorted(tri.params.items()):
        out.append(f"param {name} {value}")
    if tri.face_weights is not None:
        for fid, w in sorted(tri.face_weights.items()):
            out.append(f"faceweight {fid} {w}")
    for sid, mono in sorted(tri.sigma.items()):
        out.append(f"sigma {sid} {mono.render()}")
    for name, loop in sorted(tri.dual_loops.items()):
        cross = " ".join(f"{'+' if s > 0 else '-'}{fid}" for fid, s in loop)
        out.append(f"dualloop {name} {cross}".rstrip())
    for name, items in sorted(tri.paths.items()):
        cells = " ".join(f"{'-' if s < 0 else ''}{kind}{i}" for kind, i, s in items)
        out.append(f"path {name} {cells}".rstrip())
    for eid, value in sorted(tri.c_values.items()):
        out.append(f"c {eid} {value}")
    for fid, value in sorted(tri.theta_values.items()):
        out.append(f"theta {fid} {value}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------


@dataclass
class TruncatedComplex:
    """Cells of the truncated triangulation.

    ``short_instances`` are ``(t, v, a, b)`` with ``a < b``; a boundary word
    entry is ``(kind, cell, sign)`` with ``kind`` ``'s'`` (short instance)
    or ``'l'`` (long instance ``(t, i, j)``, ``i < j``) and ``sign`` -1 for
    reversed traversal.
    """

    triangulation: Triangulation
    short_instances: list = field(default_factory=list)
    short_class: dict = field(default_factory=dict)
    short_members: list = field(default_factory=list)
    hexagons: list = field(default_factory=list)
    triangles: list = field(default_factory=list)
    point_class: dict = field(default_factory=dict)

    @property
    def num_short_classes(self):
        return len(self.short_members)

    def short_id(self, t, v, a, b):
        """Class id and orientation sign of ``e^v_{ab}`` in tetrahedron ``t``."""
        if a < b:
            return self.short_class[(t, v, a, b)], 1
        return self.short_class[(t, v, b, a)], -1

    def short_endpoints(self, sid):
        t, v, a, b = self.short_members[sid][0]
        return self.point_class[(t, v, a)], self.point_class[(t, v, b)]

    def long_endpoints(self, eid):
        t, i, j = self.triangulation.edge_members[eid][0]
        return self.point_class[(t, i, j)], self.point_class[(t, j, i)]

    def short_cusp(self, sid):
        t, v, _, _ = self.short_members[sid][0]
        return self.triangulation.cusp_class[(t, v)]


def truncate(tri):
    tc = TruncatedComplex(tri)
    uf = _UnionFind()
    for t in range(tri.n):
        for v in range(4):
            others = face_vertices(v)
            for a, b in combinations(others, 2):
                tc.short_instances.append((t, v, a, b))
                uf.find((t, v, a, b))
    for (t, k), (t2, k2) in tri.gluing.items():
        mp = ordered_face_map(k, k2)
        for v in face_vertices(k):
            a, b = [x for x in face_vertices(k) if x != v]
            uf.union((t, v, a, b), (t2, mp[v], mp[a], mp[b]))
    roots = {}
    for inst in tc.short_instances:
        r = uf.find(inst)
        if r not in roots:
            roots[r] = len(tc.short_members)
            tc.short_members.append([])
        sid = roots[r]
        tc.short_class[inst] = sid
        tc.short_members[sid].append(inst)
    # points of the truncated complex: (t, v, a) near v on edge [v, a]
    up = _UnionFind()
    for t in range(tri.n):
        for v in range(4):
            for a in face_vertices(v):
                up.find((t, v, a))
    for (t, k), (t2, k2) in tri.gluing.items():
        mp = ordered_face_map(k, k2)
        for v in face_vertices(k):
            for a in face_vertices(k):
                if a != v:
                    up.union((t, v, a), (t2, mp[v], mp[a]))
    proots = {}
    for t in range(tri.n):
        for v in range(4):
            for a in face_vertices(v):
                r = up.find((t, v, a))
                tc.point_class[(t, v, a)] = proots.setdefault(r, len(proots))
    # hexagons, read on side 0 of every face class
    for (t, k), _ in tri.face_sides:
        x, y, z = face_vertices(k)
        tc.hexagons.append([
            ("s", (t, x, y, z), -1),
            ("l", (t, x, y), 1),
            ("s", (t, y, x, z), 1),
            ("l", (t, y, z), 1),
            ("s", (t, z, x, y), -1),
            ("l", (t, x, z), -1),
        ])
    # corner triangles: e^v_{jk} e^v_{kl} = e^v_{jl}
    for t in range(tri.n):
        for v in range(4):
            j, k, l = face_vertices(v)
            tc.triangles.append([("s", (t, v, j, k), 1), ("s", (t, v, k, l), 1), ("s", (t, v, j, l), -1)])
    return tc


# ---------------------------------------------------------------------------
# face weights
# ---------------------------------------------------------------------------


def lift_exponents(tri, weights):
    """Per ``(tet, slot)`` exponent: 0 on side 0 and ``w(f)`` on side 1."""
    out = {}
    for fid, (s0, s1) in enumerate(tri.face_sides):
        w = weights.get(fid, 0) if weights else 0
        out[s0] = 0
        out[s1] = w
    return out


def evaluate_class_on_loop(tri, weights, loop):
    """Signed weight sum of a closed dual loop given as ``[(face_id, sign), ...]``.

    ``sign = +1`` crosses from side 0 to side 1.
    """
    if not loop:
        return 0
    total = 0
    position = None
    start = None
    for fid, sign in loop:
        if not 0 <= fid < tri.num_faces:
            raise NotClosed(f"unknown face class {fid}")
        s0, s1 = tri.face_sides[fid]
        src, dst = (s0[0], s1[0]) if sign > 0 else (s1[0], s0[0])
        if position is None:
            start = src
        elif position != src:
            raise NotClosed(f"crossing {sign:+d}{fid} starts in tetrahedron {src}, path is in {position}")
        position = dst
        total += sign * (weights.get(fid, 0) if weights else 0)
    if position != start:
        raise NotClosed(f"dual loop ends in tetrahedron {position}, started in {start}")
    return total


def edge_cycle_weights(tri, weights):
    """Weight sum of the dual loop around every edge class.

    ``weights`` descends to the manifold exactly when all sums vanish.
    """
    sums = []
    for eid, members in enumerate(tri.edge_members):
        t, i, j = members[0]
        k, l = [x for x in range(4) if x not in (i, j)]
        total = 0
        cur = (t, i, j, l)  # exit through the face opposite l next
        steps = 0
        while True:
            t, i, j, opp = cur
            slot = opp
            side = tri.face_side(t, slot)
            fid = tri.face_id(t, slot)
            total += (weights.get(fid, 0) if weights else 0) * (1 if side == 0 else -1)
            t2, k2 = tri.gluing[(t, slot)]
            mp = ordered_face_map(slot, k2)
            i2, j2 = mp[i], mp[j]
            nxt_opp = [x for x in range(4) if x not in (i2, j2, k2)][0]
            cur = (t2, i2, j2, nxt_opp)
            steps += 1
            if cur == (members[0][0], members[0][1], members[0][2], l) or steps > 12 * tri.n:
                break
        sums.append(total)
    return sums
