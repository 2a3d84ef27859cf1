"""Command-line front end.

Every command builds one JSON-ready record; ``--format text`` prints the
same record as ``key: value`` lines.  Exit codes: 0 success, 1 invalid
input, 2 numeric failure, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from importlib.resources import files

from . import __version__
from .errors import NumericError, SuperPtolemyError, ValidationError
from .grassmann import GrassmannAlgebra
from .oneloop import EdgeChoice, build_face_matrix, face_matrix_kernel, lift_to_super
from .osp21 import SuperVector, act, identity, is_osp, osp_inverse, pair2, pair3, random_osp
from .pachner import pachner_invariance_check
from .ptolemy import (
    deformed_ptolemy_residuals,
    natural_cocycle,
    path_holonomy,
    sigma_from_triangulation,
    sigma_residuals,
    solve_ptolemy,
    track_ptolemy,
    verify_cocycle,
)
from .scalars import ComplexField, QuadraticField, field_from_selector, normalize_poly
from .triangulation import parse_assignment, parse_triangulation, truncate

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 3
FIELD_ENV = "SUPERPTOLEMY_FIELD"
DEFAULT_FIELD = "quadratic:-3"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


def _read(path):
    if path.startswith("fixture:"):
        name = path.split(":", 1)[1]
        data = files("superptolemy").joinpath("data")
        for candidate in (name, name + ".tri"):
            entry = data.joinpath(candidate)
            if entry.is_file():
                return entry.read_text(encoding="utf-8")
        raise ValidationError(f"unknown fixture {name!r}")
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def _field(args):
    selector = args.field or os.environ.get(FIELD_ENV) or DEFAULT_FIELD
    try:
        field = field_from_selector(selector)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if isinstance(field, ComplexField) and args.tolerance is not None:
        field = ComplexField(field.bits, args.tolerance)
    return field, selector


def _load(args, field):
    """Triangulation, params, edge values and theta texts after overrides."""
    tri = parse_triangulation(_read(args.file), name=args.file)
    params = dict(tri.params)
    cvals = dict(tri.c_values)
    thetas = dict(tri.theta_values)
    if getattr(args, "assignment", None):
        p, c, th = parse_assignment(_read(args.assignment), tri)
        params.update(p)
        cvals.update(c)
        thetas.update(th)
    for item in getattr(args, "param", None) or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects name=value, got {item!r}")
        params[name] = value
    params = {k: field.parse(v) if isinstance(v, str) else field(v) for k, v in params.items()}
    c = {int(k): field.parse(v) if isinstance(v, str) else field(v) for k, v in cvals.items()}
    return tri, params, c, thetas


def _deformed(args, tri):
    if getattr(args, "plain", False):
        return False
    if getattr(args, "deformed", False):
        if not tri.sigma:
            raise ValidationError("--deformed needs sigma lines in the triangulation file")
        return True
    return bool(tri.sigma)


def _sigma(tri, field, params, deformed):
    return sigma_from_triangulation(tri, field, params) if deformed else None


def _choice(args, tri):
    text = getattr(args, "edge_choice", None) or "auto"
    if text == "auto":
        return EdgeChoice.uniform(tri.n)
    return EdgeChoice.parse(text, tri.n)


def _solve(args, tri, field, params, c, deformed):
    """Numeric solution, following the stored solution when parameters moved."""
    if not isinstance(field, ComplexField):
        raise UsageError("--solve needs a floating field such as complex:256")
    free = list(getattr(args, "free", None) or [])
    start_params = {k: field.parse(v) for k, v in tri.params.items()}
    for name in free:
        params.setdefault(name, start_params.get(name, field.one))
    guess = {e: c.get(e, field.one) for e in range(tri.num_edges)}
    builder = (lambda p: sigma_from_triangulation(tri, field, p)) if deformed else (lambda p: None)
    fixed = {k: v for k, v in params.items() if k not in free}
    start_ok = False
    if tri.c_values and start_params:
        start_c = {e: field.parse(v) for e, v in tri.c_values.items()}
        res = deformed_ptolemy_residuals(tri, start_c, builder(start_params))
        start_ok = max(abs(r) for r in res) < field.tolerance
    moved = [k for k, v in fixed.items() if k in start_params and abs(v - start_params[k]) > field.tolerance]
    if start_ok and moved:
        result = None
        cur_c, cur_p = start_c, dict(start_params)
        for name in sorted(moved):
            result = track_ptolemy(tri, field, cur_c, cur_p, name, fixed[name], free_params=tuple(free))
            cur_c, cur_p = result.c, result.params
        return result
    return solve_ptolemy(tri, field, guess, params=fixed,
                         free_params={k: params[k] for k in free}, sigma_builder=builder)


def _residual_norm(values, field):
    return max((field.magnitude(v) for v in values), default=0)


def _render_norm(field, x):
    if field.exact:
        return "0" if x == 0 else str(float(x))
    return field.ctx.nstr(x, 5)


def _record_params(field, params):
    return {k: field.render(v) for k, v in sorted(params.items())}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_validate(args):
    tri = parse_triangulation(_read(args.file), name=args.file)
    record = {"command": "validate", "valid": True, "summary": tri.summary()}
    record.update(tri.class_tables())
    return record


def _prepare(args):
    field, selector = _field(args)
    tri, params, c, thetas = _load(args, field)
    deformed = _deformed(args, tri)
    solve_info = None
    if getattr(args, "solve", False):
        result = _solve(args, tri, field, params, c, deformed)
        c, params = result.c, result.params
        solve_info = {"iterations": result.iterations, "residual": _render_norm(field, result.residual_norm)}
    if len(c) != tri.num_edges:
        raise ValidationError("edge values missing; give c lines or use --solve")
    sigma = _sigma(tri, field, params, deformed)
    return field, selector, tri, params, c, thetas, sigma, deformed, solve_info


def cmd_oneloop(args):
    field, selector, tri, params, c, _, sigma, deformed, solve_info = _prepare(args)
    choice = _choice(args, tri)
    tc = truncate(tri)
    residuals = deformed_ptolemy_residuals(tri, c, sigma, tc)
    fm = build_face_matrix(tri, c, choice, sigma=sigma, field=field, tc=tc)
    delta = fm.determinant() * fm.prefactor()
    record = {
        "command": "oneloop",
        "field": selector,
        "mode": "deformed" if deformed else "plain",
        "edge_choice": [f"{i}{j}" for i, j in choice.edges],
        "params": _record_params(field, params),
        "c": {str(e): field.render(v) for e, v in sorted(c.items())},
        "residual_norm": _render_norm(field, _residual_norm(residuals, field)),
        "delta": field.render(delta),
    }
    if args.twist:
        fmt = build_face_matrix(tri, c, choice, sigma=sigma, twisted=True, field=field, tc=tc)
        poly = fmt.determinant().scale(fmt.prefactor())
        record["delta_t"] = normalize_poly(poly).to_json()
    if solve_info:
        record["solve"] = solve_info
    return record


def cmd_kernel(args):
    field, selector, tri, params, c, _, sigma, deformed, solve_info = _prepare(args)
    choice = _choice(args, tri)
    fm = build_face_matrix(tri, c, choice, sigma=sigma, field=field)
    basis = face_matrix_kernel(fm)
    return {
        "command": "kernel",
        "field": selector,
        "mode": "deformed" if deformed else "plain",
        "edge_choice": [f"{i}{j}" for i, j in choice.edges],
        "params": _record_params(field, params),
        "delta": field.render(fm.determinant() * fm.prefactor()),
        "kernel_dim": len(basis),
        "kernel": [[field.render(x) for x in v] for v in basis],
    }


def cmd_cocycle(args):
    field, selector, tri, params, c, thetas, sigma, deformed, _ = _prepare(args)
    algebra = None
    theta = None
    if args.lift:
        lifted = lift_to_super(tri, c, _choice(args, tri), sigma=sigma, field=field)
        if not lifted:
            raise NumericError("the 1-loop invariant is nonzero, so no lift with nonzero theta exists")
        algebra, cg, theta, sg = lifted.algebra, lifted.c, lifted.theta, lifted.sigma
    else:
        rank = int(args.rank)
        algebra = GrassmannAlgebra(rank, field)
        cg = {e: algebra(v) for e, v in c.items()}
        theta = {f: algebra.parse(thetas[f]) if f in thetas else algebra.zero for f in range(tri.num_faces)}
        sg = {s: algebra(v) for s, v in sigma.items()} if sigma is not None else None
    res = sigma_residuals(tri, sg, cg, theta, field)
    phi = natural_cocycle(tri, cg, theta, sg, algebra)
    report = verify_cocycle(tri, phi)
    record = {
        "command": "cocycle",
        "field": selector,
        "mode": "deformed" if deformed else "plain",
        "params": _record_params(field, params),
        "theta": {str(f): v.render() for f, v in sorted(theta.items())},
        "residuals_vanish": res.is_zero(field),
    }
    record.update(report.to_json())
    record["holonomy"] = {
        name: path_holonomy(tri, phi, path).render() for name, path in sorted(tri.paths.items())
    }
    return record


def cmd_pachner(args):
    field, selector, tri, params, c, _, sigma, deformed, _ = _prepare(args)
    tets = [int(x) for x in args.tets.split(",")] if args.tets else None
    if tets is not None and len(tets) != 2:
        raise UsageError("--tets expects two ids, e.g. 0,1")
    tet = tets[0] if tets else None
    slot = args.face
    if tet is not None and slot is None:
        raise UsageError("--tets needs --face")
    if tets is not None:
        partner = tri.gluing[(tet, slot)][0]
        if partner != tets[1]:
            from .errors import NotAdjacent

            raise NotAdjacent(f"face {slot} of tetrahedron {tet} is glued to tetrahedron {partner}")
    report = pachner_invariance_check(tri, c, tet=tet, slot=slot, sigma=sigma, field=field,
                                      choice=_choice(args, tri))
    record = {"command": "pachner check", "field": selector, "params": _record_params(field, params)}
    record.update(report.to_json())
    return record


def cmd_selfcheck(args):
    """Small randomized run of the algebraic identities."""
    rng = random.Random(args.seed)
    field = QuadraticField(-3)
    alg = GrassmannAlgebra(3, field)
    checks = {"grassmann_associativity": 0, "osp_closure": 0, "osp_inverse": 0, "pairing_invariance": 0}
    failures = []
    for _ in range(args.cases):
        x, y, z = (alg.random_element(rng) for _ in range(3))
        if (x * y) * z != x * (y * z):
            failures.append("grassmann_associativity")
        checks["grassmann_associativity"] += 1
        g, h = random_osp(alg, rng), random_osp(alg, rng)
        if not is_osp(g @ h):
            failures.append("osp_closure")
        checks["osp_closure"] += 1
        if g @ osp_inverse(g) != identity(alg):
            failures.append("osp_inverse")
        checks["osp_inverse"] += 1
        vs = [SuperVector(alg, alg.random_element(rng, "even"), alg.random_element(rng, "even"),
                          alg.random_element(rng, "odd")) for _ in range(3)]
        moved = [act(g, v, check=False) for v in vs]
        if pair2(*moved[:2]) != pair2(*vs[:2]) or pair3(*moved) != pair3(*vs):
            failures.append("pairing_invariance")
        checks["pairing_invariance"] += 1
    return {"command": "selfcheck", "seed": args.seed, "cases": checks, "ok": not failures,
            "failures": sorted(set(failures))}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="superptolemy", description="1-loop invariants from ordered ideal triangulations")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--field", help=f"rational | quadratic[:d] | complex[:bits] (default ${FIELD_ENV} or {DEFAULT_FIELD})")
    common.add_argument("--tolerance", type=float, help="zero tolerance for floating fields")
    common.add_argument("--format", choices=("json", "text"), default="json")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    v = sub.add_parser("validate", parents=[common], help="parse and validate a triangulation")
    v.add_argument("file")

    def data_options(q):
        q.add_argument("file", help="triangulation file (or fixture:<name>)")
        q.add_argument("--assignment", help="file with param/c/theta lines")
        q.add_argument("--param", action="append", metavar="NAME=VALUE")
        mode = q.add_mutually_exclusive_group()
        mode.add_argument("--deformed", action="store_true", help="use the sigma lines (default when present)")
        mode.add_argument("--plain", action="store_true", help="ignore sigma lines")
        q.add_argument("--solve", action="store_true", help="solve the Ptolemy equations numerically")
        q.add_argument("--free", action="append", metavar="NAME", help="parameter solved for with --solve")
        q.add_argument("--edge-choice", default="auto", help="auto or one edge per tetrahedron, e.g. 03,12")

    o = sub.add_parser("oneloop", parents=[common], help="1-loop invariant and polynomial")
    data_options(o)
    o.add_argument("--twist", action="store_true", help="also compute the 1-loop polynomial")

    k = sub.add_parser("kernel", parents=[common], help="kernel of the face matrix")
    data_options(k)

    c = sub.add_parser("cocycle", parents=[common], help="natural cocycle and its verification")
    data_options(c)
    c.add_argument("--lift", action="store_true", help="use a kernel vector as theta")
    c.add_argument("--rank", default="1", help="Grassmann rank for theta lines")

    pa = sub.add_parser("pachner", help="2-3 move checks")
    psub = pa.add_subparsers(dest="pachner_command", parser_class=_Parser)
    pc = psub.add_parser("check", parents=[common], help="1-loop polynomial before and after a 2-3 move")
    data_options(pc)
    pc.add_argument("--tets", help="the two tetrahedra, e.g. 0,1")
    pc.add_argument("--face", type=int, help="face slot of the first tetrahedron")

    s = sub.add_parser("selfcheck", parents=[common], help="randomized algebra identities")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cases", type=int, default=50)
    return p


COMMANDS = {
    "validate": cmd_validate,
    "oneloop": cmd_oneloop,
    "kernel": cmd_kernel,
    "cocycle": cmd_cocycle,
    "pachner": cmd_pachner,
    "selfcheck": cmd_selfcheck,
}


def _emit(record, fmt, stream):
    if fmt == "text":
        for key in sorted(record):
            value = record[key]
            if not isinstance(value, str):
                value = json.dumps(value, sort_keys=True)
            stream.write(f"{key}: {value}\n")
    else:
        stream.write(json.dumps(record, sort_keys=True, indent=2) + "\n")


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None or (args.command == "pachner" and args.pachner_command is None):
            raise UsageError("superptolemy: a command is required")
        record = COMMANDS[args.command](args)
    except UsageError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except ValidationError as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID
    except (NumericError, ZeroDivisionError) as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except SuperPtolemyError as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID
    _emit(record, getattr(args, "format", "json"), stdout)
    return EXIT_OK


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
