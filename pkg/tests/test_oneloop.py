import pytest
import sympy as sp

from superptolemy.errors import ChoiceInvalid, ValidationError, WeightsMissing
from superptolemy.oneloop import (
    ROW_SIGNS,
    EdgeChoice,
    NoLift,
    build_face_matrix,
    face_matrix_kernel,
    lift_to_super,
    one_loop_invariant,
    one_loop_polynomial,
    tet_face_matrix,
)
from superptolemy.ptolemy import odd_equation_coefficients, sigma_from_triangulation
from superptolemy.scalars import ComplexField, LaurentPoly, SymbolicField
from superptolemy.triangulation import EDGES

M, L, C1, C2, T = sp.symbols("m l c1 c2 t")
CV = {e: sp.Symbol(f"c{e[0]}{e[1]}") for e in EDGES}


def _ideal(*extra):
    rel1 = C2**2 - L * M**4 * C1**2 + L * M**2 * C1 * C2
    rel2 = L * C1**2 - C2**2 + C1 * C2
    return sp.groebner([rel1, rel2], L, C1, C2, M, *extra, order="lex")


def test_tet_face_matrix_pfaffian():
    f = sp.Matrix(tet_face_matrix(CV))
    assert f.T == -f
    ptolemy = CV[(0, 1)] * CV[(2, 3)] - CV[(0, 2)] * CV[(1, 3)] + CV[(0, 3)] * CV[(1, 2)]
    assert sp.expand(f.det() - ptolemy**2) == 0


def test_face_matrix_rows_are_signed_odd_equations():
    eqs = odd_equation_coefficients(CV, lambda *_: sp.S(1))
    f = tet_face_matrix(CV)
    for k in range(4):
        row = [sp.S(0)] * 4
        for slot, coef in eqs[k].items():
            row[slot] = coef * ROW_SIGNS[k]
        assert row == f[k]


def test_edge_choice_change_identity():
    """Row operations relating the choices [0,1] and [0,2] agree modulo the Ptolemy relation."""
    eqs = odd_equation_coefficients(CV, lambda *_: sp.S(1))

    def row(k):
        return sp.Matrix([[eqs[k].get(s, 0) for s in range(4)]])

    c = CV
    lhs = sp.Matrix([[c[(0, 2)], -c[(0, 3)]], [0, 1]]) * sp.Matrix.vstack(row(2), row(3))
    rhs = sp.Matrix([[c[(0, 1)], 0], [0, 1]]) * sp.Matrix.vstack(row(1), row(3))
    on_variety = {c[(2, 3)]: (c[(0, 2)] * c[(1, 3)] - c[(0, 3)] * c[(1, 2)]) / c[(0, 1)]}
    assert sp.simplify((lhs - rhs).subs(on_variety)) == sp.zeros(2, 4)
    assert sp.simplify(lhs - rhs) != sp.zeros(2, 4)


def test_edge_choice_api():
    assert len(list(EdgeChoice.all(2))) == 36
    ch = EdgeChoice.parse("03,12", 2)
    assert ch.edges == ((0, 3), (1, 2)) and ch.render() == "03,12"
    assert EdgeChoice.parse("0-3 [2]1").edges == ((0, 3), (1, 2))
    assert ch.selected_slots(0) == [1, 2]
    for bad in ("04", "00", "0"):
        with pytest.raises(ChoiceInvalid):
            EdgeChoice.parse(bad)
    with pytest.raises(ChoiceInvalid):
        EdgeChoice.parse("01", 2)


def test_build_errors(fig8, fig8_point, qf):
    _, sigma, c = fig8_point
    with pytest.raises(ValidationError):
        build_face_matrix(fig8, {0: c[0]}, sigma=sigma, field=qf)
    with pytest.raises(ValidationError):
        build_face_matrix(fig8, c, sigma=sigma)
    with pytest.raises(WeightsMissing):
        build_face_matrix(fig8.with_decorations(face_weights=None), c, sigma=sigma, twisted=True, field=qf)


def test_twisted_at_one_is_untwisted(fig8, fig8_point, qf):
    _, sigma, c = fig8_point
    for ch in (None, EdgeChoice.parse("03,12")):
        plain = build_face_matrix(fig8, c, ch, sigma=sigma, field=qf)
        tw = build_face_matrix(fig8, c, ch, sigma=sigma, twisted=True, field=qf)
        assert tw.determinant().evaluate(qf.one) == plain.determinant()
        assert tw.evaluate(qf.one) == plain.rows
        assert tw.to_json()["row_labels"] == plain.to_json()["row_labels"]
    raw = one_loop_polynomial(fig8, c, sigma=sigma, field=qf, normalize=False)
    assert raw.evaluate(qf.one) == one_loop_invariant(fig8, c, sigma=sigma, field=qf) == 2


def test_choice_prefactors(fig8):
    f = SymbolicField()
    sigma = sigma_from_triangulation(fig8, f, {"m": M, "l": L})
    fm = build_face_matrix(fig8, {0: C2, 1: C1}, EdgeChoice.parse("03,12"), sigma=sigma, field=f)
    assert [sp.simplify(x) for x in fm.choice_values] == [C2 / M, C2]


def test_twisted_determinant_identity(fig8):
    f = SymbolicField()
    sigma = sigma_from_triangulation(fig8, f, {"m": M, "l": L})
    fm = build_face_matrix(fig8, {0: C2, 1: C1}, EdgeChoice.parse("03,12"), sigma=sigma,
                           twisted=True, field=f)
    det = sum(v * T**k for k, v in fm.determinant().items())
    ref = -C1 * C2**3 / M**2 * (T**2 - 2 * (M + 1 / M) * T + 1)
    ideal = _ideal(T)
    found = False
    for shift in range(-2, 3):
        for sign in (1, -1):
            expr = sp.numer(sp.together(det - sign * T**shift * ref))
            if ideal.reduce(sp.expand(expr))[1] == 0:
                found = True
    assert found


def test_scaling_invariance(fig8, fig8_point, qf):
    _, sigma, c = fig8_point
    k = qf.parse("2-sqrt(-3)")
    scaled = {e: k * v for e, v in c.items()}
    assert one_loop_invariant(fig8, scaled, sigma=sigma, field=qf) == one_loop_invariant(
        fig8, c, sigma=sigma, field=qf
    )
    assert one_loop_polynomial(fig8, scaled, sigma=sigma, field=qf) == one_loop_polynomial(
        fig8, c, sigma=sigma, field=qf
    )


def test_kernel_and_lift(fig8, fig8_point, fig8_singular, qf):
    _, sigma, c = fig8_point
    fm = build_face_matrix(fig8, c, sigma=sigma, field=qf)
    assert face_matrix_kernel(fm) == []
    no = lift_to_super(fig8, c, sigma=sigma, field=qf)
    assert isinstance(no, NoLift) and not no and no.delta == 2
    tw = build_face_matrix(fig8, c, sigma=sigma, twisted=True, field=qf)
    with pytest.raises(ValidationError):
        face_matrix_kernel(tw)
    _, sigma, c = fig8_singular
    lifted = lift_to_super(fig8, c, sigma=sigma, field=qf)
    assert lifted and lifted.residuals().is_zero(qf)


def test_float_kernel(fig8, fig8_singular):
    cf = ComplexField(256)
    params, _, c = fig8_singular
    to_c = {k: cf.from_exact(v.p, v.q, v.d) for k, v in c.items()}
    sig = sigma_from_triangulation(fig8, cf, {k: cf.from_exact(v.p, v.q, v.d) for k, v in params.items()})
    fm = build_face_matrix(fig8, to_c, sigma=sig, field=cf)
    basis = face_matrix_kernel(fm)
    assert len(basis) == 2
    for v in basis:
        assert max(abs(sum(a * b for a, b in zip(row, v))) for row in fm.rows) < 1e-60
    lifted = lift_to_super(fig8, to_c, sigma=sig, field=cf)
    assert lifted.residuals().max_norm(cf) < 1e-60


def test_polynomial_is_laurent(fig8, fig8_point, qf):
    _, sigma, c = fig8_point
    p = one_loop_polynomial(fig8, c, sigma=sigma, field=qf)
    assert isinstance(p, LaurentPoly) and p.min_degree == 0 and p.max_degree == 2
