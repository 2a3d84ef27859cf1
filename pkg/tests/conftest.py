from fractions import Fraction
from importlib.resources import files

import pytest
import sympy as sp

from superptolemy.ptolemy import sigma_from_triangulation
from superptolemy.scalars import ComplexField, QuadraticField, RationalField
from superptolemy.triangulation import parse_assignment, parse_triangulation

DATA = files("superptolemy").joinpath("data")


def read_fixture(name):
    return DATA.joinpath(name).read_text()


@pytest.fixture(scope="session")
def fig8():
    return parse_triangulation(read_fixture("fig8.tri"), name="fig8")


@pytest.fixture(scope="session")
def qf():
    return QuadraticField(-3)


@pytest.fixture(scope="session")
def cf():
    return ComplexField(256)


@pytest.fixture(scope="session")
def fig8_point(fig8, qf):
    """Exact (params, sigma, c) at the geometric point m = 1, l = -1."""
    params = {k: qf.parse(v) for k, v in fig8.params.items()}
    sigma = sigma_from_triangulation(fig8, qf, params)
    c = {k: qf.parse(v) for k, v in fig8.c_values.items()}
    return params, sigma, c


def singular_point(tri, field, conjugate=False):
    """(params, sigma, c) at m = (1 +- sqrt(-3))/2, l = -1."""
    params, cvals, _ = parse_assignment(read_fixture("fig8_singular.asn"))
    params = {k: field.parse(v) for k, v in params.items()}
    c = {int(k): field.parse(v) for k, v in cvals.items()}
    if conjugate:
        params = {k: v.conjugate() for k, v in params.items()}
        c = {k: v.conjugate() for k, v in c.items()}
    return params, sigma_from_triangulation(tri, field, params), c


@pytest.fixture(scope="session")
def fig8_singular(fig8, qf):
    return singular_point(fig8, qf)


def exact_curve_point(m):
    """Exact point of the deformed curve at rational ``m``, with c2 = 1.

    c1 = x solves m^4 x^2 + (1 - m^2 - m^4) x + m^2 = 0 and l = (1 - x)/x^2.
    """
    disc = (1 - m**2 - m**4) ** 2 - 4 * m**6
    num, den = disc.numerator * disc.denominator, disc.denominator
    square, free = 1, 1
    for p, e in sp.factorint(abs(num)).items():
        square *= p ** (e // 2)
        free *= p ** (e % 2)
    if num < 0:
        free = -free
    if free == 1:
        field = RationalField()
        root = field(Fraction(square, den))
    else:
        field = QuadraticField(free)
        root = field.from_exact(Fraction(0), Fraction(square, den), free)
    x = (-(1 - m**2 - m**4) + root) / (2 * m**4)
    mm = field(m)
    params = {"m": mm, "l": (1 - x) / (x * x)}
    return field, params, {0: field.one, 1: x}
