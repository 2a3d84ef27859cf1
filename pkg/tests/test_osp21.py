import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superptolemy.errors import DegeneratePair, NotOSp, NotUnimodular
from superptolemy.grassmann import GrassmannAlgebra
from superptolemy.osp21 import (
    SuperMatrix,
    SuperVector,
    act,
    berezinian,
    body_map,
    borel,
    coset_normal_form,
    counter_diagonal,
    embed_sl2,
    identity,
    is_osp,
    osp_inverse,
    pair2,
    pair3,
    random_osp,
    super_transpose,
    unipotent,
)

seeds = st.integers(0, 10**6)


@pytest.fixture
def alg():
    return GrassmannAlgebra(3)


def test_block_parity_enforced(alg):
    e1 = alg.generator(1)
    with pytest.raises(ValueError):
        SuperMatrix(alg, [[e1, 0, 0], [0, 1, 0], [0, 0, 1]])


def test_standard_shapes_are_osp(alg):
    e1, e2, _ = alg.generators()
    assert is_osp(identity(alg))
    assert is_osp(embed_sl2(alg, [[2, 3], [1, 2]]))
    assert is_osp(unipotent(alg, 5 + e1 * e2, e1 - e2))
    assert is_osp(counter_diagonal(alg, 3 + e1 * e2))
    assert is_osp(borel(alg, 7, 2, e2))
    with pytest.raises(NotUnimodular):
        embed_sl2(alg, [[2, 0], [0, 2]])


def test_not_osp_reports_relation(alg):
    g = SuperMatrix(alg, [[2, 0, 0], [0, 1, 0], [0, 0, 1]])
    check = is_osp(g)
    assert not check
    assert "ad-bc-gamma*delta=1" in check.failed
    with pytest.raises(NotOSp):
        osp_inverse(g)


def test_berezinian_of_block_diagonal(alg):
    g = SuperMatrix(alg, [[2, 1, 0], [3, 4, 0], [0, 0, 5]])
    assert berezinian(g) == alg(5) / 5 * 5 / 5 * (2 * 4 - 3) / 5


def test_super_transpose_twice_negates_odd_blocks(alg):
    e1 = alg.generator(1)
    g = unipotent(alg, 2, e1)
    tt = super_transpose(super_transpose(g))
    assert tt[0, 2] == -g[0, 2] and tt[2, 1] == -g[2, 1] and tt[0, 1] == g[0, 1]


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_group_properties(seed):
    rng = random.Random(seed)
    alg = GrassmannAlgebra(3)
    g, h = random_osp(alg, rng), random_osp(alg, rng)
    assert is_osp(g @ h)
    assert g @ osp_inverse(g) == identity(alg)
    assert osp_inverse(g @ h) == osp_inverse(h) @ osp_inverse(g)
    assert berezinian(g @ h) == alg.one
    # the body of e is 1
    assert g[2, 2].body() == 1
    b = body_map(g)
    assert b[0][0] * b[1][1] - b[0][1] * b[1][0] == 1


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_pairings_invariant(seed):
    rng = random.Random(seed)
    alg = GrassmannAlgebra(3)
    g = random_osp(alg, rng)
    vs = [SuperVector(alg, alg.random_element(rng, "even"), alg.random_element(rng, "even"),
                      alg.random_element(rng, "odd")) for _ in range(3)]
    gv = [act(g, v) for v in vs]
    assert pair2(gv[0], gv[1]) == pair2(vs[0], vs[1])
    assert pair3(*gv) == pair3(*vs)
    assert pair2(vs[0], vs[1]) == -pair2(vs[1], vs[0])
    assert pair3(vs[0], vs[1], vs[2]) == pair3(vs[1], vs[2], vs[0])


def test_pairing_values(alg):
    e1, e2, _ = alg.generators()
    u = SuperVector(alg, 1, 0, e1)
    v = SuperVector(alg, 0, 1, e2)
    w = SuperVector(alg, 1, 1)
    assert pair2(u, v) == 1 - e1 * e2
    # column determinant of (u, v, w) expanded along the odd row
    assert pair3(u, v, w) == -e1 - e2
    with pytest.raises(ValueError):
        SuperVector(alg, e1, 0)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_coset_normal_form(seed):
    rng = random.Random(seed)
    alg = GrassmannAlgebra(2)
    g, h = random_osp(alg, rng), random_osp(alg, rng)
    if alg.field.is_zero((osp_inverse(g) @ h)[1, 0].body()):
        with pytest.raises(DegeneratePair):
            coset_normal_form(g, h)
        return
    g2, h2, c = coset_normal_form(g, h)
    assert osp_inverse(g2) @ h2 == counter_diagonal(alg, c)
    # the pairing of the left columns is the coset invariant
    assert c == pair2(SuperVector.left_column(g), SuperVector.left_column(h))
