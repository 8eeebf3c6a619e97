import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from causal_strain.chronology import boundary_value, chron_rel
from causal_strain.conefield import InvalidInput, Point, Ternary
from causal_strain.gridoracle import build_oracle, crosscheck, oracle_chron

BOX = ((-3.0, 3.0), (-3.0, -0.05))


@pytest.fixture(scope="module")
def oracles(g, cc, ca):
    return {m.name: build_oracle(m, BOX) for m in (g, cc, ca)}


def test_examples(oracles):
    assert oracle_chron(oracles["g_cc"], Point(-2, -1), Point(0, -1))
    assert not oracle_chron(oracles["g_cc"], Point(0, -1), Point(0.5, -2))
    assert not oracle_chron(oracles["g_ca"], Point(0, -1), Point(0.4, -2))
    assert oracle_chron(oracles["g"], Point(0, -1), Point(0.6, -2))


def test_single_column_is_vertical(g):
    o = build_oracle(g, ((-1.0, 1.0), (-1.0, -1.0)), 0.1)
    assert o.nx == 1
    assert oracle_chron(o, Point(-0.5, -1.0), Point(0.5, -1.0))
    assert not oracle_chron(o, Point(0.5, -1.0), Point(-0.5, -1.0))


def test_snap_ties_low(g):
    o = build_oracle(g, ((0.0, 1.0), (-1.0, -0.5)), 0.25, t_sub=1)
    assert o.snap(Point(0.125, -0.875)) == (0, 0)
    assert o.snap(Point(0.126, -0.874)) == (1, 1)
    with pytest.raises(InvalidInput):
        o.snap(Point(2.0, -0.7))


def test_invalid_boxes(g):
    with pytest.raises(InvalidInput):
        build_oracle(g, ((-1, 1), (-1, 0.0)))
    with pytest.raises(InvalidInput):
        build_oracle(g, ((-1, 1), (-1, -0.5)), h=5.0)
    with pytest.raises(InvalidInput):
        build_oracle(g, ((-1, 1), (-1, -0.5)), h=0.0)


def test_deterministic(g):
    a = build_oracle(g, ((-1, 1), (-1, -0.1)), 0.1)
    b = build_oracle(g, ((-1, 1), (-1, -0.1)), 0.1)
    assert np.array_equal(a.reach, b.reach)


def test_empty_crosscheck(g, oracles):
    rep = crosscheck(g, oracles["g"], 0, 0)
    assert rep.passed and rep.agreements == 0 and rep.violations == []


@given(st.integers(0, 120), st.integers(0, 59), st.integers(0, 120), st.integers(0, 59))
def test_inner_approximation(i1, j1, i2, j2):
    from causal_strain import strain
    g = strain()
    o = _shared(g)
    if (i1, j1) == (i2, j2) or not o.reachable(o.node(i1, j1), o.node(i2, j2)):
        return
    assert chron_rel(g, o.coords(i1, j1), o.coords(i2, j2)) is not Ternary.OUTSIDE


_CACHE = {}


def _shared(g):
    if "g" not in _CACHE:
        _CACHE["g"] = build_oracle(g, BOX)
    return _CACHE["g"]


def test_refinement_monotone(g):
    box = ((-2.0, 2.0), (-2.0, -0.1))
    coarse, fine = build_oracle(g, box, 0.1), build_oracle(g, box, 0.05)
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 100:
        i1, i2 = rng.integers(0, coarse.nt, 2)
        j1, j2 = rng.integers(0, coarse.nx, 2)
        p, q = coarse.coords(i1, j1), coarse.coords(i2, j2)
        if (i1, j1) == (i2, j2) or abs(boundary_value(g, q, p.x) - p.t) <= 0.2:
            continue  # keep off-boundary pairs only
        checked += 1
        if coarse.reachable(coarse.node(i1, j1), coarse.node(i2, j2)):
            a, b = fine.snap(p), fine.snap(q)
            assert fine.coords(*a) == pytest.approx(p) and fine.coords(*b) == pytest.approx(q)
            assert fine.reachable(fine.node(*a), fine.node(*b))


@pytest.mark.parametrize("name", ["g_cc", "g", "g_ca"])
def test_crosscheck_small(oracles, name):
    o = oracles[name]
    rep = crosscheck(o.metric, o, 500, 11)
    assert rep.passed and rep.unsound == 0
