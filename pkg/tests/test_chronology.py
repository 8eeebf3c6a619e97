import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from causal_strain.cboundary import default_relation_grid
from causal_strain.chronology import (CausalCurve, CurveBoundary, PastSet, attached_x_line, boundary_value, check_causal_order,
                                      chron_rel, past_of_curve, past_of_point, pastset_leq, sup_distance)
from causal_strain.conefield import InvalidInput, Point, Ternary
from causal_strain.nullflow import X, integrate_null

ts = st.floats(-3, 3)
xs = st.floats(-3, -0.05)
GRID = default_relation_grid()


def test_examples(cc, g, ca):
    assert chron_rel(cc, Point(-2, -1), Point(0, -1)) is Ternary.INSIDE
    assert chron_rel(cc, Point(0, -1), Point(0.5, -2)) is Ternary.OUTSIDE
    assert chron_rel(cc, Point(0, -1), Point(1, -2)) is Ternary.BOUNDARY
    assert chron_rel(ca, Point(0, -1), Point(0.4, -2)) is Ternary.OUTSIDE
    assert chron_rel(g, Point(0, -1), Point(0.6, -2)) is Ternary.INSIDE


@given(ts, xs)
def test_irreflexive(t, x):
    from causal_strain import strain
    assert chron_rel(strain(), Point(t, x), Point(t, x)) is not Ternary.INSIDE


@given(ts, xs, xs, xs, st.floats(1e-3, 1), st.floats(1e-3, 1))
def test_transitive(t3, x3, x2, x1, d2, d1):
    from causal_strain import strain
    g = strain()
    r = Point(t3, x3)
    q = Point(boundary_value(g, r, x2) - d2, x2)
    p = Point(boundary_value(g, q, x1) - d1, x1)
    assert chron_rel(g, q, r) is Ternary.INSIDE and chron_rel(g, p, q) is Ternary.INSIDE
    assert chron_rel(g, p, r) is Ternary.INSIDE


@given(ts, xs, ts, xs)
def test_cone_nesting_gives_relation_inclusion(t1, x1, t2, x2):
    from causal_strain import minkowski, narrow, strain
    p, q = Point(t1, x1), Point(t2, x2)
    rels = [chron_rel(m, p, q) for m in (minkowski(), strain(), narrow())]
    # a wider cone never loses a chronological pair
    for a, b in zip(rels, rels[1:]):
        if a is Ternary.INSIDE:
            assert b is Ternary.INSIDE


def test_past_of_point_matches_shots(g):
    q = Point(0.3, -0.7)
    P = past_of_point(g, q)
    for s in (-15.0, -3.0, -0.9, -0.7, -0.4, -1e-3):
        assert P(s) == pytest.approx(boundary_value(g, q, s), abs=1e-8)
    assert P.contains(0.0, -0.7) and not P.contains(0.31, -0.7)


def test_pasts_nested_along_timelike_curve(g):
    a = past_of_point(g, Point(0.0, -1.0))
    b = past_of_point(g, Point(0.5, -1.0))
    inc = pastset_leq(a, b, GRID)
    assert inc.subset and inc.strict
    assert not pastset_leq(b, a, GRID).subset


@pytest.mark.parametrize("t", [-2.0, -0.75, 0.3])
def test_tip_of_own_null_curve_is_its_hypograph(g, t):
    c = integrate_null(g, X, (-1.0, t))
    P = past_of_curve(g, c)
    assert np.max(np.abs(P.values(GRID) - c.value(GRID))) < 1e-9


def test_past_of_curve_under_wider_cone(cc, g):
    c = integrate_null(cc, X, (-1.0, -1.5))  # Minkowski line ending at T = -0.5
    P = past_of_curve(g, c)
    ref = integrate_null(g, X, (-1.0, -1.5))
    assert sup_distance(P, PastSet(CurveBoundary(ref), "curve"), GRID) < 1e-8


def test_check_causal_order(g):
    good = np.array([[0.0, -2.0], [0.5, -1.5], [1.0, -1.0]])
    check_causal_order(g, good)
    with pytest.raises(InvalidInput):
        check_causal_order(g, np.array([[0.0, -2.0], [0.1, -1.0]]))
    with pytest.raises(InvalidInput):
        check_causal_order(g, np.array([[0.0, -2.0]]))


def test_attached_line(g, cc):
    assert attached_x_line(g, 0.0) is None
    line = attached_x_line(cc, 0.3)
    assert line.value(-1.0) == pytest.approx(-0.7)
    assert attached_x_line(g, 0.2).value(-1.0) == pytest.approx(-0.3)


def test_causal_curve_from_null_curve(g):
    c = integrate_null(g, X, (-1.0, 0.0))
    cc_ = CausalCurve.from_null_curve(c)
    assert cc_.endpoint.attached and cc_.endpoint.T == 0.5
    assert np.all(np.diff(cc_.points[:, 0]) > 0)


def test_past_set_csv(g, tmp_path):
    P = past_of_point(g, Point(0.0, -1.0))
    P.write_csv(tmp_path / "b.csv", np.array([-2.0, -1.0, -0.5]))
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "s,b" and lines[2] == "-1.0,0.0"
