import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from causal_strain.conefield import InvalidInput, Point
from causal_strain.nullflow import (X, Y, default_grid, endpoint_law, endpoint_of, integrate_null, seed_for_endpoint,
                                    shoot, through, wedge_fixed_points, write_curve_csv)

U_STAR = 0.708666


def x_curve(metric, t, tol=1e-10):
    return integrate_null(metric, X, (-1.0, t), tol=tol)


def test_edges_are_exact_lines(g):
    s = default_grid(-10, -1e-6, 400)
    assert np.max(np.abs(x_curve(g, -1.0).value(s) - s)) <= 1e-12
    assert np.max(np.abs(x_curve(g, -0.5).value(s) - s / 2)) <= 1e-12


@given(st.floats(-4, 2))
def test_endpoint_law(t):
    from causal_strain import strain
    g = strain()
    ep = endpoint_of(g, x_curve(g, t))
    assert ep.attached
    expected = t + 1.0 if t <= -1 else (0.0 if t < -0.5 else t + 0.5)
    assert ep.T == pytest.approx(expected, abs=1e-5)
    assert endpoint_law(g, t) == pytest.approx(expected, abs=1e-12)


@given(st.floats(-3, 3).filter(lambda T: abs(T) > 1e-9))
def test_seed_for_endpoint_inverts_law(T):
    from causal_strain import minkowski, narrow, strain
    for m in (strain(), minkowski(), narrow()):
        assert endpoint_law(m, seed_for_endpoint(m, T)) == pytest.approx(T, abs=1e-12)


@given(st.floats(-3, 1), st.floats(1e-3, 1))
def test_x_curves_never_cross(t, dt):
    from causal_strain import strain
    g = strain()
    s = default_grid(-20, -1e-6, 200)
    lower, upper = x_curve(g, t).value(s), x_curve(g, t + dt).value(s)
    assert np.all(lower < upper)


@given(st.floats(-0.999, -0.501))
def test_wedge_curves_are_trapped(t):
    from causal_strain import strain
    g = strain()
    c = x_curve(g, t)
    s, r = c.samples()
    assert np.all((s < r) & (r < s / 2))
    assert c.right_limit == 0.0


def test_x_curve_is_null(g):
    c = x_curve(g, -0.8)
    s = -np.geomspace(3, 1e-3, 2000)
    r = c.value(s)
    sm = 0.5 * (s[1:] + s[:-1])
    slope = np.diff(r) / np.diff(s)
    assert np.max(np.abs(slope - np.sqrt(g.beta_grid(c.value(sm), sm)))) < 1e-6


def test_y_curve_is_null_and_escapes(g):
    c = through(g, Y, Point(0.0, -1.0))
    s = -np.geomspace(5, 1e-3, 3000)
    r = c.value(s)
    sm = 0.5 * (s[1:] + s[:-1])
    slope = np.diff(r) / np.diff(s)
    assert np.max(np.abs(slope + np.sqrt(g.beta_grid(c.value(sm), sm)))) < 1e-4
    assert c.wedge is not None
    assert endpoint_of(g, c).attached is False
    assert c.value(-1.0) == pytest.approx(0.0, abs=1e-10)


def test_unique_interior_fixed_point(g):
    roots = wedge_fixed_points(g)
    assert len(roots) == 1
    assert roots[0] == pytest.approx(U_STAR, abs=1e-6)


def test_slope_limit_profile(g):
    ts = [-1.0, -0.99, -0.9, -0.75, -0.6, -0.51, -0.5]
    m = [endpoint_of(g, x_curve(g, t)).slope_limit for t in ts]
    assert m[0] == 1.0 and m[-1] == 0.5
    for a in m[1:-1]:
        assert a == pytest.approx(U_STAR, abs=1e-5)
    assert all(b <= a + 1e-5 for a, b in zip(m, m[1:]))  # non-increasing in t


@given(st.floats(-3, 2), st.floats(-3, -0.05), st.floats(-5, -0.01))
def test_shoot_agrees_with_curve(t, x, s):
    from causal_strain import strain
    g = strain()
    p = Point(t, x)
    fam = X if s < x else Y
    c = through(g, fam, p)
    assert shoot(g, fam, p, s) == pytest.approx(c.value(s), abs=1e-8)


def test_tolerance_convergence(g):
    s = default_grid(-20, -1e-6, 200)
    a = x_curve(g, -0.8, tol=1e-8).value(s)
    b = x_curve(g, -0.8, tol=1e-12).value(s)
    assert np.max(np.abs(a - b)) < 1e-6


def test_invalid_inputs(g):
    with pytest.raises(InvalidInput):
        integrate_null(g, "Z", (-1.0, 0.0))
    with pytest.raises(InvalidInput):
        integrate_null(g, X, (-1.0, 0.0), window=(-0.5, -1e-6))
    with pytest.raises(InvalidInput):
        x_curve(g, -0.75).value(0.5)


def test_csv_export(g, tmp_path):
    path = tmp_path / "c.csv"
    write_curve_csv(x_curve(g, -1.0), path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["s", "r"]
    data = np.array(rows[1:], float)
    assert np.array_equal(data[:, 0], data[:, 1])
