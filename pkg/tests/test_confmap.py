import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from causal_strain import confmap
from causal_strain.confmap import (A_CONST, Region, angle_from_seed, in_target, injectivity_violations,
                                   interface_probes, map_cloud, map_f, nullcheck_f, region_of, sample_cloud,
                                   target_region)
from causal_strain.conefield import InvalidInput, Point
from causal_strain.nullflow import X, Y, integrate_null, through

GRID = -np.geomspace(3, 0.05, 120)


def test_constant():
    assert A_CONST == pytest.approx(1.1071487177940904)


def test_regions():
    assert region_of(Point(0.0, -1.0)) is Region.B
    assert region_of(Point(-2.0, -1.0)) is Region.C
    assert region_of(Point(-0.75, -1.0)) is Region.A
    assert region_of(Point(-1.0, -1.0)) is Region.A and region_of(Point(-0.5, -1.0)) is Region.A


@given(st.floats(-3, 3))
def test_seed_angle_range(t):
    assert 0.0 <= angle_from_seed(t) <= A_CONST


@given(st.floats(-3, 3), st.floats(-3, -0.05))
def test_images_in_target_and_region(t, x):
    from causal_strain import strain
    p = Point(t, x)
    q = map_f(strain(), p)
    assert in_target(q)
    assert region_of(p) in target_region(q)


@pytest.mark.parametrize("t", [-3.0, -2.0, -1.2, -0.4, 0.0, 1.0])
def test_x_curves_map_to_null_lines(g, t):
    rep = nullcheck_f(g, integrate_null(g, X, (-1.0, t)), grid=GRID)
    assert rep.asserted and rep.passed, rep.max_dev


def test_y_deviation_is_reported_only(g):
    rep = nullcheck_f(g, through(g, Y, Point(0.0, -1.0)), grid=GRID)
    assert not rep.asserted and rep.passed
    assert set(rep.max_dev) <= {"A", "B", "C", "interface"}


def test_interfaces_continuous(g):
    assert max(p.gap for p in interface_probes(g)) <= 1e-6


def test_cloud(g, tmp_path):
    pts = sample_cloud(300, 7)
    assert pts == sample_cloud(300, 7)
    rows = map_cloud(g, pts)
    assert injectivity_violations(rows) == 0
    confmap.write_cloud_csv(rows, tmp_path / "c.csv")
    out = list(csv.reader(open(tmp_path / "c.csv")))
    assert out[0] == ["t", "x", "region", "t_image", "x_image"] and len(out) == 301


def test_invalid_inputs(cc, g):
    with pytest.raises(InvalidInput):
        map_f(cc, Point(0.0, -1.0))
    with pytest.raises(InvalidInput):
        map_f(g, Point(0.0, -1.0), angle="x")


@pytest.mark.parametrize("angle", ["slope", "literal"])
def test_alternative_angles_stay_in_wedge_image(g, angle):
    q = map_f(g, Point(-0.75, -1.0), angle=angle)
    assert Region.A in target_region(q)
