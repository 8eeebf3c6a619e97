import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from causal_strain.conefield import InvalidInput
from causal_strain.scenario import Scenario, expand, load_defaults


def test_defaults(scenario):
    assert len(scenario.x_seeds) == 43 and len(scenario.strain_seeds) == 33
    assert len(scenario.y_seeds) == 5 and len(scenario.T_samples) == 41
    assert scenario.tol == 1e-10 and scenario.window == (-20.0, -1e-6)
    assert scenario.to_dict() == load_defaults()


@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(1, 50))
def test_linspace_expansion(a, b, n):
    v = expand({"start": a, "stop": b, "num": n})
    assert len(v) == n and v[0] == a


@pytest.mark.parametrize("over", [
    {"tol": 0}, {"tol": "x"}, {"x_stop": 0.5}, {"metrics": ["flat"]}, {"nope": 1},
    {"x_seeds": {"strain": [], "outside": []}}, {"y_seeds": [[0, 1]]}, {"oracle": {"h": -1}},
    {"oracle": {"bbox": [[-1, 1], [-1, 0.5]]}}, {"confmap": {"angle": "other"}}, {"seed": 1.5},
])
def test_rejects(over):
    with pytest.raises(InvalidInput):
        Scenario.from_dict(over)


def test_nested_override_keeps_siblings():
    sc = Scenario.from_dict({"oracle": {"n_samples": 10}})
    assert sc.section("oracle")["n_samples"] == 10 and sc.section("oracle")["h"] == 0.05


def test_from_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"tol": 1e-9}))
    assert Scenario.from_file(p, seed=4).seed == 4
    with pytest.raises(InvalidInput):
        Scenario.from_file(tmp_path / "missing.json")
