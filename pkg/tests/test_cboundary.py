import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from causal_strain.cboundary import (PairClass, Verdict, WitnessSearch, atlas_iso_check, build_atlas, chron_limit,
                                     classify_pair, ext_chron, i_plus, quotient_strain, relate, tip_generate,
                                     tip_generate_J)
from causal_strain.conefield import InvalidInput, Point
from causal_strain.nullflow import seed_for_endpoint


def test_tip_labels(g):
    P = tip_generate(g, -0.75)
    assert P.endpoint.T == 0.0 and str(P.label) == "T_point(0)"
    J = tip_generate_J(g, Point(0.0, -1.0))
    assert not J.endpoint.attached and J.label.kind == "Jplus_member"
    with pytest.raises(InvalidInput):
        tip_generate(g, float("inf"))


def test_strain_in_atlas(ctx):
    members = ctx.atlas_g.strain_groups[0.0]
    assert len(members) == 33
    assert [m.seed for m in members] == sorted(m.seed for m in members)
    assert all(m.label.kind == "Strain_member" for m in members)


def test_no_strain_for_constant_cones(ctx):
    assert ctx.atlas_cc.strain_groups == {} and ctx.atlas_ca.strain_groups == {}
    assert ctx.atlas_cc.endpoints() == ctx.atlas_g.endpoints()


@given(st.floats(-2, 2), st.floats(0.01, 2))
def test_constant_cone_T_line_is_timelike(T, dT):
    from causal_strain import minkowski, narrow
    for m in (minkowski(), narrow()):
        P1 = tip_generate(m, seed_for_endpoint(m, T))
        P2 = tip_generate(m, seed_for_endpoint(m, T + dT))
        rep = relate(m, P1, P2)
        assert rep.cls is PairClass.TIMELIKE_FORWARD
        assert rep.e12.verdict is Verdict.TRUE and rep.e12.witness is not None
        assert classify_pair(m, P2, P1) is PairClass.TIMELIKE_BACKWARD


@given(st.floats(-1, -0.5), st.floats(-1, -0.5))
def test_strain_pairs_are_horismotic(t1, t2):
    from causal_strain import strain
    g = strain()
    lo, hi = sorted((t1, t2))
    if hi - lo < 1e-3:
        return
    rep = relate(g, tip_generate(g, lo), tip_generate(g, hi))
    assert rep.cls is PairClass.HORISMOS
    assert rep.inc12.subset and rep.inc12.strict
    assert rep.e12.certificate["reason"] == "right_limit"
    assert rep.e21.certificate["reason"] == "not_subset"


def test_strain_to_neighbours(g):
    left = tip_generate(g, -1.2)  # T = -0.2
    right = tip_generate(g, 0.0)  # T = 0.5
    mid = tip_generate(g, -0.75)
    assert classify_pair(g, left, mid) is PairClass.TIMELIKE_FORWARD
    assert classify_pair(g, mid, right) is PairClass.TIMELIKE_FORWARD


def test_equal_pair(g):
    assert classify_pair(g, tip_generate(g, -0.2), tip_generate(g, -0.2)) is PairClass.EQUAL


def test_i_plus_by_definition(g):
    ip = i_plus(g)
    assert classify_pair(g, tip_generate(g, 0.0), ip) is PairClass.TIMELIKE_FORWARD
    assert classify_pair(g, tip_generate_J(g, Point(0, -1)), ip) is PairClass.HORISMOS
    with pytest.raises(InvalidInput):
        ext_chron(g, ip, tip_generate(g, 0.0))


def test_ext_chron_is_three_valued(g):
    res = ext_chron(g, tip_generate(g, -0.3), tip_generate(g, 0.5))
    assert res.verdict is Verdict.TRUE
    with pytest.raises(TypeError):
        bool(res)


def test_null_infinity_members_horismotic(ctx):
    mat = ctx.atlas_g.relation_matrix("Jplus")
    n = len(mat)
    assert n >= 4
    assert all(mat[i][j] is PairClass.HORISMOS for i in range(n) for j in range(n) if i != j)


def test_relation_matrix_antisymmetric(ctx):
    mat = ctx.atlas_g.relation_matrix("T_Str")
    rev = {PairClass.TIMELIKE_FORWARD: PairClass.TIMELIKE_BACKWARD,
           PairClass.TIMELIKE_BACKWARD: PairClass.TIMELIKE_FORWARD}
    n = len(mat)
    for i in range(n):
        for j in range(n):
            assert mat[j][i] is rev.get(mat[i][j], mat[i][j])
    assert not any(c is PairClass.INDETERMINATE for row in mat for c in row)


def test_quotient_iso(ctx):
    assert atlas_iso_check(quotient_strain(ctx.atlas_g), ctx.atlas_cc).passed
    rep = atlas_iso_check(ctx.atlas_g, ctx.atlas_cc)
    assert not rep.passed and any("cardinality" in v for v in rep.violations)
    assert atlas_iso_check(ctx.atlas_ca, ctx.atlas_cc).passed


def test_iso_rejects_shifted_pairing(ctx):
    assert not atlas_iso_check(ctx.atlas_ca, ctx.atlas_cc, pairing=lambda T: T + 0.1).passed


def test_chron_limit(g):
    seq = [tip_generate(g, -1.0 + 10.0 ** -k) for k in range(1, 9)]
    assert chron_limit(seq, tip_generate(g, -1.0)).verdict.value == "converges"
    assert chron_limit(seq, tip_generate(g, -0.5)).verdict.value == "diverges"
    with pytest.raises(InvalidInput):
        chron_limit([], tip_generate(g, -1.0))


def test_atlas_exports(ctx, tmp_path):
    ctx.atlas_cc.write_json(tmp_path / "a.json")
    d = json.loads((tmp_path / "a.json").read_text())
    assert d["metric"] == "g_cc" and len(d["T_line"]) == len(ctx.atlas_cc.endpoints())
    ctx.atlas_cc.write_relations_csv(tmp_path / "r.csv")
    rows = (tmp_path / "r.csv").read_text().splitlines()
    assert len(rows) == len(ctx.atlas_cc.tstr_members()) + 1


def test_build_atlas_validation(g):
    with pytest.raises(InvalidInput):
        build_atlas(g, [])
    a = build_atlas(g, [-0.2, -0.2, -0.75])
    assert len(a.T_line) == 2


def test_search_grid_respected(g):
    search = WitnessSearch(grid=-np.geomspace(10, 1e-5, 100))
    assert relate(g, tip_generate(g, -2.0), tip_generate(g, -1.5), search).cls is PairClass.TIMELIKE_FORWARD
