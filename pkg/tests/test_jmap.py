import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from causal_strain.cboundary import default_relation_grid, i_plus, tip_generate
from causal_strain.chronology import sup_distance
from causal_strain.jmap import (ContractViolation, composition_check, jhat, jhat_law_cc, jhat_profile,
                                require_nested)
from causal_strain.nullflow import seed_for_endpoint

GRID = default_relation_grid()


def test_contract(g, cc, ca):
    require_nested(cc, g)
    require_nested(g, ca)
    with pytest.raises(ContractViolation):
        require_nested(ca, g)
    with pytest.raises(ContractViolation):
        jhat(g, cc, tip_generate(g, 0.0))


def test_identity_and_i_plus(g, cc):
    P = tip_generate(g, -0.8)
    assert jhat(g, g, P) is P
    assert jhat(cc, g, i_plus(cc)).is_i_plus


@given(st.floats(-2, 1).filter(lambda T: T == 0.0 or abs(T) > 1e-9))
def test_cc_law(T):
    from causal_strain import minkowski, strain
    cc, g = minkowski(), strain()
    img = jhat(cc, g, tip_generate(cc, seed_for_endpoint(cc, T)))
    ref = tip_generate(g, jhat_law_cc(T))
    assert sup_distance(img.past, ref.past, GRID) <= 1e-4
    assert img.endpoint.T == pytest.approx(T, abs=1e-12)


def test_law_values():
    assert jhat_law_cc(-0.5) == -1.5 and jhat_law_cc(0.0) == -1.0 and jhat_law_cc(1e-9) == pytest.approx(-0.5)


def test_strain_collapses_into_g_ca(ctx, g, ca):
    imgs = [jhat(g, ca, P) for P in ctx.atlas_g.strain_groups[0.0]]
    vals = np.array([im.values(GRID) for im in imgs])
    assert np.max(vals.max(axis=0) - vals.min(axis=0)) <= 1e-6
    ref = tip_generate(ca, seed_for_endpoint(ca, 0.0))
    assert sup_distance(imgs[0].past, ref.past, GRID) <= 1e-6


def test_composition(cc, g, ca):
    rep = composition_check(cc, g, ca, [-2.0, -0.5, 0.0, 0.5, 1.0])
    assert rep.passed, rep.violations
    assert rep.endpoints == [-2.0, -0.5, 0.0, 0.5, 1.0]


def test_profile_cc_to_g(cc, g):
    prof = jhat_profile(cc, g, list(np.linspace(-2, 1, 13)))
    assert len(prof.continuity_breaks) == 1
    b = prof.continuity_breaks[0]
    assert abs(b.at) < 1e-6
    assert (b.left_limit, b.right_limit) == ("Strain_member(-1)", "Strain_member(-0.5)")
    assert len(prof.unreached_targets) == 31
    assert not prof.non_injective_groups
    md = prof.markdown()
    assert "break at T" in md


def test_profile_self_map_clean(g):
    prof = jhat_profile(g, g, list(np.linspace(-2, 1, 13)))
    assert not prof.continuity_breaks and not prof.non_injective_groups and not prof.unreached_targets


def test_profile_g_to_ca_collides(g, ca):
    strain_seeds = list(np.linspace(-1, -0.5, 9))
    prof = jhat_profile(g, ca, [-1.0, 0.0, 1.0], extra_seeds=strain_seeds)
    assert any(len(grp) == 9 for grp in prof.non_injective_groups)
    assert not prof.continuity_breaks
