"""The maps P -> I_2^-(P) between future boundaries of cone-nested metrics.

If every cone of m1 lies inside the matching cone of m2, a curve generating a
TIP of m1 is also causal for m2, and its m2-past is a TIP of m2.  Here the
generator is kept on the TIP, so the image is computed directly from it.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cboundary import (TIP, BoundaryAtlas, i_plus, LimitVerdict, atlas_iso_check, build_atlas,
                        chron_limit, default_relation_grid, tip_generate)
from .chronology import past_of_curve, sup_distance
from .conefield import ConeField, ConeRelation, InvalidInput, cone_compare, sample_region
from .nullflow import DEFAULT_TOL, Endpoint, seed_for_endpoint


class ContractViolation(InvalidInput):
    """The cones of the source metric are not inside those of the target."""


@functools.lru_cache(maxsize=None)
def _nested(m1: ConeField, m2: ConeField) -> bool:
    rel = cone_compare(m1, m2, sample_region()).relation
    return rel in (ConeRelation.INCLUDED, ConeRelation.EQUAL)


def require_nested(m1: ConeField, m2: ConeField) -> None:
    if not _nested(m1, m2):
        raise ContractViolation(f"cones of {m1.name} are not inside those of {m2.name}")


def jhat(m1: ConeField, m2: ConeField, P: TIP, tol: float = DEFAULT_TOL) -> TIP:
    """I_2^-(P): the m2-past of P's generator, as a TIP of m2."""
    require_nested(m1, m2)
    if P.metric != m1:
        raise InvalidInput("TIP does not belong to the source metric")
    if P.is_i_plus:
        return TIP(m2, None, None, P.endpoint, P.label)
    if m1 == m2:
        return P
    past = past_of_curve(m2, P.generator, tol=tol)
    ep = P.endpoint
    if ep.attached and ep.T == 0.0:
        x = -1e-6
        ep = Endpoint(True, 0.0, float(past(x)) / x)
    elif ep.attached:
        ep = Endpoint(True, ep.T)
    return TIP(m2, past, P.generator, ep, None, P.seed)


def jhat_law_cc(T: float) -> float:
    """g-seed of the image of the Minkowski T-line TIP with endpoint T."""
    return T - 1.0 if T <= 0.0 else T - 0.5


@dataclass
class JhatRow:
    source: str
    source_T: float
    image_T: float
    match: str  # atlas label, or "Unmatched"
    distance: float

    def to_dict(self):
        return {"source": self.source, "source_T": self.source_T, "image_T": self.image_T,
                "match": self.match, "distance": self.distance}


@dataclass
class JhatTable:
    source: str
    target: str
    rows: list = field(default_factory=list)

    def to_dict(self):
        return {"source": self.source, "target": self.target, "rows": [r.to_dict() for r in self.rows]}


@dataclass
class Break:
    at: float
    bracket: tuple
    left_limit: str
    right_limit: str
    left_verdict: str
    right_verdict: str
    jump: float

    def to_dict(self):
        return dict(self.__dict__, bracket=list(self.bracket))


@dataclass
class JhatProfile:
    table: JhatTable
    continuity_breaks: list
    non_injective_groups: list  # lists of source labels sharing one image
    unreached_targets: list  # target labels
    unmatched: list  # source labels whose image is not an atlas member

    def to_dict(self):
        return {"table": self.table.to_dict(),
                "continuity_breaks": [b.to_dict() for b in self.continuity_breaks],
                "non_injective_groups": self.non_injective_groups,
                "unreached_targets": self.unreached_targets,
                "unmatched": self.unmatched}

    def markdown(self) -> str:
        t = self.table
        lines = [f"### {t.source} -> {t.target}", ""]
        if self.continuity_breaks:
            for b in self.continuity_breaks:
                lines.append(f"- break at T = {b.at:.3g}: left limit {b.left_limit}, "
                             f"right limit {b.right_limit} (jump {b.jump:.3g})")
        else:
            lines.append("- no continuity breaks")
        if self.non_injective_groups:
            for grp in self.non_injective_groups:
                lines.append(f"- {len(grp)} sources share one image: {grp[0]} ... {grp[-1]}")
        else:
            lines.append("- injective on samples")
        if self.unreached_targets:
            lines.append(f"- {len(self.unreached_targets)} targets not reached: "
                         + ", ".join(self.unreached_targets))
        else:
            lines.append("- every sampled target reached")
        if self.unmatched:
            lines.append(f"- {len(self.unmatched)} images outside the sampled target atlas (informational)")
        return "\n".join(lines) + "\n"


DEFAULT_TARGET_SEEDS = tuple(np.linspace(-1.0, -0.5, 33)) + (-3, -2.5, -2, -1.5, -1.2, -0.4, -0.25, 0, 0.5, 1)


def default_target_atlas(m2: ConeField, endpoints: Sequence[float] = (), tol: float = DEFAULT_TOL) -> BoundaryAtlas:
    """Atlas of m2 over the default seeds plus the T-line TIPs ending at ``endpoints``."""
    seeds = list(DEFAULT_TARGET_SEEDS) + [seed_for_endpoint(m2, T) for T in endpoints if T != 0.0]
    return build_atlas(m2, seeds, (), tol)


def source_label(P: TIP) -> str:
    return f"{P.metric.name}[t={P.seed:.6g}, T={P.endpoint.T:.6g}]"


def _nearest(img: TIP, members: list, grid) -> tuple:
    dists = [sup_distance(img.past, m.past, grid) for m in members]
    k = int(np.argmin(dists))
    return members[k], dists[k]


def jhat_profile(m1: ConeField, m2: ConeField, T_samples: Sequence[float],
                 extra_seeds: Sequence[float] = (), target_atlas: BoundaryAtlas | None = None,
                 tol: float = DEFAULT_TOL, match_tol: float | None = None,
                 lipschitz: float = 2.0, bisect_to: float = 1e-9) -> JhatProfile:
    """Map sampled T-line TIPs of m1 and diagnose continuity, injectivity and reach.

    Sources are the m1 TIPs ending at each sampled T plus any extra X seeds.
    A break is suspected between consecutive endpoints when the image distance
    exceeds ``lipschitz * dT`` while the sources themselves stay within that
    bound; it is then located by bisection and its one-sided limits are
    identified with chron_limit.  A target is reached when some source image
    matches it, or a source at its endpoint (including the one with the
    target's own seed) maps onto it, or it is a one-sided limit at a break.
    """
    require_nested(m1, m2)
    if len(T_samples) == 0 and len(extra_seeds) == 0:
        raise InvalidInput("no samples")
    match_tol = 10.0 * tol if match_tol is None else match_tol
    def source(T=None, seed=None):
        seed = seed_for_endpoint(m1, T) if seed is None else seed
        return tip_generate(m1, seed, tol)

    sources = [source(T=T) for T in T_samples] + [source(seed=t) for t in extra_seeds]
    atlas = target_atlas or default_target_atlas(m2, [P.endpoint.T for P in sources], tol)
    grid = atlas.grid
    targets = atlas.tstr_members()
    sources.sort(key=lambda tp: (tp.endpoint.T, float(np.sum(tp.values(grid)))))
    images = [jhat(m1, m2, P, tol) for P in sources]

    table = JhatTable(m1.name, m2.name)
    hits = set()
    unmatched = []
    for P, img in zip(sources, images):
        near, d = _nearest(img, targets, grid)
        ok = d <= match_tol
        if ok:
            hits.add(id(near))
        else:
            unmatched.append(source_label(P))
        table.rows.append(JhatRow(source_label(P), P.endpoint.T, img.endpoint.T,
                                  str(near.label) if ok else "Unmatched", d))

    # injectivity
    groups, used = [], set()
    for i in range(len(images)):
        if i in used:
            continue
        grp = [i] + [j for j in range(i + 1, len(images)) if j not in used
                     and sup_distance(images[i].past, images[j].past, grid) <= match_tol
                     and sup_distance(sources[i].past, sources[j].past, grid) > match_tol]
        if len(grp) > 1:
            used.update(grp)
            groups.append([source_label(sources[k]) for k in grp])

    # continuity
    breaks = []
    limits = set()
    for i in range(len(sources) - 1):
        Ta, Tb = sources[i].endpoint.T, sources[i + 1].endpoint.T
        if Tb == Ta:
            continue
        bound = lipschitz * (Tb - Ta) + match_tol
        if sup_distance(sources[i].past, sources[i + 1].past, grid) > bound:
            continue  # the sources themselves jump; nothing to test for the map
        jump = sup_distance(images[i].past, images[i + 1].past, grid)
        if jump <= bound:
            continue
        left_seq, right_seq = [sources[i]], [sources[i + 1]]
        left_img, right_img = [images[i]], [images[i + 1]]
        a, b = Ta, Tb
        while b - a > bisect_to:
            mid = 0.5 * (a + b)
            Pm = source(T=mid)
            im = jhat(m1, m2, Pm, tol)
            if sup_distance(left_img[-1].past, im.past, grid) >= sup_distance(im.past, right_img[-1].past, grid):
                b = mid
                right_seq.append(Pm); right_img.append(im)
            else:
                a = mid
                left_seq.append(Pm); left_img.append(im)
        L, _ = _nearest(left_img[-1], targets, grid)
        R, _ = _nearest(right_img[-1], targets, grid)
        lv = chron_limit(left_img, L, grid, conv_tol=match_tol + bisect_to * 2)
        rv = chron_limit(right_img, R, grid, conv_tol=match_tol + bisect_to * 2)
        gap = sup_distance(L.past, R.past, grid)
        if gap > match_tol:
            breaks.append(Break(0.5 * (a + b), (a, b), str(L.label), str(R.label),
                                lv.verdict.value, rv.verdict.value, gap))
            for M, res in ((L, lv), (R, rv)):
                if res.verdict is LimitVerdict.CONVERGES:
                    limits.add(id(M))

    # reach
    unreached = []
    for Q in targets:
        if id(Q) in hits or id(Q) in limits:
            continue
        pre = [P for P in sources if P.endpoint.T == Q.endpoint.T] or [source(T=Q.endpoint.T)]
        if Q.seed is not None:
            same_seed = source(seed=Q.seed)
            if same_seed.endpoint.T == Q.endpoint.T:
                pre.append(same_seed)
        if any(sup_distance(jhat(m1, m2, P, tol).past, Q.past, grid) <= match_tol for P in pre):
            continue
        unreached.append(str(Q.label))
    return JhatProfile(table, breaks, groups, unreached, unmatched)


@dataclass
class CompositionReport:
    passed: bool
    violations: list
    endpoints: list
    max_deviation: float
    iso: dict | None = None

    def to_dict(self):
        return {"passed": self.passed, "violations": self.violations, "endpoints": self.endpoints,
                "max_deviation": self.max_deviation, "iso": self.iso}


def composition_check(m_cc: ConeField, m: ConeField, m_ca: ConeField, T_samples: Sequence[float],
                      tol: float = DEFAULT_TOL, bound_tol: float = 1e-6) -> CompositionReport:
    """Check that the two-step map sends the m_cc T-line onto the m_ca T-line by T -> T,
    preserving the pairwise relations."""
    require_nested(m_cc, m)
    require_nested(m, m_ca)
    grid = default_relation_grid()
    v, dev, Ts = [], 0.0, []
    composed = []
    for T in sorted(T_samples):
        P = tip_generate(m_cc, seed_for_endpoint(m_cc, T), tol)
        Q = jhat(m, m_ca, jhat(m_cc, m, P, tol), tol)
        Ts.append(Q.endpoint.T)
        ref = tip_generate(m_ca, seed_for_endpoint(m_ca, T), tol)
        d = sup_distance(Q.past, ref.past, grid)
        dev = max(dev, d)
        if Q.endpoint.T != T:
            v.append(f"endpoint moved: {T!r} -> {Q.endpoint.T!r}")
        if d > bound_tol:
            v.append(f"image at T={T!r} deviates from the {m_ca.name} T-line TIP by {d:.3g}")
        composed.append((T, Q))
    iso = None
    if len(composed) > 1:
        comp_atlas = BoundaryAtlas(m_ca, [(T, q) for T, q in composed], {}, [], i_plus(m_ca), grid)
        ref_atlas = build_atlas(m_ca, [seed_for_endpoint(m_ca, T) for T in sorted(T_samples)], (), tol, grid)
        rep = atlas_iso_check(comp_atlas, ref_atlas)
        iso = rep.to_dict()
        v.extend(rep.violations)
    return CompositionReport(not v, v, Ts, dev, iso)
