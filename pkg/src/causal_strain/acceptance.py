"""The ten acceptance criteria as runnable checks with measured values.

Each runner takes a :class:`Context` (a Scenario plus cached shared objects)
and returns a :class:`CriterionResult`.  Nothing here loosens a tolerance:
the thresholds come from the scenario and default to the stated targets.
"""

from __future__ import annotations

import functools
import itertools
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import confmap
from .cboundary import (PairClass, Verdict, atlas_iso_check, build_atlas, quotient_strain, relate,
                        tip_generate)
from .chronology import past_of_point, sup_distance
from .conefield import ConeField, Point, by_name, minkowski, narrow, strain
from .gridoracle import build_oracle, crosscheck
from .jmap import composition_check, jhat, jhat_law_cc, jhat_profile
from .nullflow import X, Y, default_grid, endpoint_of, integrate_null, seed_for_endpoint, through
from .scenario import Scenario, expand


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: dict = field(default_factory=dict)
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        return f"criterion {self.number:2d} [{'PASS' if self.passed else 'FAIL'}] {self.title}: {self.detail}"

    def to_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "measured": self.measured, "detail": self.detail}


class Context:
    """Scenario plus lazily built objects shared between criteria."""

    def __init__(self, scenario: Scenario):
        self.sc = scenario
        self.g, self.cc, self.ca = strain(), minkowski(), narrow()

    @functools.cached_property
    def atlas_g(self):
        return build_atlas(self.g, self.sc.x_seeds, self.sc.y_seeds, self.sc.tol)

    def endpoint_atlas(self, metric: ConeField, endpoints):
        """Atlas of a constant-cone metric with one T-line TIP per given endpoint."""
        return build_atlas(metric, [seed_for_endpoint(metric, T) for T in endpoints], self.sc.y_seeds,
                           self.sc.tol)

    @functools.cached_property
    def atlas_cc(self):
        return self.endpoint_atlas(self.cc, self.atlas_g.endpoints())

    @functools.cached_property
    def atlas_ca(self):
        return self.endpoint_atlas(self.ca, self.atlas_g.endpoints())


def _exact_solutions(ctx: Context) -> CriterionResult:
    acc = ctx.sc.section("acceptance")
    lo, hi = acc["exact_window"]
    tol_target = acc["exact_tol"]
    errs = {}
    for t_seed, k in ((-1.0, 1.0), (-0.5, 0.5)):
        curve = integrate_null(ctx.g, X, (-1.0, t_seed), ctx.sc.window, ctx.sc.tol)
        s_own, _ = curve.samples()
        s = np.union1d(default_grid(lo, hi, 400), s_own[(s_own >= lo) & (s_own <= hi)])
        errs[repr(t_seed)] = float(np.max(np.abs(curve.value(s) - k * s)))
    ok = all(e <= tol_target for e in errs.values())
    return CriterionResult(1, "exact null solutions", ok, {"max_error": errs, "target": tol_target},
                           f"max|r-s| = {errs['-1.0']:.3g}, max|r-s/2| = {errs['-0.5']:.3g} (<= {tol_target:g})")


def _expected_endpoint(t: float) -> float:
    if t <= -1.0:
        return t + 1.0
    if t >= -0.5:
        return t + 0.5
    return 0.0


def _endpoint_law(ctx: Context) -> CriterionResult:
    acc = ctx.sc.section("acceptance")
    rows, worst = [], 0.0
    for t in acc["endpoint_seeds"]:
        ep = endpoint_of(ctx.g, integrate_null(ctx.g, X, (-1.0, float(t)), ctx.sc.window, ctx.sc.tol))
        err = abs(ep.T - _expected_endpoint(t)) if ep.attached else float("inf")
        worst = max(worst, err)
        rows.append({"t": t, "T": ep.T, "expected": _expected_endpoint(t), "error": err})
    ok = worst <= acc["endpoint_tol"]
    return CriterionResult(2, "endpoint law", ok, {"rows": rows, "max_error": worst},
                           f"{len(rows)} seeds, max error {worst:.3g} (<= {acc['endpoint_tol']:g})")


def _non_crossing(ctx: Context) -> CriterionResult:
    acc = ctx.sc.section("acceptance")
    seeds = sorted(expand(acc["family"]))
    s_min, x_stop = ctx.sc.window
    grid = default_grid(s_min, x_stop, 400)
    R = np.array([integrate_null(ctx.g, X, (-1.0, t), ctx.sc.window, ctx.sc.tol).value(grid) for t in seeds])
    gaps = np.diff(R, axis=0)
    ordered = bool(np.all(gaps > 0))
    wedge = [i for i, t in enumerate(seeds) if -1.0 < t < -0.5]
    trapped = all(np.all((grid < R[i]) & (R[i] < grid / 2)) for i in wedge)
    ok = ordered and trapped
    return CriterionResult(3, "non-crossing and trapping", ok,
                           {"seeds": len(seeds), "samples": int(grid.size), "min_gap": float(gaps.min()),
                            "wedge_seeds": len(wedge), "trapped": trapped},
                           f"{len(seeds)} curves strictly ordered at {grid.size} samples: {ordered}; "
                           f"{len(wedge)} wedge seeds trapped: {trapped}")


def _strain(ctx: Context) -> CriterionResult:
    n_seeds = len(ctx.sc.strain_seeds)
    members = ctx.atlas_g.strain_groups.get(0.0, [])
    ok = len(members) == n_seeds and all(m.endpoint.T == 0.0 for m in members)
    bad = []
    for a, b in itertools.combinations(members, 2):
        rep = relate(ctx.g, a, b, ctx.atlas_g.search)
        good = (rep.cls is PairClass.HORISMOS and rep.inc12.subset and rep.inc12.strict
                and rep.e12.verdict is Verdict.FALSE and rep.e21.verdict is Verdict.FALSE
                and rep.e12.certificate is not None and rep.e21.certificate is not None)
        if not good:
            bad.append([a.seed, b.seed, rep.cls.value])
    ok = ok and not bad
    pairs = len(members) * (len(members) - 1) // 2
    return CriterionResult(4, "strain existence and horismos", ok,
                           {"members": len(members), "pairs": pairs, "failures": bad[:10]},
                           f"{len(members)}/{n_seeds} distinct TIPs at endpoint 0, "
                           f"{pairs - len(bad)}/{pairs} pairs strict inclusion + horismos")


def _timelike(ctx: Context) -> CriterionResult:
    acc = ctx.sc.section("acceptance")
    rng = np.random.default_rng(ctx.sc.seed)
    lo, hi = acc["timelike_range"]
    measured, ok = {}, True
    for metric in (ctx.cc, ctx.ca):
        good = 0
        pairs = np.sort(rng.uniform(lo, hi, (acc["timelike_pairs"], 2)), axis=1)
        for T1, T2 in pairs:
            P1 = tip_generate(metric, seed_for_endpoint(metric, T1), ctx.sc.tol)
            P2 = tip_generate(metric, seed_for_endpoint(metric, T2), ctx.sc.tol)
            rep = relate(metric, P1, P2, ctx.atlas_g.search)
            w = rep.e12.witness if rep.e12 is not None else None
            if rep.cls is PairClass.TIMELIKE_FORWARD and w is not None and _witness_holds(metric, P1, P2, w, ctx):
                good += 1
        measured[metric.name] = {"pairs": len(pairs), "timelike_forward_verified": good}
        ok = ok and good == len(pairs)
    return CriterionResult(5, "T-line timelike for g_cc and g_ca", ok, measured,
                           ", ".join(f"{k}: {v['timelike_forward_verified']}/{v['pairs']}" for k, v in measured.items()))


def _witness_holds(metric, P1, P2, w: Point, ctx: Context) -> bool:
    """Independent recheck: w lies in P2 and P1 lies under the dense past cone of w."""
    grid = ctx.atlas_g.grid
    if not w.t < P2.past(w.x):
        return False
    cone = past_of_point(metric, w, ctx.sc.window, ctx.sc.tol)
    return bool(np.all(P1.values(grid) < np.asarray(cone(grid))))


def _jhat_cc(ctx: Context) -> CriterionResult:
    jm = ctx.sc.section("jmap")
    Ts = ctx.sc.T_samples
    worst = 0.0
    grid = ctx.atlas_g.grid
    for T in Ts:
        src = tip_generate(ctx.cc, seed_for_endpoint(ctx.cc, T), ctx.sc.tol)
        ref = tip_generate(ctx.g, jhat_law_cc(T), ctx.sc.tol)
        worst = max(worst, sup_distance(jhat(ctx.cc, ctx.g, src, ctx.sc.tol).past, ref.past, grid))
    law_ok = worst <= jm["law_tol"]

    target = build_atlas(ctx.g, ctx.sc.x_seeds + [seed_for_endpoint(ctx.g, T) for T in Ts if T != 0.0],
                         (), ctx.sc.tol)
    prof = jhat_profile(ctx.cc, ctx.g, Ts, target_atlas=target, tol=ctx.sc.tol)
    breaks = prof.continuity_breaks
    one = len(breaks) == 1
    b = breaks[0] if one else None
    at_zero = one and abs(b.at) <= 1e-6
    limits_ok = one and (b.left_limit, b.right_limit) == ("Strain_member(-1)", "Strain_member(-0.5)") \
        and b.left_verdict == b.right_verdict == "converges"
    interior = sorted(str(m.label) for m in target.strain_groups.get(0.0, []) if -1.0 < m.seed < -0.5)
    reach_ok = sorted(prof.unreached_targets) == interior
    ok = law_ok and one and at_zero and limits_ok and reach_ok
    detail = (f"law error {worst:.3g} (<= {jm['law_tol']:g}); {len(breaks)} break(s)"
              + (f" at T={b.at:.3g}, limits {b.left_limit} / {b.right_limit} ({b.left_verdict}/{b.right_verdict})" if one else "")
              + f"; unreached {len(prof.unreached_targets)} = strain interior {len(interior)}: {reach_ok}")
    return CriterionResult(6, "jhat_cc law and discontinuity", ok,
                           {"law_max_error": worst, "breaks": [x.to_dict() for x in breaks],
                            "unreached": prof.unreached_targets, "strain_interior": interior}, detail)


def _jhat_ca(ctx: Context) -> CriterionResult:
    jm = ctx.sc.section("jmap")
    members = ctx.atlas_g.strain_groups.get(0.0, [])
    grid = ctx.atlas_g.grid
    vals = np.array([jhat(ctx.g, ctx.ca, P, ctx.sc.tol).values(grid) for P in members])
    spread = float(np.max(vals.max(axis=0) - vals.min(axis=0))) if len(vals) else float("inf")
    comp = composition_check(ctx.cc, ctx.g, ctx.ca, expand(jm["composition_T"]), ctx.sc.tol, jm["bound_tol"])
    ok = len(members) > 0 and spread <= jm["bound_tol"] and comp.passed
    return CriterionResult(7, "jhat_ca collapse and composition", ok,
                           {"strain_members": len(members), "max_pairwise": spread, "composition": comp.to_dict()},
                           f"{len(members)} strain images, max pairwise distance {spread:.3g} "
                           f"(<= {jm['bound_tol']:g}); composition passed: {comp.passed} "
                           f"(max deviation {comp.max_deviation:.3g})")


def _quotient(ctx: Context) -> CriterionResult:
    with_q = atlas_iso_check(quotient_strain(ctx.atlas_g), ctx.atlas_cc)
    without = atlas_iso_check(ctx.atlas_g, ctx.atlas_cc)
    ok = with_q.passed and not without.passed
    return CriterionResult(8, "quotient embedding", ok,
                           {"quotient": with_q.to_dict(), "raw_violations": without.violations[:5]},
                           f"quotient iso passed: {with_q.passed} ({with_q.pairs_checked} pairs); "
                           f"raw atlas iso fails: {not without.passed} ({len(without.violations)} violations)")


def _oracle(ctx: Context) -> CriterionResult:
    o = ctx.sc.section("oracle")
    measured, ok = {}, True
    for name in ctx.sc.data["metrics"]:
        m = by_name(name)
        orc = build_oracle(m, o["bbox"], o["h"], o["t_sub"], ctx.sc.margin)
        rep = crosscheck(m, orc, o["n_samples"], ctx.sc.seed)
        measured[name] = {k: v for k, v in rep.to_dict().items() if k != "violations"}
        measured[name]["violations"] = len(rep.violations)
        ok = ok and rep.passed
    return CriterionResult(9, "oracle cross-validation", ok, measured,
                           ", ".join(f"{k}: {v['violations']} violations, {v['disagreements_in_band']} in band"
                                     for k, v in measured.items()))


def conformal_checks(ctx: Context, rows=None) -> dict:
    """All measurements for the conformal map; shared with the confmap command."""
    c = ctx.sc.section("confmap")
    opts = {"angle": c["angle"], "radius": c["radius"], "tol": ctx.sc.tol}
    probes = confmap.interface_probes(ctx.g, c["probe_x"], c["probe_eps"], **opts)
    gap = max(p.gap for p in probes)
    if rows is None:
        rows = confmap.map_cloud(ctx.g, confmap.sample_cloud(c["n_points"], ctx.sc.seed, c["bbox"]), **opts)
    outside = sum(not confmap.in_target(q) for _, _, q in rows)
    wrong = sum(reg not in confmap.target_region(q) for _, reg, q in rows)
    inj = confmap.injectivity_violations(rows)
    grid = np.asarray(expand(c["curve_grid"]))
    shape = {"angle": c["angle"], "radius": c["radius"]}
    xrep = [confmap.nullcheck_f(ctx.g, integrate_null(ctx.g, X, (-1.0, t), ctx.sc.window, ctx.sc.tol),
                                c["slope_tol"], grid, **shape) for t in c["x_curves"]]
    yrep = [confmap.nullcheck_f(ctx.g, through(ctx.g, Y, Point(*p), ctx.sc.window, ctx.sc.tol),
                                c["slope_tol"], grid, **shape) for p in c["y_curves"]]
    ydev = max((max(r.max_dev.values(), default=0.0) for r in yrep), default=0.0)
    return {"max_interface_gap": gap, "points": len(rows), "outside_target": outside,
            "wrong_region": wrong, "injectivity_violations": inj,
            "x_curves_passed": all(r.passed for r in xrep),
            "x_max_dev_BC": max((max(r.max_dev.get(k, 0.0) for k in "BC") for r in xrep), default=0.0),
            "y_max_dev": ydev,
            "x_reports": [r.to_dict() for r in xrep], "y_reports": [r.to_dict() for r in yrep]}


def _conformal(ctx: Context) -> CriterionResult:
    c = ctx.sc.section("confmap")
    m = conformal_checks(ctx)
    ok = (m["max_interface_gap"] <= c["continuity_tol"] and m["outside_target"] == 0
          and m["wrong_region"] == 0 and m["x_curves_passed"])
    return CriterionResult(10, "conformal map", ok, m,
                           f"interface gap {m['max_interface_gap']:.3g} (<= {c['continuity_tol']:g}); "
                           f"{m['points'] - m['outside_target']}/{m['points']} images in target, "
                           f"{m['wrong_region']} in a wrong region; X slope error in B/C {m['x_max_dev_BC']:.3g} "
                           f"(<= {c['slope_tol']:g}); Y deviation {m['y_max_dev']:.3g} (informational)")


RUNNERS: dict[int, Callable[[Context], CriterionResult]] = {
    1: _exact_solutions, 2: _endpoint_law, 3: _non_crossing, 4: _strain, 5: _timelike,
    6: _jhat_cc, 7: _jhat_ca, 8: _quotient, 9: _oracle, 10: _conformal,
}


def run_criterion(n: int, ctx: Context) -> CriterionResult:
    t0 = time.perf_counter()
    res = RUNNERS[n](ctx)
    res.seconds = time.perf_counter() - t0
    return res


def run_all(scenario: Scenario, only=None) -> list[CriterionResult]:
    ctx = Context(scenario)
    return [run_criterion(n, ctx) for n in (only or sorted(RUNNERS))]


def report_markdown(results: list[CriterionResult], scenario: Scenario) -> str:
    import json
    n_ok = sum(r.passed for r in results)
    lines = ["# Acceptance report", "", f"{n_ok}/{len(results)} criteria passed.", "",
             "| # | criterion | result | measured |", "|---|---|---|---|"]
    for r in results:
        lines.append(f"| {r.number} | {r.title} | {'pass' if r.passed else 'FAIL'} | {r.detail} |")
    lines += ["", "## Scenario", "", "```json",
              json.dumps(scenario.to_dict(), indent=1, sort_keys=True), "```", ""]
    return "\n".join(lines)
