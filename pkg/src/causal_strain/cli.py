"""Command-line entry point.

Subcommands write plot-ready CSV and JSON into ``--out`` (created if missing).
Every JSON output carries the fully resolved scenario under ``"scenario"``;
CSV files keep their bare column headers and are listed, with the scenario,
in the JSON index written next to them.

Exit codes: 0 success, 1 a checked claim or invariant failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import acceptance, confmap
from .cboundary import PairClass, atlas_iso_check, build_atlas, quotient_strain
from .conefield import InvalidInput, by_name
from .gridoracle import build_oracle, crosscheck
from .jmap import composition_check, jhat_profile, require_nested
from .nullflow import X, Y, endpoint_of, integrate_null, seed_for_endpoint, through, write_curve_csv
from .scenario import Scenario, expand

log = logging.getLogger("causal_strain")

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def _plain(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, (tuple, set)):
        return list(o)
    raise TypeError(f"not serialisable: {type(o).__name__}")


def write_json(path: Path, payload: dict, scenario: Scenario) -> None:
    doc = dict(payload)
    doc["scenario"] = scenario.to_dict()
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True, default=_plain, allow_nan=True)
        fh.write("\n")


# -- curves -----------------------------------------------------------------------

def cmd_curves(sc: Scenario, out: Path) -> int:
    g = by_name("g")
    cdir = out / "curves"
    cdir.mkdir(parents=True, exist_ok=True)
    index = []
    for i, t in enumerate(sc.x_seeds):
        curve = integrate_null(g, X, (-1.0, t), sc.window, sc.tol)
        name = f"X_{i:03d}.csv"
        write_curve_csv(curve, cdir / name)
        ep = endpoint_of(g, curve)
        index.append({"file": name, "family": X, "seed": [t, -1.0], "endpoint_T": ep.T,
                      "slope_limit": ep.slope_limit})
    if sc.data["write_y_curves"]:
        for i, p in enumerate(sc.y_seeds):
            curve = through(g, Y, p, sc.window, sc.tol)
            name = f"Y_{i:03d}.csv"
            write_curve_csv(curve, cdir / name)
            index.append({"file": name, "family": Y, "seed": [p.t, p.x], "right_limit": curve.right_limit})
    write_json(cdir / "index.json", {"metric": g.name, "curves": index}, sc)
    print(f"wrote {len(index)} curve files to {cdir}")
    return EXIT_OK


# -- boundary ---------------------------------------------------------------------

def _boundary_invariants(ctx: acceptance.Context) -> tuple[dict, list[str]]:
    sc = ctx.sc
    fails = []
    ag, acc_, aca = ctx.atlas_g, ctx.atlas_cc, ctx.atlas_ca
    n_strain = len(sc.strain_seeds)
    sizes = {repr(T): len(m) for T, m in ag.strain_groups.items()}
    if n_strain > 1 and sizes != {"0.0": n_strain}:
        fails.append(f"g strain groups {sizes}, expected {n_strain} members at endpoint 0")
    for a in (acc_, aca):
        if a.strain_groups:
            fails.append(f"{a.metric.name} has strain groups")
    iso = atlas_iso_check(aca, acc_)
    if not iso.passed:
        fails.append("g_ca atlas is not isomorphic to the g_cc atlas under T -> T")
    for a in (ag, acc_, aca):
        mat = a.relation_matrix("T_Str")
        if any(c is PairClass.INDETERMINATE for row in mat for c in row):
            fails.append(f"{a.metric.name}: indeterminate relations on the T-line")
        jm = a.relation_matrix("Jplus")
        if any(c not in (PairClass.HORISMOS, PairClass.EQUAL) for row in jm for c in row):
            fails.append(f"{a.metric.name}: null-infinity members not pairwise horismotic")
    return {"strain_sizes": sizes, "iso_ca_cc": iso.to_dict()}, fails


def cmd_boundary(sc: Scenario, out: Path) -> int:
    ctx = acceptance.Context(sc)
    out.mkdir(parents=True, exist_ok=True)
    summary, fails = _boundary_invariants(ctx)
    for a in (ctx.atlas_g, ctx.atlas_cc, ctx.atlas_ca):
        name = a.metric.name
        payload = a.to_dict()
        payload["invariants"] = {"failures": fails, **summary}
        write_json(out / f"atlas_{name}.json", payload, sc)
        a.write_relations_csv(out / f"relations_{name}_T_Str.csv", "T_Str")
        a.write_relations_csv(out / f"relations_{name}_Jplus.csv", "Jplus")
    for f in fails:
        print(f"invariant failed: {f}")
    print(f"atlases written to {out}; strain sizes {summary['strain_sizes']}")
    return EXIT_FAIL if fails else EXIT_OK


# -- jmap -------------------------------------------------------------------------

def _target_atlas(sc: Scenario, m2, endpoints):
    seeds = sc.x_seeds + [seed_for_endpoint(m2, T) for T in endpoints if T != 0.0]
    return build_atlas(m2, seeds, (), sc.tol)


def cmd_jmap(sc: Scenario, out: Path, source: str | None = None, target: str | None = None) -> int:
    out.mkdir(parents=True, exist_ok=True)
    Ts = sc.T_samples
    if source or target:
        m1, m2 = by_name(source or "g"), by_name(target or "g")
        require_nested(m1, m2)
        prof = jhat_profile(m1, m2, Ts, target_atlas=_target_atlas(sc, m2, Ts), tol=sc.tol)
        write_json(out / "jmap.json", {"profiles": [prof.to_dict()], "claims": {}}, sc)
        (out / "jmap.md").write_text("# Boundary map diagnostics\n\n" + prof.markdown())
        print(prof.markdown())
        return EXIT_OK

    g, cc, ca = by_name("g"), by_name("g_cc"), by_name("g_ca")
    p_cc = jhat_profile(cc, g, Ts, target_atlas=_target_atlas(sc, g, Ts), tol=sc.tol)
    p_ca = jhat_profile(g, ca, Ts, extra_seeds=sc.strain_seeds, target_atlas=_target_atlas(sc, ca, Ts),
                        tol=sc.tol)
    jm = sc.section("jmap")
    comp = composition_check(cc, g, ca, expand(jm["composition_T"]), sc.tol, jm["bound_tol"])
    ctx = acceptance.Context(sc)
    q_iso = atlas_iso_check(quotient_strain(ctx.atlas_g), ctx.atlas_cc)

    b = p_cc.continuity_breaks
    n_strain = len(sc.strain_seeds)
    claims = {
        "cc_break_at_zero": len(b) == 1 and abs(b[0].at) <= 1e-6,
        "ca_collision_group": any(len(grp) >= n_strain for grp in p_ca.non_injective_groups),
        "composition_pass": comp.passed,
        "quotient_iso_pass": q_iso.passed,
    }
    write_json(out / "jmap.json", {"profiles": [p_cc.to_dict(), p_ca.to_dict()],
                                   "composition": comp.to_dict(), "quotient_iso": q_iso.to_dict(),
                                   "claims": claims}, sc)
    md = ["# Boundary map diagnostics", "", p_cc.markdown(), p_ca.markdown(), "### claims", ""]
    md += [f"- {k}: {'pass' if v else 'FAIL'}" for k, v in claims.items()]
    (out / "jmap.md").write_text("\n".join(md) + "\n")
    for k, v in claims.items():
        print(f"{k}: {'pass' if v else 'FAIL'}")
    return EXIT_OK if all(claims.values()) else EXIT_FAIL


# -- confmap ----------------------------------------------------------------------

def cmd_confmap(sc: Scenario, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    c = sc.section("confmap")
    ctx = acceptance.Context(sc)
    rows = confmap.map_cloud(ctx.g, confmap.sample_cloud(c["n_points"], sc.seed, c["bbox"]),
                             angle=c["angle"], radius=c["radius"], tol=sc.tol)
    confmap.write_cloud_csv(rows, out / "cloud.csv")
    m = acceptance.conformal_checks(ctx, rows)
    ok = (m["max_interface_gap"] <= c["continuity_tol"] and m["outside_target"] == 0
          and m["wrong_region"] == 0 and m["x_curves_passed"])
    write_json(out / "confmap.json", {"files": ["cloud.csv"], "measurements": m, "passed": ok}, sc)
    print(f"interface gap {m['max_interface_gap']:.3g}, outside target {m['outside_target']}, "
          f"wrong region {m['wrong_region']}, X curves passed {m['x_curves_passed']}, "
          f"Y deviation {m['y_max_dev']:.3g} (informational)")
    return EXIT_OK if ok else EXIT_FAIL


# -- oracle -----------------------------------------------------------------------

def cmd_oracle(sc: Scenario, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    o = sc.section("oracle")
    reports = []
    for name in sc.data["metrics"]:
        m = by_name(name)
        rep = crosscheck(m, build_oracle(m, o["bbox"], o["h"], o["t_sub"], sc.margin), o["n_samples"], sc.seed)
        reports.append(rep.to_dict())
        print(f"{name}: {len(rep.violations)} violations, {rep.disagreements_in_band} disagreements in band")
    write_json(out / "oracle.json", {"reports": reports}, sc)
    return EXIT_OK if all(r["passed"] for r in reports) else EXIT_FAIL


# -- verify -----------------------------------------------------------------------

def cmd_verify(sc: Scenario, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    results = acceptance.run_all(sc)
    for r in results:
        print(r.line())
    (out / "report.md").write_text(acceptance.report_markdown(results, sc))
    write_json(out / "verify.json", {"criteria": [r.to_dict() for r in results],
                                     "passed": all(r.passed for r in results)}, sc)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="causal-strain", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file overriding the shipped defaults")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    common.add_argument("--tol", type=float, help="integrator tolerance")
    common.add_argument("--seed", type=int, help="RNG seed for sampled pairs and clouds")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("curves", parents=[common], help="integrate the configured null curves of g")
    sub.add_parser("boundary", parents=[common], help="boundary atlases for g_cc, g and g_ca")
    pj = sub.add_parser("jmap", parents=[common], help="diagnostics of the boundary maps")
    pj.add_argument("--source", help="run a single profile from this metric")
    pj.add_argument("--target", help="run a single profile into this metric")
    sub.add_parser("confmap", parents=[common], help="map a point cloud into the flat target region")
    sub.add_parser("oracle-check", parents=[common], help="cross-check chronology against the lattice oracle")
    sub.add_parser("verify", parents=[common], help="run all acceptance criteria and write report.md")
    return ap


def load_scenario(args) -> Scenario:
    over = {}
    if args.config is not None:
        try:
            over = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(over, dict):
            raise InvalidInput("config must be a JSON object")
    if args.tol is not None:
        over["tol"] = args.tol
    if args.seed is not None:
        over["seed"] = args.seed
    return Scenario.from_dict(over)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        sc = load_scenario(args)
        if args.command == "curves":
            return cmd_curves(sc, args.out)
        if args.command == "boundary":
            return cmd_boundary(sc, args.out)
        if args.command == "jmap":
            return cmd_jmap(sc, args.out, args.source, args.target)
        if args.command == "confmap":
            return cmd_confmap(sc, args.out)
        if args.command == "oracle-check":
            return cmd_oracle(sc, args.out)
        return cmd_verify(sc, args.out)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
