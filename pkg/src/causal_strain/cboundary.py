"""TIPs, their binary relations and the assembled future boundary.

A TIP is stored as the past set of its generator.  Relations between TIPs:

* inclusion, by boundary-function comparison on a grid;
* extended chronology ``P1 <<bar P2`` (some p' in P2 has P1 inside I^-(p')),
  decided by a witness search or refuted by a certificate;
* horismos: inclusion one way, extended chronology neither way.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .chronology import (CurveBoundary, Inclusion, PastSet, past_of_point, pastset_leq,
                         sup_distance)
from .conefield import DEFAULT_MARGIN, ConeField, InvalidInput, Point, Ternary
from .nullflow import (DEFAULT_TOL, INFINITY, X, Y, Endpoint, NullCurve, Tail, default_grid,
                       endpoint_of, integrate_null, seed_for_endpoint, through)


class PairClass(enum.Enum):
    EQUAL = "EQ"
    TIMELIKE_FORWARD = "TF"
    TIMELIKE_BACKWARD = "TB"
    HORISMOS = "HO"
    UNRELATED = "UN"
    INDETERMINATE = "IN"


@dataclass(frozen=True)
class Label:
    kind: str  # T_point | Strain_member | Jplus_member | i_plus
    value: float | None = None

    def __str__(self):
        if self.value is None:
            return self.kind
        return f"{self.kind}({self.value:.6g})"


@dataclass(frozen=True, eq=False)
class TIP:
    metric: ConeField
    past: PastSet | None
    generator: object
    endpoint: Endpoint
    label: Label | None = None
    seed: object = None  # t_seed for X generators, (t, x) for Y generators

    @property
    def is_i_plus(self) -> bool:
        return self.past is None

    def values(self, grid: np.ndarray) -> np.ndarray:
        if self.past is None:
            raise InvalidInput("i+ has no boundary function")
        return self.past.values(grid)


def i_plus(metric: ConeField) -> TIP:
    return TIP(metric, None, None, INFINITY, Label("i_plus"))


def tip_generate(metric: ConeField, t_seed: float, tol: float = DEFAULT_TOL,
                 window=None) -> TIP:
    """TIP generated by the X-curve with r(-1) = t_seed; its past is the hypograph of the curve."""
    if not math.isfinite(t_seed):
        raise InvalidInput("non-finite seed")
    kw = {} if window is None else {"window": window}
    curve = integrate_null(metric, X, (-1.0, float(t_seed)), tol=tol, **kw)
    ep = endpoint_of(metric, curve)
    return TIP(metric, PastSet(CurveBoundary(curve), "curve", curve), curve, ep,
               Label("T_point", ep.T), float(t_seed))


def tip_generate_J(metric: ConeField, seed: Point, tol: float = DEFAULT_TOL) -> TIP:
    """TIP generated by the Y-curve through ``seed`` (it escapes to x -> -inf)."""
    if not isinstance(seed, Point):
        raise InvalidInput("seed must be a Point")
    curve = through(metric, Y, seed, tol=tol, dense=True)
    return TIP(metric, PastSet(CurveBoundary(curve), "curve", curve), curve, INFINITY,
               Label("Jplus_member", curve.right_limit), (seed.t, seed.x))


# ---------------------------------------------------------------------------
# extended chronology

class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class ExtChron:
    verdict: Verdict
    witness: Point | None = None
    certificate: dict | None = None

    def __bool__(self):
        raise TypeError("ExtChron has three outcomes; inspect .verdict")


@dataclass(frozen=True)
class WitnessSearch:
    offsets: tuple = (0.1, 0.01, 0.001)
    positions: tuple = (-0.001, -0.01, -0.03, -0.1, -0.3, -1.0, -3.0, -10.0)
    grid: np.ndarray | None = None
    margin: float = DEFAULT_MARGIN
    tol: float = DEFAULT_TOL


def default_relation_grid() -> np.ndarray:
    return default_grid(-20.0, -1e-6, 400)


_GRID = default_relation_grid()


def _tail_below(t1: Tail, t2: Tail, margin: float) -> bool:
    """Is t1 eventually below t2 as s -> -inf?"""
    if t1.slope > t2.slope + 1e-12:
        return True
    if t1.slope < t2.slope - 1e-12:
        return False
    return t1.intercept <= t2.intercept + margin


def _check_witness(P1: TIP, cone: PastSet, grid, margin) -> tuple[bool, dict]:
    d = P1.values(grid) - cone.values(grid)
    i = int(np.argmax(d))
    if d[i] > margin:
        return False, {"s": float(grid[i]), "excess": float(d[i])}
    if P1.past.right_limit > cone.right_limit + margin:
        return False, {"s": "0-", "excess": P1.past.right_limit - cone.right_limit}
    if not _tail_below(P1.past.left_tail, cone.left_tail, margin):
        return False, {"s": "-inf", "excess": "tail"}
    return True, {}


def ext_chron(metric: ConeField, P1: TIP, P2: TIP, search: WitnessSearch | None = None) -> ExtChron:
    """Decide P1 <<bar P2.

    Refutations, in order: P1 not inside P2; equal right limits at x -> 0-
    (every p' in P2 has a cone whose right limit is strictly below that of P2);
    P1 unbounded to the left (its boundary falls slower than any cone's).
    Otherwise candidates p' hugging the boundary of P2 from inside are tried.
    """
    search = search or WitnessSearch()
    if P1.metric != metric or P2.metric != metric:
        raise InvalidInput("TIPs belong to different metrics")
    if P1.is_i_plus or P2.is_i_plus:
        raise InvalidInput("i+ is related by definition, not numerically")
    grid = _GRID if search.grid is None else np.asarray(search.grid, float)
    margin = search.margin

    inc = pastset_leq(P1.past, P2.past, grid, margin)
    if not inc.subset:
        return ExtChron(Verdict.FALSE, None, {"reason": "not_subset", "s": inc.worst_s,
                                              "excess": inc.max_excess})
    gap = P2.past.right_limit - P1.past.right_limit
    if gap <= margin:
        return ExtChron(Verdict.FALSE, None, {
            "reason": "right_limit",
            "detail": "every cone of a point of P2 ends strictly below the common limit",
            "limit_P1": P1.past.right_limit, "limit_P2": P2.past.right_limit})
    s_min_cone = math.sqrt(metric.beta_min)
    lt = P1.past.left_tail
    if lt.slope < s_min_cone - 1e-12:
        return ExtChron(Verdict.FALSE, None, {
            "reason": "unbounded",
            "detail": "P1 is not bounded above by any cone as s -> -inf",
            "tail_slope": lt.slope, "min_cone_slope": s_min_cone})

    failures = []
    offsets = sorted({d for d in search.offsets if d < gap} | {gap / 4.0}, reverse=True)
    for s_c in search.positions:
        if not (grid[0] <= s_c < 0):
            continue
        b2 = float(P2.past(s_c))
        for delta in offsets:
            p = Point(b2 - delta, s_c)
            cone = past_of_point(metric, p, (float(grid[0]), float(grid[-1])), search.tol, dense=False)
            ok, info = _check_witness(P1, cone, grid, margin)
            if ok:
                # re-verify with a densely sampled cone
                cone = past_of_point(metric, p, (float(grid[0]), float(grid[-1])), search.tol)
                ok, info = _check_witness(P1, cone, grid, margin)
                if ok:
                    return ExtChron(Verdict.TRUE, p, None)
            failures.append({"candidate": [p.t, p.x], **info})
    clear = all(isinstance(f["excess"], str) or f["excess"] > margin for f in failures)
    if failures and clear:
        return ExtChron(Verdict.FALSE, None, {"reason": "grid", "failures": failures})
    return ExtChron(Verdict.INDETERMINATE, None, {"reason": "inconclusive", "failures": failures})


@dataclass(frozen=True)
class PairReport:
    cls: PairClass
    inc12: Inclusion | None = None
    inc21: Inclusion | None = None
    e12: ExtChron | None = None
    e21: ExtChron | None = None


def relate(metric: ConeField, P1: TIP, P2: TIP, search: WitnessSearch | None = None) -> PairReport:
    search = search or WitnessSearch()
    if P1.metric != metric or P2.metric != metric:
        raise InvalidInput("TIPs belong to different metrics")
    if P1.is_i_plus or P2.is_i_plus:
        # By definition every TIP is a strict subset of V; the T-line is timelike to i+
        # and the null-infinity members are horismotic to it.
        if P1.is_i_plus and P2.is_i_plus:
            return PairReport(PairClass.EQUAL)
        other = P2 if P1.is_i_plus else P1
        if other.endpoint.attached:
            return PairReport(PairClass.TIMELIKE_BACKWARD if P1.is_i_plus else PairClass.TIMELIKE_FORWARD)
        return PairReport(PairClass.HORISMOS)
    grid = _GRID if search.grid is None else np.asarray(search.grid, float)
    inc12 = pastset_leq(P1.past, P2.past, grid, search.margin)
    inc21 = pastset_leq(P2.past, P1.past, grid, search.margin)
    if inc12.subset and inc21.subset:
        return PairReport(PairClass.EQUAL, inc12, inc21)
    e12 = ext_chron(metric, P1, P2, search)
    e21 = ext_chron(metric, P2, P1, search)
    if e12.verdict is Verdict.TRUE:
        cls = PairClass.TIMELIKE_FORWARD
    elif e21.verdict is Verdict.TRUE:
        cls = PairClass.TIMELIKE_BACKWARD
    elif Verdict.INDETERMINATE in (e12.verdict, e21.verdict):
        cls = PairClass.INDETERMINATE
    elif inc12.subset or inc21.subset:
        cls = PairClass.HORISMOS
    else:
        cls = PairClass.UNRELATED
    return PairReport(cls, inc12, inc21, e12, e21)


def classify_pair(metric: ConeField, P1: TIP, P2: TIP, search: WitnessSearch | None = None) -> PairClass:
    return relate(metric, P1, P2, search).cls


# ---------------------------------------------------------------------------
# atlas

@dataclass(eq=False)
class BoundaryAtlas:
    metric: ConeField
    T_line: list  # [(T, TIP)] sorted by T
    strain_groups: dict  # T -> [TIP] ordered by strict inclusion
    Jplus: list  # [TIP] ordered by right limit
    i_plus: TIP
    grid: np.ndarray = field(default_factory=default_relation_grid)
    search: WitnessSearch = field(default_factory=WitnessSearch)
    _relations: dict = field(default_factory=dict, repr=False)

    def endpoints(self) -> list[float]:
        return sorted({T for T, _ in self.T_line} | set(self.strain_groups))

    def members_at(self, T: float) -> list[TIP]:
        if T in self.strain_groups:
            return list(self.strain_groups[T])
        return [tip for T0, tip in self.T_line if T0 == T]

    def tstr_members(self) -> list[TIP]:
        """The sampled T-line with its strains, ordered by endpoint then inclusion."""
        out = []
        for T in self.endpoints():
            out.extend(self.members_at(T))
        return out

    def relation_matrix(self, which: str = "T_Str") -> list[list[PairClass]]:
        if which not in self._relations:
            members = self.tstr_members() if which == "T_Str" else list(self.Jplus)
            n = len(members)
            mat = [[PairClass.EQUAL] * n for _ in range(n)]
            for i in range(n):
                for j in range(i + 1, n):
                    c = classify_pair(self.metric, members[i], members[j], self.search)
                    mat[i][j] = c
                    mat[j][i] = _reverse(c)
            self._relations[which] = mat
        return self._relations[which]

    def to_dict(self, relations: bool = True) -> dict:
        d = {
            "metric": self.metric.name,
            "T_line": [{"T": T, "t_seed": tip.seed} for T, tip in self.T_line],
            "strain": {repr(T): [tip.seed for tip in g] for T, g in self.strain_groups.items()},
            "Jplus": [{"seed": list(tip.seed), "c": tip.past.right_limit} for tip in self.Jplus],
            "members": [str(tip.label) for tip in self.tstr_members()],
        }
        if relations:
            d["relations"] = {
                "T_Str": [[c.value for c in row] for row in self.relation_matrix("T_Str")],
                "Jplus": [[c.value for c in row] for row in self.relation_matrix("Jplus")],
            }
        return d

    def write_json(self, path, extra: dict | None = None) -> None:
        d = self.to_dict()
        if extra:
            d.update(extra)
        with open(path, "w") as fh:
            json.dump(d, fh, indent=1, sort_keys=True)
            fh.write("\n")

    def write_relations_csv(self, path, which: str = "T_Str") -> None:
        members = self.tstr_members() if which == "T_Str" else self.Jplus
        mat = self.relation_matrix(which)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([""] + [str(m.label) for m in members])
            for m, row in zip(members, mat):
                w.writerow([str(m.label)] + [c.value for c in row])


def _reverse(c: PairClass) -> PairClass:
    if c is PairClass.TIMELIKE_FORWARD:
        return PairClass.TIMELIKE_BACKWARD
    if c is PairClass.TIMELIKE_BACKWARD:
        return PairClass.TIMELIKE_FORWARD
    return c


def _inclusion_sort(tips: list[TIP], grid) -> list[TIP]:
    return sorted(tips, key=lambda tip: float(np.sum(tip.values(grid))))


def build_atlas(metric: ConeField, t_grid: Sequence[float], j_grid: Sequence = (),
                tol: float = DEFAULT_TOL, grid: np.ndarray | None = None,
                search: WitnessSearch | None = None) -> BoundaryAtlas:
    """Generate TIPs over the seed grids and group them by endpoint.

    Two TIPs at one endpoint are distinct iff their boundaries differ by more
    than ``10 * tol`` somewhere on the grid; an endpoint owning two or more
    distinct TIPs is a strain, ordered by strict inclusion.
    """
    if len(t_grid) == 0:
        raise InvalidInput("empty t_grid")
    grid = default_relation_grid() if grid is None else np.asarray(grid, float)
    search = search or WitnessSearch(grid=grid, tol=tol)
    eq_tol = 10.0 * tol

    tips = [tip_generate(metric, t, tol) for t in t_grid]
    groups: dict[float, list[TIP]] = {}
    for tip in sorted(tips, key=lambda tp: tp.endpoint.T):
        key = next((T for T in groups if abs(T - tip.endpoint.T) <= 1e-12 * max(1.0, abs(T))),
                   tip.endpoint.T)
        members = groups.setdefault(key, [])
        if all(sup_distance(tip.past, m.past, grid) > eq_tol for m in members):
            members.append(tip)

    T_line, strain = [], {}
    for T in sorted(groups):
        members = groups[T]
        if len(members) == 1:
            T_line.append((T, replace(members[0], label=Label("T_point", T))))
        else:
            ordered = _inclusion_sort(members, grid)
            for a, b in zip(ordered, ordered[1:]):
                inc = pastset_leq(a.past, b.past, grid, eq_tol)
                if not (inc.subset and inc.strict):
                    raise InvalidInput(f"members at endpoint {T} are not nested")
            strain[T] = [replace(tp, label=Label("Strain_member", tp.seed)) for tp in ordered]

    jtips = []
    for sd in j_grid:
        p = sd if isinstance(sd, Point) else Point(float(sd[0]), float(sd[1]))
        tip = tip_generate_J(metric, p, tol)
        if all(sup_distance(tip.past, m.past, grid) > eq_tol for m in jtips):
            jtips.append(tip)
    jtips.sort(key=lambda tp: tp.past.right_limit)
    return BoundaryAtlas(metric, T_line, strain, jtips, i_plus(metric), grid, search)


def quotient_strain(atlas: BoundaryAtlas) -> BoundaryAtlas:
    """Collapse every strain to its inclusion-maximal member."""
    T_line = list(atlas.T_line)
    for T, members in atlas.strain_groups.items():
        T_line.append((T, replace(members[-1], label=Label("T_point", T))))
    T_line.sort(key=lambda e: e[0])
    return BoundaryAtlas(atlas.metric, T_line, {}, list(atlas.Jplus), atlas.i_plus,
                         atlas.grid, atlas.search)


# ---------------------------------------------------------------------------
# topology surrogate and isomorphism check

class LimitVerdict(enum.Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class LimitResult:
    verdict: LimitVerdict
    distances: tuple


def limit_grid() -> np.ndarray:
    return -np.geomspace(4.0, 1e-6, 200)


def chron_limit(sequence: Sequence[TIP], candidate: TIP, grid: np.ndarray | None = None,
                conv_tol: float = 1e-3) -> LimitResult:
    """Pointwise convergence of boundary functions on a compact window of s.

    Converges when the distances to the candidate eventually decrease and end
    below ``conv_tol``; diverges when they eventually grow and end above it.
    """
    if len(sequence) == 0:
        raise InvalidInput("empty sequence")
    grid = limit_grid() if grid is None else np.asarray(grid, float)
    if any(tp.metric != candidate.metric for tp in sequence):
        raise InvalidInput("sequence and candidate belong to different metrics")
    bc = np.asarray(candidate.past(grid), float)
    d = np.array([float(np.max(np.abs(np.asarray(tp.past(grid), float) - bc))) for tp in sequence])
    tail = d[len(d) // 2:] if len(d) > 1 else d
    steps = np.diff(tail)
    slack = 1e-12 * max(1.0, float(np.max(d)))
    if d[-1] <= conv_tol and np.all(steps <= slack):
        v = LimitVerdict.CONVERGES
    elif d[-1] > conv_tol and np.all(steps >= -slack):
        v = LimitVerdict.DIVERGES
    else:
        v = LimitVerdict.INDETERMINATE
    return LimitResult(v, tuple(float(x) for x in d))


@dataclass
class IsoReport:
    passed: bool
    violations: list
    endpoints: tuple
    horismos_counts: tuple
    pairs_checked: int = 0

    def to_dict(self):
        return {"passed": self.passed, "violations": list(self.violations),
                "endpoints": [list(e) for e in self.endpoints],
                "horismos_counts": list(self.horismos_counts), "pairs_checked": self.pairs_checked}


def _horismos_count(atlas: BoundaryAtlas) -> int:
    mat = atlas.relation_matrix("T_Str")
    n = len(mat)
    return sum(mat[i][j] is PairClass.HORISMOS for i in range(n) for j in range(i + 1, n))


def atlas_iso_check(a1: BoundaryAtlas, a2: BoundaryAtlas,
                    pairing: Callable[[float], float] | None = None, tol: float = 1e-9) -> IsoReport:
    """Check that ``pairing`` induces a relation-preserving bijection of the sampled T-lines.

    Also compares the number of horismotic pairs, which any bijection between
    the two samples would have to preserve.
    """
    pairing = pairing or (lambda T: T)
    v = []
    E1, E2 = a1.endpoints(), a2.endpoints()
    images = [pairing(T) for T in E1]
    matched = []
    for T, T2 in zip(E1, images):
        hit = [E for E in E2 if abs(E - T2) <= tol * max(1.0, abs(T2))]
        if not hit:
            v.append(f"endpoint {T!r} has no partner (image {T2!r})")
        matched.append(hit[0] if hit else None)
    if len(E1) != len(E2):
        v.append(f"endpoint counts differ: {len(E1)} vs {len(E2)}")
    if any(m is not None and n is not None and not m < n for m, n in zip(matched, matched[1:])):
        v.append("pairing does not preserve the endpoint order")

    cardinality_ok = True
    for T, T2 in zip(E1, matched):
        if T2 is None:
            continue
        n1, n2 = len(a1.members_at(T)), len(a2.members_at(T2))
        if n1 != n2:
            cardinality_ok = False
            v.append(f"cardinality mismatch at endpoint {T!r}: {n1} vs {n2}")

    h = (_horismos_count(a1), _horismos_count(a2))
    if h[0] != h[1]:
        v.append(f"horismotic pair counts differ: {h[0]} vs {h[1]} (no bijection preserves relations)")

    checked = 0
    if cardinality_ok and None not in matched and len(E1) == len(E2):
        m1 = a1.relation_matrix("T_Str")
        m2 = a2.relation_matrix("T_Str")
        n = len(m1)
        for i in range(n):
            for j in range(i + 1, n):
                checked += 1
                if m1[i][j] is not m2[i][j]:
                    v.append(f"relation mismatch at pair ({i}, {j}): {m1[i][j].value} vs {m2[i][j].value}")
    return IsoReport(not v, v, (tuple(E1), tuple(E2)), h, checked)
