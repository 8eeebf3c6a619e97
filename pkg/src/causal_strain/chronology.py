"""Chronological pasts as strict hypographs ``{(t, s): t < b(s)}``.

Every past set in these geometries has a 1-Lipschitz boundary function, so set
relations reduce to comparing functions of ``s`` on a grid plus their
asymptotics at ``s -> -inf`` (tails) and ``s -> 0-`` (right limits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conefield import DEFAULT_MARGIN, ConeField, InvalidInput, Point, Ternary
from .nullflow import (DEFAULT_S_MIN, DEFAULT_TOL, DEFAULT_X_STOP, X, Y, Endpoint, NullCurve,
                       Tail, endpoint_of, integrate_null, shoot, through)

DEFAULT_WINDOW = (DEFAULT_S_MIN, DEFAULT_X_STOP)


@dataclass(frozen=True, eq=False)
class CurveBoundary:
    curve: NullCurve

    def __call__(self, s):
        return self.curve.value(s)

    @property
    def s_lo(self):
        return self.curve.s_lo

    @property
    def s_hi(self):
        return self.curve.s_hi

    @property
    def left_tail(self) -> Tail:
        return self.curve.left_tail

    @property
    def right_limit(self) -> float:
        return self.curve.right_limit


@dataclass(frozen=True, eq=False)
class ConeBoundary:
    """Past light cone of ``apex``: X-branch left of the apex, Y-branch right of it."""
    apex: Point
    xbranch: NullCurve
    ybranch: NullCurve

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=float)
        left = s_arr <= self.apex.x
        out = np.empty(s_arr.shape)
        if np.any(left):
            out[left] = self.xbranch.value(s_arr[left])
        if np.any(~left):
            out[~left] = self.ybranch.value(s_arr[~left])
        return float(out) if np.ndim(s) == 0 else out

    @property
    def s_lo(self):
        return self.xbranch.s_lo

    @property
    def s_hi(self):
        return self.ybranch.s_hi

    @property
    def left_tail(self) -> Tail:
        return self.xbranch.left_tail

    @property
    def right_limit(self) -> float:
        return self.ybranch.right_limit


@dataclass(frozen=True, eq=False)
class MaxBoundary:
    """Boundary of a union of pasts: the pointwise max."""
    parts: tuple

    def __call__(self, s):
        vals = [p(s) for p in self.parts]
        out = np.maximum.reduce([np.asarray(v, dtype=float) for v in vals])
        return float(out) if np.ndim(s) == 0 else out

    @property
    def s_lo(self):
        return max(p.s_lo for p in self.parts)

    @property
    def s_hi(self):
        return min(p.s_hi for p in self.parts)

    @property
    def left_tail(self) -> Tail:
        tails = [p.left_tail for p in self.parts]
        best = min(tails, key=lambda tl: (tl.slope, -tl.intercept))
        exact = all(tl.exact for tl in tails)
        return Tail(best.slope, best.intercept, exact)

    @property
    def right_limit(self) -> float:
        return max(p.right_limit for p in self.parts)


@dataclass(frozen=True, eq=False)
class PastSet:
    boundary: object
    provenance: str
    source: object = None

    def __call__(self, s):
        return self.boundary(s)

    def values(self, grid: np.ndarray) -> np.ndarray:
        """Boundary values on ``grid``; the last grid is cached."""
        cache = self.__dict__.get("_cache")
        if cache is not None and cache[0] is grid:
            return cache[1]
        vals = np.asarray(self.boundary(grid), dtype=float)
        object.__setattr__(self, "_cache", (grid, vals))
        return vals

    def contains(self, t: float, s: float, margin: float = 0.0) -> bool:
        return bool(t < self.boundary(s) - margin)

    @property
    def left_tail(self) -> Tail:
        return self.boundary.left_tail

    @property
    def right_limit(self) -> float:
        return self.boundary.right_limit

    def write_csv(self, path, grid: np.ndarray) -> None:
        b = self.boundary(np.asarray(grid, float))
        with open(path, "w", newline="") as fh:
            fh.write("s,b\n")
            for a, v in zip(grid, b):
                fh.write(f"{float(a)!r},{float(v)!r}\n")


def past_of_point(metric: ConeField, p: Point, window=DEFAULT_WINDOW, tol: float = DEFAULT_TOL,
                  xcurve: NullCurve | None = None, ycurve: NullCurve | None = None,
                  dense: bool = True) -> PastSet:
    """I^-(p).  ``xcurve``/``ycurve`` may pass known null curves through p of the same metric.

    ``dense=False`` keeps only the integrator steps (cubic Hermite in between),
    which is cheaper and adequate for witness screening.
    """
    if not isinstance(p, Point):
        raise InvalidInput("apex must be a Point in V")
    s_min = min(window[0], 2.0 * p.x)
    if xcurve is None:
        # only s <= p.x is needed from the X-branch
        xcurve = integrate_null(metric, X, (p.x, p.t), (s_min, p.x), tol, dense)
    if ycurve is None:
        ycurve = through(metric, Y, p, (s_min, window[1]), tol, dense=False)
    return PastSet(ConeBoundary(p, xcurve, ycurve), "point", p)


def boundary_value(metric: ConeField, q: Point, s: float, tol: float = DEFAULT_TOL) -> float:
    """b_q(s) for the past cone of q, evaluated by a single shot."""
    if s == q.x:
        return q.t
    return shoot(metric, X if s < q.x else Y, q, s, tol)


def chron_rel(metric: ConeField, p: Point, q: Point, margin: float = DEFAULT_MARGIN,
              tol: float = DEFAULT_TOL) -> Ternary:
    """Is p << q?  Three-valued hypograph test ``t_p < b_q(x_p)``."""
    gap = boundary_value(metric, q, p.x, tol) - p.t
    if gap > margin:
        return Ternary.INSIDE
    if gap < -margin:
        return Ternary.OUTSIDE
    return Ternary.BOUNDARY


@dataclass(frozen=True, eq=False)
class CausalCurve:
    """Future-directed causal curve given by ordered samples (t, x) and its endpoint."""
    points: np.ndarray
    endpoint: Endpoint

    @classmethod
    def from_null_curve(cls, curve: NullCurve, grid: np.ndarray | None = None) -> "CausalCurve":
        s, r = curve.samples(grid)
        pts = np.column_stack([r, s])
        if curve.family == Y:
            pts = pts[::-1]
        return cls(pts, endpoint_of(curve.metric, curve))


def check_causal_order(metric: ConeField, points: np.ndarray, rel: float = 1e-7) -> None:
    """Raise unless consecutive samples are future-causally ordered under ``metric``.

    Chords are compared with the narrower of the two endpoint cones; along the
    curves used here beta is monotone between samples, so this is the minimum.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise InvalidInput("need at least two (t, x) samples")
    if np.any(pts[:, 1] >= 0):
        raise InvalidInput("curve leaves V")
    dt = np.diff(pts[:, 0])
    dx = np.abs(np.diff(pts[:, 1]))
    b = metric.beta_grid(pts[:, 0], pts[:, 1])
    slope = np.sqrt(np.minimum(b[:-1], b[1:]))
    bad = (dt <= 0) | (dt < slope * dx * (1 - rel) - 1e-13)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise InvalidInput(f"samples not causally ordered at index {i}: "
                           f"({pts[i, 0]}, {pts[i, 1]}) -> ({pts[i + 1, 0]}, {pts[i + 1, 1]})")


def attached_x_line(metric: ConeField, T: float, window=DEFAULT_WINDOW, tol=DEFAULT_TOL) -> NullCurve | None:
    """The unique X-curve ending at (T, 0), or None where it is not unique (the strain corner)."""
    c = metric.constant_beta
    if c is not None:
        slope = math.sqrt(c)
    elif T > 0.0:
        slope = metric.profile.slope_lo
    elif T < 0.0:
        slope = metric.profile.slope_hi
    else:
        return None
    return integrate_null(metric, X, (-1.0, T - slope), window, tol)


def _ladder(gen_points: np.ndarray, family: str, x_stop: float, s_min: float, n: int) -> list[Point]:
    ts, xs = gen_points[:, 0], gen_points[:, 1]
    order = np.argsort(xs)
    xs_sorted, ts_sorted = xs[order], ts[order]
    if family == X:
        targets = -np.geomspace(1.0, -x_stop, n)
        targets = targets[(targets >= xs_sorted[0]) & (targets <= xs_sorted[-1])]
        if len(targets) == 0 or targets[-1] != xs_sorted[-1]:
            targets = np.append(targets, xs_sorted[-1])
    else:
        targets = -np.geomspace(-xs_sorted[-1], -xs_sorted[0], n)
    t_at = np.interp(targets, xs_sorted, ts_sorted)
    return [Point(float(t), float(x)) for t, x in zip(t_at, targets)]


def past_of_curve(metric: ConeField, gen, window=DEFAULT_WINDOW, tol: float = DEFAULT_TOL,
                  n_ladder: int = 7) -> PastSet:
    """I^-[gen] under ``metric`` as the union of point pasts along a ladder on gen.

    Pasts are nested along a causal curve, so the union is the limit toward the
    future end; the ladder is refined geometrically toward it.  When gen is a
    null curve of ``metric`` itself its own branch is reused (integral curves are
    unique), and when gen ends at (T, 0) with a unique attached X-curve, that
    curve is included.
    """
    if isinstance(gen, NullCurve):
        family = gen.family
        cc = CausalCurve.from_null_curve(gen, _generator_grid(gen, window))
        same = gen.metric == metric
    elif isinstance(gen, CausalCurve):
        family, cc, same = (X if gen.endpoint.attached else Y), gen, False
    else:
        raise InvalidInput("generator must be a NullCurve or CausalCurve")
    check_causal_order(metric, cc.points)
    ladder = _ladder(cc.points, family, window[1], window[0], n_ladder)
    parts = []
    for q in ladder:
        kw = {}
        if same and family == X:
            kw["xcurve"] = gen
        if same and family == Y:
            kw["ycurve"] = gen
        parts.append(past_of_point(metric, q, window, tol, dense=False, **kw).boundary)
    if same:
        parts.append(CurveBoundary(gen))
    if cc.endpoint.attached:
        line = attached_x_line(metric, cc.endpoint.T, window, tol)
        if line is not None:
            parts.append(CurveBoundary(line))
    return PastSet(MaxBoundary(tuple(parts)), "curve", gen)


def _generator_grid(gen: NullCurve, window) -> np.ndarray:
    lo = max(window[0], gen.s_lo) if math.isfinite(gen.s_lo) else window[0]
    return -np.geomspace(-lo, -window[1], 200)


@dataclass(frozen=True)
class Inclusion:
    relation: Ternary
    strict: bool
    max_excess: float  # max over grid of b1 - b2
    worst_s: float

    @property
    def subset(self) -> bool:
        return self.relation is Ternary.INSIDE

    @property
    def equal(self) -> bool:
        return self.subset and not self.strict


def pastset_leq(P1: PastSet, P2: PastSet, grid: Sequence[float], margin: float = DEFAULT_MARGIN) -> Inclusion:
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise InvalidInput("empty grid")
    d = P1.values(grid) - P2.values(grid)
    i = int(np.argmax(d))
    if d[i] > margin:
        return Inclusion(Ternary.OUTSIDE, False, float(d[i]), float(grid[i]))
    strict = bool(np.min(d) < -margin)
    return Inclusion(Ternary.INSIDE, strict, float(d[i]), float(grid[i]))


def sup_distance(P1: PastSet, P2: PastSet, grid: Sequence[float]) -> float:
    grid = np.asarray(grid, dtype=float)
    return float(np.max(np.abs(P1.values(grid) - P2.values(grid))))
