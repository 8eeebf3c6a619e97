"""Piecewise map of the strain half-plane into a region of flat 2-D Minkowski space.

The half-plane splits into the wedge A (between the lines t = x and t = x/2),
the region B above it and the region C below it.  X-curves are sent to null
lines t - x = const of the flat target:

* B: the curve ending at (T, 0) goes to the line ending at (T, 0);
* C: the curve ending at (T, 0) goes to the line through (T - a, a);
* A: the curve goes to the line t - x = -2 alpha, alpha in [0, a].

Here ``a = pi/2 - arctan(1/2)``.  A point is placed on its line at the
Euclidean distance ``r`` given by its region's parameters.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .conefield import ConeField, InvalidInput, Point
from .nullflow import DEFAULT_TOL, X, Y, IntegrationError, NullCurve, endpoint_of, shoot, through

A_CONST = math.pi / 2 - math.atan(0.5)
_SQ2 = math.sqrt(2.0)
_LITERAL_MAX = math.atan(2.0) - math.pi / 4


class Region(enum.Enum):
    A = "A"
    B = "B"
    C = "C"


def region_of(p: Point) -> Region:
    if p.t > p.x / 2:
        return Region.B
    if p.t < p.x:
        return Region.C
    return Region.A


@dataclass(frozen=True)
class MapParams:
    region: Region
    r: float
    t_end: float | None = None
    alpha: float | None = None


@dataclass(frozen=True)
class TargetPoint:
    t: float
    x: float


# angle conventions for the wedge --------------------------------------------

def angle_from_seed(t_seed: float) -> float:
    """Default: alpha affine in the curve's crossing height at x = -1."""
    return min(A_CONST, max(0.0, 2.0 * A_CONST * (-0.5 - t_seed)))


def angle_from_slope(m: float, scaled: bool = True) -> float:
    """Angle between the arrival directions (m, 1) and (1/2, 1) at the origin.

    ``scaled`` rescales it affinely onto [0, a]; otherwise the raw angle is returned.
    """
    raw = math.atan(2.0) - math.atan(1.0 / m)
    return A_CONST * raw / _LITERAL_MAX if scaled else raw


ANGLES = ("seed", "slope", "literal")
RADII = ("blend", "literal")


def _sigma_crossings(metric: ConeField, p: Point, tol: float) -> tuple[float, float]:
    """Distances to the origin of the points where the Y-curve through p meets
    t = x/2 and t = x (the two ends of its wedge transit)."""
    sigma = through(metric, Y, p, tol=tol, dense=False)
    w = sigma.wedge
    if w is None:
        raise IntegrationError(f"the Y-curve through ({p.t}, {p.x}) does not cross the wedge")
    s_half, s_one = w.s_lo, w.s_hi
    return abs(s_half) * math.sqrt(1.25), abs(s_one) * _SQ2


def params_of(metric: ConeField, p: Point, angle: str = "seed", radius: str = "blend",
              tol: float = DEFAULT_TOL) -> MapParams:
    if metric.constant_beta is not None:
        raise InvalidInput("the map is defined for the strain metric")
    if angle not in ANGLES or radius not in RADII:
        raise InvalidInput(f"angle must be one of {ANGLES}, radius one of {RADII}")
    reg = region_of(p)
    if reg is not Region.A:
        ep = endpoint_of(metric, through(metric, X, p, tol=tol))
        return MapParams(reg, math.hypot(p.t - ep.T, p.x), t_end=ep.T)
    if angle == "seed":
        # the seed height is needed to ~tol relative to |x| near the origin
        tol_a = max(tol * min(1.0, abs(p.x)), 1e-15)
        alpha = angle_from_seed(p.t if p.x == -1.0 else shoot(metric, X, p, -1.0, tol_a))
    else:
        m = endpoint_of(metric, through(metric, X, p, tol=tol)).slope_limit
        alpha = angle_from_slope(m, scaled=(angle == "slope"))
    d_half, d_one = _sigma_crossings(metric, p, tol)
    if radius == "blend":
        w = alpha / A_CONST
        r = (1.0 - w) * d_half + w * d_one
    else:
        r = d_half
    return MapParams(reg, r, alpha=alpha)


def image_of(params: MapParams) -> TargetPoint:
    r = params.r / _SQ2
    if params.region is Region.B:
        return TargetPoint(params.t_end - r, -r)
    if params.region is Region.C:
        return TargetPoint(params.t_end - A_CONST - r, A_CONST - r)
    return TargetPoint(-params.alpha - r, params.alpha - r)


def map_f(metric: ConeField, p: Point, angle: str = "seed", radius: str = "blend",
          tol: float = DEFAULT_TOL) -> TargetPoint:
    return image_of(params_of(metric, p, angle, radius, tol))


def in_target(q: TargetPoint) -> bool:
    """Membership in the flat plane minus {x >= a} and {t + x >= 0, 0 <= x <= a}."""
    if q.x >= A_CONST:
        return False
    if q.t + q.x >= 0.0 and 0.0 <= q.x <= A_CONST:
        return False
    return True


def target_region(q: TargetPoint, slack: float = 1e-12) -> set[Region]:
    """Primed regions containing q (two of them on an interface)."""
    d = q.t - q.x
    out = set()
    if d >= -slack:
        out.add(Region.B)
    if -2 * A_CONST - slack <= d <= slack:
        out.add(Region.A)
    if d <= -2 * A_CONST + slack:
        out.add(Region.C)
    return out


# null-curve check --------------------------------------------------------------

@dataclass
class NullReport:
    family: str
    segments: int
    max_dev: dict  # region -> max | |dt/dx| - 1 |
    zero_dx: int
    asserted: bool
    passed: bool
    tol: float

    def to_dict(self):
        return dict(self.__dict__)


def nullcheck_f(metric: ConeField, curve: NullCurve, tol: float = 1e-9,
                grid: np.ndarray | None = None, **map_opts) -> NullReport:
    """Map a null curve's samples and measure how far each image chord is from slope 1.

    X-images in B and C are asserted to within ``tol``; everything else is measured only.
    """
    if grid is None:
        s, r = curve.samples()
    else:
        s = np.asarray(grid, float)
        s = s[(s >= curve.s_lo) & (s <= curve.s_hi)]
        r = curve.value(s)
    pts = [Point(float(t), float(x)) for t, x in zip(r, s)]
    regs = [region_of(p) for p in pts]
    imgs = [map_f(metric, p, **map_opts) for p in pts]
    dev: dict[str, float] = {}
    zero = 0
    for i in range(len(imgs) - 1):
        dx = imgs[i + 1].x - imgs[i].x
        dt = imgs[i + 1].t - imgs[i].t
        key = regs[i].value if regs[i] is regs[i + 1] else "interface"
        if dx == 0.0:
            zero += 1
            continue
        # slope error beyond what rounding of the image coordinates can produce
        floor = 4 * np.finfo(float).eps * (abs(imgs[i].t) + abs(imgs[i + 1].t)
                                           + abs(imgs[i].x) + abs(imgs[i + 1].x))
        d = max(0.0, abs(abs(dt) - abs(dx)) - floor) / abs(dx)
        dev[key] = max(dev.get(key, 0.0), d)
    asserted = curve.family == X
    passed = True
    if asserted:
        passed = zero == 0 and all(dev.get(k, 0.0) <= tol for k in ("B", "C"))
    return NullReport(curve.family, len(imgs) - 1, dev, zero, asserted, passed, tol)


# clouds -------------------------------------------------------------------------

def sample_cloud(n: int, seed: int, bbox=((-3.0, 3.0), (-3.0, -0.05))) -> list[Point]:
    rng = np.random.default_rng(seed)
    t = rng.uniform(bbox[0][0], bbox[0][1], n)
    x = rng.uniform(bbox[1][0], bbox[1][1], n)
    return [Point(float(a), float(b)) for a, b in zip(t, x)]


def map_cloud(metric: ConeField, points: Iterable[Point], **map_opts) -> list[tuple[Point, Region, TargetPoint]]:
    return [(p, region_of(p), map_f(metric, p, **map_opts)) for p in points]


def write_cloud_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "region", "t_image", "x_image"])
        for p, reg, q in rows:
            w.writerow([repr(p.t), repr(p.x), reg.value, repr(q.t), repr(q.x)])


@dataclass
class ContinuityProbe:
    interface: str
    x: float
    gap: float


def interface_probes(metric: ConeField, xs: Sequence[float] = (-2.5, -1.0, -0.3, -0.05),
                     eps: float = 1e-10, **map_opts) -> list[ContinuityProbe]:
    """Image gaps across the two wedge edges, one-sided points at distance eps."""
    out = []
    for x in xs:
        for name, t0, side in (("t=x/2", x / 2, Region.B), ("t=x", x, Region.C)):
            inner = Point(t0 + (-eps if side is Region.B else eps), x)
            outer = Point(t0 + (eps if side is Region.B else -eps), x)
            on = Point(t0, x)
            qa, qb, qo = (map_f(metric, q, **map_opts) for q in (inner, outer, on))
            gap = max(math.hypot(qa.t - qb.t, qa.x - qb.x), math.hypot(qo.t - qb.t, qo.x - qb.x))
            out.append(ContinuityProbe(name, x, gap))
    return out


def injectivity_violations(rows, sep: float = 1e-3, close: float = 1e-9) -> int:
    """Pairs of sample points more than ``sep`` apart whose images are within ``close``."""
    from scipy.spatial import cKDTree
    P = np.array([[p.t, p.x] for p, _, _ in rows])
    Q = np.array([[q.t, q.x] for _, _, q in rows])
    pairs = cKDTree(Q).query_pairs(close, output_type="ndarray")
    if len(pairs) == 0:
        return 0
    d = np.hypot(*(P[pairs[:, 0]] - P[pairs[:, 1]]).T)
    return int(np.sum(d > sep))
