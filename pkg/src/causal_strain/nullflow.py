"""Null characteristics of the cone fields.

The X family solves ``dr/ds = +sqrt(beta(r/s))`` (right-moving, reaches x=0),
the Y family ``dr/ds = -sqrt(beta(r/s))`` (left-moving, escapes to -x large).

For the strain metric ``beta`` depends on ``u = r/s`` only, so the flow is
invariant under homotheties and becomes autonomous in ``tau = -ln(-s)``::

    du/dtau = u - sqrt(beta(u))   (X)
    du/dtau = u + sqrt(beta(u))   (Y)

Outside the wedge ``u_lo < u < u_hi`` every curve is an exact straight line.
X-curves never cross the wedge edges (they are themselves X-curves), so an
X-curve is either a line or lives in the open wedge for all s.  A Y-curve is
a line, then a finite transit through the wedge, then another line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .conefield import ConeField, InvalidInput, Kind, Point

X = "X"
Y = "Y"

DEFAULT_TOL = 1e-10
DEFAULT_X_STOP = -1e-6
DEFAULT_S_MIN = -20.0
DENSE_DTAU = 0.01  # inter-sample spacing <= 0.01 |s|


class IntegrationError(RuntimeError):
    pass


# Dormand-Prince 5(4) tableau.
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _hermite(xk, yk, dk, x):
    xk = np.asarray(xk)
    x = np.asarray(x, dtype=float)
    i = np.clip(np.searchsorted(xk, x, side="right") - 1, 0, len(xk) - 2)
    h = xk[i + 1] - xk[i]
    t = (x - xk[i]) / h
    t2 = t * t
    h00 = (1 + 2 * t) * (1 - t) ** 2
    h10 = t * (1 - t) ** 2
    h01 = t2 * (3 - 2 * t)
    h11 = t2 * (t - 1)
    return h00 * yk[i] + h10 * h * dk[i] + h01 * yk[i + 1] + h11 * h * dk[i + 1]


def dopri(F: Callable[[float], float], tau0: float, u0: float, tau1: float, tol: float,
          max_step: float | None = None, stop_level: float | None = None):
    """Integrate the autonomous scalar ODE ``du/dtau = F(u)`` from tau0 to tau1.

    The local error of every accepted step is below ``tol * min(1, |s|)`` in u,
    i.e. below ``tol`` in r.  If ``stop_level`` is given, integration halts at
    the first crossing of that u level, located on the Hermite interpolant.

    Returns (tau, u, du) arrays ordered along the direction of integration and
    a flag telling whether the stop level was hit.
    """
    if tau1 == tau0:
        return np.array([tau0]), np.array([u0]), np.array([F(u0)]), False
    direction = 1.0 if tau1 > tau0 else -1.0
    taus, us, ks = [tau0], [u0], [F(u0)]
    tau, u, k1 = tau0, u0, ks[0]
    h = min(abs(tau1 - tau0), 0.05 if max_step is None else max_step)
    hit = False
    while direction * (tau1 - tau) > 0:
        last = h >= abs(tau1 - tau)
        h = min(h, abs(tau1 - tau))
        if max_step is not None and h > max_step:
            h, last = max_step, False
        hs = direction * h
        k = [k1]
        for row in _A[1:]:
            k.append(F(u + hs * sum(a * kj for a, kj in zip(row, k))))
        u5 = u + hs * sum(b * kj for b, kj in zip(_B, k))
        err = abs(hs * sum(e * kj for e, kj in zip(_E, k)))
        scale = tol * min(1.0, math.exp(min(tau, tau + hs)))
        if err <= scale:
            tau_new, k_new = (tau1 if last else tau + hs), k[6]
            if stop_level is not None and (u5 - stop_level) * (u - stop_level) <= 0 and u5 != u:
                tk = (tau, tau_new) if direction > 0 else (tau_new, tau)
                uk = (u, u5) if direction > 0 else (u5, u)
                dk = (k1, k_new) if direction > 0 else (k_new, k1)
                root = brentq(lambda x: float(_hermite(tk, uk, dk, x)) - stop_level,
                              tk[0], tk[1], xtol=1e-15)
                taus.append(root)
                us.append(stop_level)
                ks.append(F(stop_level))
                hit = True
                break
            tau, u, k1 = tau_new, u5, k_new
            taus.append(tau)
            us.append(u)
            ks.append(k1)
        fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * (scale / err) ** 0.2))
        h *= fac
        if h < 1e-13 * max(1.0, abs(tau)):
            s_here = -math.exp(-tau)
            raise IntegrationError(f"step size underflow at s={s_here:.17g}, u={u:.17g}")
    return np.array(taus), np.array(us), np.array(ks), hit


@dataclass(frozen=True)
class Tail:
    """Asymptote ``r = intercept + slope * s`` as s -> -inf."""
    slope: float
    intercept: float
    exact: bool

    def __call__(self, s):
        return self.intercept + self.slope * np.asarray(s, dtype=float)


@dataclass(frozen=True)
class LineSegment:
    s_lo: float
    s_hi: float
    slope: float
    s0: float
    r0: float

    def __call__(self, s):
        # intercept form: exact for lines through the origin, no cancellation near x = 0
        return self.intercept + self.slope * np.asarray(s, dtype=float)

    @property
    def intercept(self) -> float:
        return self.r0 - self.slope * self.s0


@dataclass(frozen=True, eq=False)
class WedgeSegment:
    tau: np.ndarray
    u: np.ndarray
    du: np.ndarray

    @property
    def s_lo(self) -> float:
        return -math.exp(-self.tau[0])

    @property
    def s_hi(self) -> float:
        return -math.exp(-self.tau[-1])

    def u_at(self, tau):
        return _hermite(self.tau, self.u, self.du, tau)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return s * self.u_at(-np.log(-s))

    @property
    def s_nodes(self) -> np.ndarray:
        return -np.exp(-self.tau)


@dataclass(frozen=True, eq=False)
class NullCurve:
    family: str
    metric: ConeField
    seed: tuple[float, float]
    segments: tuple
    window: tuple[float, float]
    tol: float

    @property
    def s_lo(self) -> float:
        return self.segments[0].s_lo

    @property
    def s_hi(self) -> float:
        return self.segments[-1].s_hi

    @property
    def is_line(self) -> bool:
        return len(self.segments) == 1 and isinstance(self.segments[0], LineSegment)

    @property
    def wedge(self) -> WedgeSegment | None:
        for seg in self.segments:
            if isinstance(seg, WedgeSegment):
                return seg
        return None

    def value(self, s):
        s_arr = np.asarray(s, dtype=float)
        lo, hi = self.s_lo, self.s_hi
        slack = 1e-12 * np.maximum(1.0, np.abs(s_arr))
        if np.any(s_arr < lo - slack) or np.any(s_arr > hi + slack) or np.any(s_arr >= 0):
            raise InvalidInput(f"s outside curve domain [{lo}, {hi}]")
        out = np.empty(s_arr.shape)
        done = np.zeros(s_arr.shape, dtype=bool)
        for seg in self.segments:
            m = ~done & (s_arr <= seg.s_hi + slack)
            if np.any(m):
                out[m] = seg(np.clip(s_arr[m], seg.s_lo, seg.s_hi))
                done |= m
        if np.ndim(s) == 0:
            return float(out)
        return out

    __call__ = value

    @property
    def left_tail(self) -> Tail:
        first = self.segments[0]
        if isinstance(first, LineSegment):
            return Tail(first.slope, first.intercept, math.isinf(first.s_lo))
        s = first.s_lo
        slope = float(first.u[0] - first.du[0])
        return Tail(slope, s * float(first.u[0]) - slope * s, False)

    @property
    def right_limit(self) -> float:
        last = self.segments[-1]
        if isinstance(last, LineSegment):
            return last.intercept
        # X-curves in the open wedge are squeezed onto the origin.
        return 0.0

    def samples(self, grid: np.ndarray | None = None):
        """(s, r) samples: the wedge nodes plus a geometric grid across the window."""
        if grid is None:
            grid = default_grid(*self.window)
        pts = [np.asarray(grid, float)]
        w = self.wedge
        if w is not None:
            pts.append(w.s_nodes)
        s = np.unique(np.concatenate(pts))
        s = s[(s >= max(self.s_lo, self.window[0])) & (s <= min(self.s_hi, self.window[1]))]
        return s, self.value(s)


def default_grid(s_min: float = DEFAULT_S_MIN, x_stop: float = DEFAULT_X_STOP, n: int = 400) -> np.ndarray:
    return -np.geomspace(-s_min, -x_stop, n)


def _flow(metric: ConeField, family: str) -> Callable[[float], float]:
    value = metric.profile.value
    sign = -1.0 if family == X else 1.0
    return lambda u: u + sign * math.sqrt(value(u))


def _check_window(window, s0):
    s_min, x_stop = window
    if not (s_min < x_stop < 0.0):
        raise InvalidInput(f"window {window} must satisfy s_min < x_stop < 0")
    if not (s_min * (1 + 1e-12) <= s0 <= x_stop * (1 - 1e-12)):
        raise InvalidInput(f"seed s0={s0} outside window {window}")


def integrate_null(metric: ConeField, family: str, seed: Sequence[float],
                   window: tuple[float, float] = (DEFAULT_S_MIN, DEFAULT_X_STOP),
                   tol: float = DEFAULT_TOL, dense: bool = True) -> NullCurve:
    """Null curve of ``family`` through ``(s0, r0) = seed``.

    Wedge pieces are integrated numerically over the window (X) or across the
    whole wedge (Y); every other piece is an exact line valid up to x=0 or
    down to -infinity.
    """
    if family not in (X, Y):
        raise InvalidInput(f"family must be X or Y, got {family!r}")
    s0, r0 = float(seed[0]), float(seed[1])
    if not (math.isfinite(s0) and math.isfinite(r0)):
        raise InvalidInput("non-finite seed")
    _check_window(window, s0)
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    sign = 1.0 if family == X else -1.0
    make = lambda segs: NullCurve(family, metric, (s0, r0), tuple(segs), tuple(window), tol)

    c = metric.constant_beta
    if c is not None:
        return make([LineSegment(-math.inf, 0.0, sign * math.sqrt(c), s0, r0)])

    prof = metric.profile
    lo, hi = prof.u_lo, prof.u_hi
    u0 = r0 / s0
    max_step = DENSE_DTAU if dense else None
    F = _flow(metric, family)
    tau0 = -math.log(-s0)

    if family == X:
        if u0 <= lo:
            return make([LineSegment(-math.inf, 0.0, prof.slope_lo, s0, r0)])
        if u0 >= hi:
            return make([LineSegment(-math.inf, 0.0, prof.slope_hi, s0, r0)])
        tau_min, tau_max = -math.log(-window[0]), -math.log(-window[1])
        tb, ub, kb, _ = dopri(F, tau0, u0, tau_min, tol, max_step)
        tf, uf, kf, _ = dopri(F, tau0, u0, tau_max, tol, max_step)
        seg = WedgeSegment(np.concatenate([tb[::-1], tf[1:]]),
                           np.concatenate([ub[::-1], uf[1:]]),
                           np.concatenate([kb[::-1], kf[1:]]))
        return make([seg])

    # Y family: left line (slope -slope_lo), wedge transit, right line (slope -slope_hi).
    def transit(tau_start, u_start, forward=True, backward=True):
        parts_t, parts_u, parts_k = [], [], []
        if backward:
            tb, ub, kb, hit = dopri(F, tau_start, u_start, tau_start - 50.0, tol, max_step, lo)
            if not hit:
                raise IntegrationError(f"Y transit failed to reach u={lo} from s={-math.exp(-tau_start)}")
            parts_t.append(tb[::-1]); parts_u.append(ub[::-1]); parts_k.append(kb[::-1])
        if forward:
            tf, uf, kf, hit = dopri(F, tau_start, u_start, tau_start + 50.0, tol, max_step, hi)
            if not hit:
                raise IntegrationError(f"Y transit failed to reach u={hi} from s={-math.exp(-tau_start)}")
            if parts_t:
                tf, uf, kf = tf[1:], uf[1:], kf[1:]
            parts_t.append(tf); parts_u.append(uf); parts_k.append(kf)
        return WedgeSegment(np.concatenate(parts_t), np.concatenate(parts_u), np.concatenate(parts_k))

    def assemble(w: WedgeSegment):
        s_a, s_b = w.s_lo, w.s_hi
        left = LineSegment(-math.inf, s_a, -prof.slope_lo, s_a, lo * s_a)
        right = LineSegment(s_b, 0.0, -prof.slope_hi, s_b, hi * s_b)
        return make([left, w, right])

    if u0 <= lo:
        s_c = (r0 + prof.slope_lo * s0) / (lo + prof.slope_lo)
        if s_c >= 0.0:
            return make([LineSegment(-math.inf, 0.0, -prof.slope_lo, s0, r0)])
        return assemble(transit(-math.log(-s_c), lo, backward=False))
    if u0 >= hi:
        s_c = (r0 + prof.slope_hi * s0) / (hi + prof.slope_hi)
        return assemble(transit(-math.log(-s_c), hi, forward=False))
    return assemble(transit(tau0, u0))


def through(metric: ConeField, family: str, p: Point, window=(DEFAULT_S_MIN, DEFAULT_X_STOP),
            tol: float = DEFAULT_TOL, dense: bool = True) -> NullCurve:
    """Null curve of ``family`` through the point p, widening the window if needed."""
    s_min, x_stop = window
    s_min = min(s_min, p.x * 2.0)
    if p.x >= x_stop:
        x_stop = p.x * 0.5
    return integrate_null(metric, family, (p.x, p.t), (s_min, x_stop), tol, dense)


def shoot(metric: ConeField, family: str, p: Point, s: float, tol: float = DEFAULT_TOL) -> float:
    """r(s) on the ``family`` curve through p, without storing a dense curve."""
    lo, hi = min(p.x, s), max(p.x, s)
    if hi >= 0.0:
        raise InvalidInput("target s must be negative")
    s_min = lo * (1 + 1e-9) if lo < hi else lo * 1.5
    x_stop = hi * (1 - 1e-9) if lo < hi else hi * 0.5
    curve = integrate_null(metric, family, (p.x, p.t), (s_min, x_stop), tol, dense=False)
    return curve.value(s)


def curve_value(curve: NullCurve, s: float) -> float:
    return curve.value(s)


@dataclass(frozen=True)
class Endpoint:
    attached: bool
    T: float | None = None
    slope_limit: float | None = None
    bracket: float = 0.0
    certified: bool = True
    residual: float | None = None  # r(x_stop) for numerically resolved approaches

    def __str__(self):
        if not self.attached:
            return "Infinity"
        m = "" if self.slope_limit is None else f", slope {self.slope_limit:.6g}"
        return f"Attached({self.T:.6g}{m})"


INFINITY = Endpoint(False)


def endpoint_of(metric: ConeField, curve: NullCurve) -> Endpoint:
    if curve.family == Y:
        return INFINITY
    last = curve.segments[-1]
    if isinstance(last, LineSegment):
        T = last.intercept
        return Endpoint(True, T, last.slope if T == 0.0 else None)
    w: WedgeSegment = last
    x_stop = curve.window[1]
    if w.s_hi < x_stop * (1 + 1e-9):
        raise IntegrationError(f"insufficient integration window: curve stops at s={w.s_hi}")
    prof = metric.profile
    if not (prof.u_lo < w.u[-1] < prof.u_hi):
        raise IntegrationError(f"wedge curve left the wedge numerically (u={w.u[-1]})")
    s_nodes = w.s_nodes
    m = (s_nodes >= 10 * x_stop) & (s_nodes <= x_stop)
    if m.sum() < 3:
        raise IntegrationError("too few samples near x_stop for slope extraction")
    slope = float(np.polyfit(s_nodes[m], w.u[m], 1)[1])
    return Endpoint(True, 0.0, slope, 0.0, True, float(w(np.array(x_stop))))


def endpoint_law(metric: ConeField, t: float) -> float:
    """Closed-form endpoint of the X-curve with r(-1) = t."""
    c = metric.constant_beta
    if c is not None:
        return t + math.sqrt(c)
    prof = metric.profile
    if t <= -prof.u_hi:
        return t + prof.slope_hi
    if t >= -prof.u_lo:
        return t + prof.slope_lo
    return 0.0


def seed_for_endpoint(metric: ConeField, T: float) -> float:
    """Inverse of :func:`endpoint_law` for T != 0 (T = 0 returns the lowest strain seed)."""
    c = metric.constant_beta
    if c is not None:
        return T - math.sqrt(c)
    prof = metric.profile
    if T <= 0.0:
        return T - prof.slope_hi
    return T - prof.slope_lo


def wedge_fixed_points(metric: ConeField, n: int = 4001) -> list[float]:
    """Rays r = u* s that are X-curves inside the wedge (sqrt(beta(u*)) = u*)."""
    prof = metric.profile
    f = lambda u: math.sqrt(prof.value(u)) - u
    us = np.linspace(prof.u_lo, prof.u_hi, n)[1:-1]
    vals = [f(u) for u in us]
    roots = []
    for a, b, fa, fb in zip(us[:-1], us[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(brentq(f, a, b, xtol=1e-15))
    return roots


def write_curve_csv(curve: NullCurve, path, grid: np.ndarray | None = None) -> None:
    s, r = curve.samples(grid)
    with open(path, "w", newline="") as fh:
        fh.write("s,r\n")
        for a, b in zip(s, r):
            fh.write(f"{float(a)!r},{float(b)!r}\n")
