"""Half-plane manifold, the transition profile and the three cone fields.

Every metric handled here has the form ``-dt^2 + beta dx^2`` on the half plane
``{x < 0}``; a cone field is therefore fully described by its ``beta``
evaluator.  Larger ``beta`` means a narrower light cone.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

DEFAULT_MARGIN = 1e-9


class InvalidInput(ValueError):
    """Raised when an argument violates an operation's precondition."""


class Ternary(enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"

    def __bool__(self) -> bool:
        raise TypeError("Ternary has no truth value; compare explicitly")


@dataclass(frozen=True)
class Point:
    t: float
    x: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.x)):
            raise InvalidInput(f"non-finite point ({self.t}, {self.x})")
        if self.x >= 0.0:
            raise InvalidInput(f"point ({self.t}, {self.x}) is not in V (needs x < 0)")

    @property
    def u(self) -> float:
        return self.t / self.x


def exp_smoothstep(s: float) -> float:
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, symmetric about 1/2."""
    if s <= 0.0:
        return 0.0
    if s >= 1.0:
        return 1.0
    a = math.exp(-1.0 / s)
    b = math.exp(-1.0 / (1.0 - s))
    return a / (a + b)


@dataclass(frozen=True)
class BetaProfile:
    """Smooth monotone transition from ``low`` (u <= u_lo) to ``high`` (u >= u_hi).

    The wedge edges ``r = u_lo * s`` and ``r = u_hi * s`` must themselves be
    null lines of the outer regions, i.e. ``u_lo = sqrt(low)`` and
    ``u_hi = sqrt(high)``; the analytic-tail logic in :mod:`nullflow` relies on it.
    """

    low: float = 0.25
    high: float = 1.0
    u_lo: float = 0.5
    u_hi: float = 1.0
    mollifier: Callable[[float], float] = field(default=exp_smoothstep, compare=False)

    def __post_init__(self):
        if not (0.0 < self.low < self.high):
            raise InvalidInput("need 0 < low < high")
        if not (self.u_lo < self.u_hi):
            raise InvalidInput("need u_lo < u_hi")
        if not (math.isclose(self.u_lo, math.sqrt(self.low), rel_tol=1e-15)
                and math.isclose(self.u_hi, math.sqrt(self.high), rel_tol=1e-15)):
            raise InvalidInput("wedge edges must be null: u_lo = sqrt(low), u_hi = sqrt(high)")

    def value(self, u: float) -> float:
        if not math.isfinite(u):
            raise InvalidInput(f"non-finite u={u}")
        if u <= self.u_lo:
            return self.low
        if u >= self.u_hi:
            return self.high
        w = (u - self.u_lo) / (self.u_hi - self.u_lo)
        return self.low + (self.high - self.low) * self.mollifier(w)

    def __call__(self, u):
        if np.ndim(u) == 0:
            return self.value(float(u))
        u = np.asarray(u, dtype=float)
        if not np.all(np.isfinite(u)):
            raise InvalidInput("non-finite u in array")
        return np.array([self.value(v) for v in u.ravel()]).reshape(u.shape)

    @property
    def slope_lo(self) -> float:
        return math.sqrt(self.low)

    @property
    def slope_hi(self) -> float:
        return math.sqrt(self.high)


def beta_eval(profile: BetaProfile, u: float) -> float:
    return profile.value(u)


class Kind(enum.Enum):
    MINKOWSKI = "g_cc"
    NARROW = "g_ca"
    STRAIN = "g"


@dataclass(frozen=True)
class ConeField:
    kind: Kind
    profile: BetaProfile = field(default_factory=BetaProfile)

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def constant_beta(self) -> float | None:
        if self.kind is Kind.MINKOWSKI:
            return self.profile.high
        if self.kind is Kind.NARROW:
            return self.profile.low
        return None

    @property
    def beta_min(self) -> float:
        c = self.constant_beta
        return self.profile.low if c is None else c

    @property
    def beta_max(self) -> float:
        c = self.constant_beta
        return self.profile.high if c is None else c

    def beta_u(self, u: float) -> float:
        c = self.constant_beta
        return self.profile.value(u) if c is None else c

    def beta_at(self, p: Point) -> float:
        c = self.constant_beta
        if c is not None:
            return c
        return self.profile.value(p.t / p.x)

    def beta_grid(self, t, x) -> np.ndarray:
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        if np.any(x >= 0):
            raise InvalidInput("grid leaves V")
        c = self.constant_beta
        if c is not None:
            return np.full(t.shape, c)
        return self.profile(t / x)


def minkowski(profile: BetaProfile | None = None) -> ConeField:
    return ConeField(Kind.MINKOWSKI, profile or BetaProfile())


def narrow(profile: BetaProfile | None = None) -> ConeField:
    return ConeField(Kind.NARROW, profile or BetaProfile())


def strain(profile: BetaProfile | None = None) -> ConeField:
    return ConeField(Kind.STRAIN, profile or BetaProfile())


def by_name(name: str) -> ConeField:
    try:
        return ConeField(Kind(name))
    except ValueError:
        raise InvalidInput(f"unknown metric {name!r}; expected one of g_cc, g, g_ca") from None


def null_slope(metric: ConeField, p: Point) -> float:
    """|dt/dx| along either null direction at ``p``."""
    return math.sqrt(metric.beta_at(p))


def is_causal_vector(metric: ConeField, p: Point, v: Sequence[float],
                     margin: float = DEFAULT_MARGIN) -> Ternary:
    vt, vx = float(v[0]), float(v[1])
    if vt == 0.0 and vx == 0.0:
        raise InvalidInput("zero vector")
    if vt <= 0.0:
        return Ternary.OUTSIDE
    q = vt * vt - metric.beta_at(p) * vx * vx
    if q > margin:
        return Ternary.INSIDE
    if q < -margin:
        return Ternary.OUTSIDE
    return Ternary.BOUNDARY


class ConeRelation(enum.Enum):
    INCLUDED = "included"
    REVERSE_INCLUDED = "reverse_included"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True, eq=False)
class ConeComparison:
    relation: ConeRelation
    margins: np.ndarray  # beta_1 - beta_2 at each sample

    @property
    def nested(self) -> bool:
        return self.relation in (ConeRelation.INCLUDED, ConeRelation.EQUAL)


def cone_compare(m1: ConeField, m2: ConeField, region: Iterable[Point],
                 margin: float = DEFAULT_MARGIN) -> ConeComparison:
    """Compare future cones of ``m1`` and ``m2`` on sample points.

    ``INCLUDED`` means every cone of ``m1`` sits inside the matching cone of ``m2``.
    """
    pts = list(region)
    if not pts:
        raise InvalidInput("empty region")
    d = np.array([m1.beta_at(p) - m2.beta_at(p) for p in pts])
    if np.all(np.abs(d) <= margin):
        rel = ConeRelation.EQUAL
    elif np.all(d >= -margin):
        rel = ConeRelation.INCLUDED
    elif np.all(d <= margin):
        rel = ConeRelation.REVERSE_INCLUDED
    else:
        rel = ConeRelation.INCOMPARABLE
    return ConeComparison(rel, d)


def sample_region(t_range=(-3.0, 3.0), x_range=(-3.0, -0.05), n: int = 50) -> list[Point]:
    ts = np.linspace(t_range[0], t_range[1], n)
    xs = np.linspace(x_range[0], x_range[1], n)
    return [Point(float(t), float(x)) for t in ts for x in xs]
