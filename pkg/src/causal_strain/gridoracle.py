"""Brute-force chronology on a lattice, independent of the null-curve machinery.

Nodes sit on a square lattice of spacing h.  From every node there is a
vertical step and, for every column offset d, a straight step to the lowest
node of that column that is strictly timelike at both ends.  Along a straight
segment ``u = t/x`` is monotone, hence so is beta, so checking the two ends
certifies the whole segment: every lattice path is a genuine timelike curve
and the oracle under-approximates the chronological relation.

Reachability is precomputed for all node pairs as bitsets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chronology import boundary_value, chron_rel
from .conefield import DEFAULT_MARGIN, ConeField, InvalidInput, Point, Ternary

DEFAULT_BBOX = ((-3.0, 3.0), (-3.0, -0.05))
DEFAULT_H = 0.05
DEFAULT_T_SUB = 2


@dataclass(frozen=True, eq=False)
class GridOracle:
    metric: ConeField
    bbox: tuple
    h: float  # column spacing
    t_sub: int  # rows per column spacing: row spacing is h / t_sub
    nt: int
    nx: int
    reach: np.ndarray = field(repr=False)  # (nt*nx + 1, words) uint64, reflexive closure

    @property
    def ht(self) -> float:
        return self.h / self.t_sub

    def node(self, i: int, j: int) -> int:
        return i * self.nx + j

    def coords(self, i: int, j: int) -> Point:
        return Point(self.bbox[0][0] + i * self.ht, self.bbox[1][0] + j * self.h)

    def snap(self, p: Point) -> tuple[int, int]:
        (t0, t1), (x0, x1) = self.bbox
        eps = 1e-9 * self.h  # node coordinates carry rounding from i * h
        if not (t0 - eps <= p.t <= t1 + eps and x0 - eps <= p.x <= x1 + eps):
            raise InvalidInput(f"point ({p.t}, {p.x}) outside oracle box {self.bbox}")
        # nearest node, ties toward lower t (and lower x)
        i = int(math.ceil((p.t - t0) / self.ht - 0.5))
        j = int(math.ceil((p.x - x0) / self.h - 0.5))
        return min(max(i, 0), self.nt - 1), min(max(j, 0), self.nx - 1)

    def reachable(self, a: int, b: int) -> bool:
        return bool((self.reach[a, b >> 6] >> np.uint64(b & 63)) & np.uint64(1))


def build_oracle(metric: ConeField, bbox=DEFAULT_BBOX, h: float = DEFAULT_H, t_sub: int = DEFAULT_T_SUB,
                 margin: float = DEFAULT_MARGIN) -> GridOracle:
    """Lattice with column spacing h and row spacing h / t_sub, plus its reachability closure."""
    (t0, t1), (x0, x1) = bbox
    if not (t0 <= t1 and x0 <= x1):
        raise InvalidInput("bbox bounds out of order")
    if x1 >= 0.0:
        raise InvalidInput("bbox touches or crosses x = 0")
    if not (h > 0) or h > max(t1 - t0, x1 - x0):
        raise InvalidInput("h must be positive and no larger than the box")
    if int(t_sub) != t_sub or t_sub < 1:
        raise InvalidInput("t_sub must be a positive integer")
    ht = h / t_sub
    nt = int(round((t1 - t0) / ht)) + 1
    nx = int(round((x1 - x0) / h)) + 1
    ts = t0 + ht * np.arange(nt)
    xs = x0 + h * np.arange(nx)
    B = metric.beta_grid(ts[:, None], xs[None, :])  # (nt, nx)
    N = nt * nx
    words = (N + 63) // 64
    reach = np.zeros((N + 1, words), dtype=np.uint64)  # last row: sentinel, never set
    idx = np.arange(N)
    bit_word, bit_val = idx >> 6, np.left_shift(np.uint64(1), (idx & 63).astype(np.uint64))

    J, JJ = np.meshgrid(np.arange(nx), np.arange(nx), indexing="ij")
    D2 = ((JJ - J) * h) ** 2
    for i in range(nt - 1, -1, -1):
        bi = B[i][:, None]
        k = np.floor(np.sqrt(bi) * np.abs(JJ - J) * t_sub).astype(int) + 1
        while True:
            rows = i + k
            valid = rows < nt
            b = np.maximum(bi, B[np.minimum(rows, nt - 1), JJ])
            bad = valid & ((k * ht) ** 2 - b * D2 <= margin)
            if not bad.any():
                break
            k = k + bad
        succ = np.where(valid, rows * nx + JJ, N)
        acc = np.bitwise_or.reduce(reach[succ], axis=1)  # (nx, words)
        own = i * nx + np.arange(nx)
        acc[np.arange(nx), bit_word[own]] |= bit_val[own]
        reach[own] = acc
    return GridOracle(metric, ((t0, t1), (x0, x1)), h, int(t_sub), nt, nx, reach)


def oracle_chron(o: GridOracle, p: Point, q: Point) -> bool:
    a, b = o.snap(p), o.snap(q)
    if a == b:
        return False
    return o.reachable(o.node(*a), o.node(*b))


@dataclass
class CrosscheckReport:
    metric: str
    h: float
    n_samples: int
    seed: int
    agreements: int = 0
    disagreements_in_band: int = 0
    violations: list = field(default_factory=list)
    unsound: int = 0  # oracle True while continuous relation Outside

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self):
        return {"metric": self.metric, "h": self.h, "n_samples": self.n_samples, "seed": self.seed,
                "agreements": self.agreements, "disagreements_in_band": self.disagreements_in_band,
                "violations": self.violations, "unsound": self.unsound, "passed": self.passed}


def crosscheck(metric: ConeField, o: GridOracle, n_samples: int, seed: int,
               band: float | None = None) -> CrosscheckReport:
    """Compare the oracle with chron_rel on random pairs, evaluated at the snapped nodes.

    A disagreement is a violation when the snapped p lies farther than ``band``
    (default 2h) in t from the boundary of the past of the snapped q.
    """
    if o.metric != metric:
        raise InvalidInput("oracle built for another metric")
    band = 2 * o.h if band is None else band
    rep = CrosscheckReport(metric.name, o.h, n_samples, seed)
    if n_samples <= 0:
        return rep
    rng = np.random.default_rng(seed)
    (t0, t1), (x0, x1) = o.bbox
    T = rng.uniform(t0, t1, (n_samples, 2))
    Xs = rng.uniform(x0, x1, (n_samples, 2))
    for k in range(n_samples):
        p, q = Point(T[k, 0], Xs[k, 0]), Point(T[k, 1], Xs[k, 1])
        a, b = o.snap(p), o.snap(q)
        if a == b:
            rep.agreements += 1
            continue
        pn, qn = o.coords(*a), o.coords(*b)
        orc = o.reachable(o.node(*a), o.node(*b))
        rel = chron_rel(metric, pn, qn)
        if orc == (rel is Ternary.INSIDE):
            rep.agreements += 1
            continue
        if orc and rel is Ternary.OUTSIDE:
            rep.unsound += 1
        dist = abs(boundary_value(metric, qn, pn.x) - pn.t)
        if dist <= band:
            rep.disagreements_in_band += 1
        else:
            rep.violations.append({"p": [pn.t, pn.x], "q": [qn.t, qn.x], "oracle": orc,
                                   "continuous": rel.value, "distance": dist})
    return rep
