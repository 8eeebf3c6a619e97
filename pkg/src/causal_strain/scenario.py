"""Run configuration: a JSON document merged over the shipped defaults."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .conefield import InvalidInput, Kind, Point

_KNOWN_METRICS = {k.value for k in Kind}


def load_defaults() -> dict:
    with resources.files("causal_strain").joinpath("defaults.json").open() as fh:
        return json.load(fh)


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in base:
            raise InvalidInput(f"unknown config key {path + k!r}")
        if isinstance(base[k], dict) and isinstance(v, dict) and not _is_linspace(base[k]):
            out[k] = _merge(base[k], v, f"{path}{k}.")
        else:
            out[k] = copy.deepcopy(v)
    return out


def _is_linspace(v) -> bool:
    return isinstance(v, dict) and set(v) == {"start", "stop", "num"}


def expand(v) -> list[float]:
    """A list of numbers, or a {start, stop, num} linspace, as a list of floats."""
    if _is_linspace(v):
        num = v["num"]
        if not isinstance(num, int) or num < 1:
            raise InvalidInput(f"linspace num must be a positive integer, got {num!r}")
        return [float(x) for x in np.linspace(float(v["start"]), float(v["stop"]), num)]
    if isinstance(v, list) and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return [float(x) for x in v]
    raise InvalidInput(f"expected a number list or linspace, got {v!r}")


def _finite(name, x):
    if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x):
        raise InvalidInput(f"{name} must be a finite number")
    return float(x)


def _bbox(name, b):
    try:
        (t0, t1), (x0, x1) = b
    except (TypeError, ValueError):
        raise InvalidInput(f"{name} must be [[t_min, t_max], [x_min, x_max]]") from None
    t0, t1, x0, x1 = (_finite(name, v) for v in (t0, t1, x0, x1))
    if not (t0 < t1 and x0 < x1 and x1 < 0):
        raise InvalidInput(f"{name} must be ordered and lie in x < 0")
    return ((t0, t1), (x0, x1))


@dataclass(frozen=True)
class Scenario:
    data: dict

    @classmethod
    def from_dict(cls, over: dict | None = None) -> "Scenario":
        d = _merge(load_defaults(), over or {})
        sc = cls(d)
        sc.validate()
        return sc

    @classmethod
    def from_file(cls, path, **overrides) -> "Scenario":
        try:
            with open(path) as fh:
                over = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read config {path}: {exc}") from None
        if not isinstance(over, dict):
            raise InvalidInput("config must be a JSON object")
        over.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(over)

    def validate(self) -> None:
        d = self.data
        for m in d["metrics"]:
            if m not in _KNOWN_METRICS:
                raise InvalidInput(f"unknown metric {m!r}")
        tol = _finite("tol", d["tol"])
        if not 0 < tol < 1:
            raise InvalidInput("tol must lie in (0, 1)")
        s_min, x_stop = _finite("s_min", d["s_min"]), _finite("x_stop", d["x_stop"])
        if not s_min < -1.0 < x_stop < 0.0:
            raise InvalidInput("need s_min < -1 < x_stop < 0")
        if _finite("margin", d["margin"]) < 0:
            raise InvalidInput("margin must be non-negative")
        if not isinstance(d["seed"], int) or isinstance(d["seed"], bool):
            raise InvalidInput("seed must be an integer")
        if not self.x_seeds:
            raise InvalidInput("no X seeds configured")
        self.y_seeds  # parses
        if not isinstance(d["write_y_curves"], bool):
            raise InvalidInput("write_y_curves must be true or false")
        for T in self.T_samples + expand(d["jmap"]["composition_T"]):
            _finite("T sample", T)
        o = d["oracle"]
        _bbox("oracle.bbox", o["bbox"])
        if _finite("oracle.h", o["h"]) <= 0:
            raise InvalidInput("oracle.h must be positive")
        if not isinstance(o["t_sub"], int) or o["t_sub"] < 1:
            raise InvalidInput("oracle.t_sub must be a positive integer")
        if not isinstance(o["n_samples"], int) or o["n_samples"] < 0:
            raise InvalidInput("oracle.n_samples must be a non-negative integer")
        c = d["confmap"]
        _bbox("confmap.bbox", c["bbox"])
        if c["angle"] not in ("seed", "slope", "literal") or c["radius"] not in ("blend", "literal"):
            raise InvalidInput("confmap.angle / confmap.radius not recognised")
        if not isinstance(c["n_points"], int) or c["n_points"] < 0:
            raise InvalidInput("confmap.n_points must be a non-negative integer")

    # convenient views -------------------------------------------------------

    @property
    def tol(self) -> float:
        return float(self.data["tol"])

    @property
    def window(self) -> tuple[float, float]:
        return float(self.data["s_min"]), float(self.data["x_stop"])

    @property
    def margin(self) -> float:
        return float(self.data["margin"])

    @property
    def seed(self) -> int:
        return self.data["seed"]

    @property
    def strain_seeds(self) -> list[float]:
        return expand(self.data["x_seeds"]["strain"])

    @property
    def x_seeds(self) -> list[float]:
        return self.strain_seeds + expand(self.data["x_seeds"]["outside"])

    @property
    def y_seeds(self) -> list[Point]:
        out = []
        for p in self.data["y_seeds"]:
            if not (isinstance(p, list) and len(p) == 2):
                raise InvalidInput(f"Y seed must be [t, x], got {p!r}")
            t, x = _finite("Y seed", p[0]), _finite("Y seed", p[1])
            if x >= 0:
                raise InvalidInput("Y seed must have x < 0")
            out.append(Point(t, x))
        return out

    @property
    def T_samples(self) -> list[float]:
        return expand(self.data["jmap"]["T_samples"])

    def section(self, name: str) -> dict:
        return self.data[name]

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)
