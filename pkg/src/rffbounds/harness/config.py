"""Experiment configuration: a flat ``key = value`` text format.

Example::

    # rate experiment for the Gaussian kernel on [0, 1]
    measure.kind = gaussian
    measure.d = 1
    measure.gamma = 1
    set.kind = box
    set.lower = 0
    set.upper = 1
    m_grid = 2^6..2^13
    trials = 100
    norm = sup
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ValidationError
from ..multiindex import MultiIndex, parse_multi_index
from ..norms import Ball, Box, CompactSet, Quadrature
from ..spectral import Discrete, GaussianIso, SpectralMeasure, UniformBox

KNOWN_KEYS = {
    "measure.kind", "measure.d", "measure.gamma", "measure.R", "measure.atoms", "measure.weights",
    "set.kind", "set.lower", "set.upper", "set.center", "set.radius",
    "p", "q", "m_grid", "trials", "tau_grid", "eps_grid", "base_seed", "norm", "r",
    "quadrature", "quadrature.n", "quadrature.seed", "target_slack", "max_points",
    "diameter_growth", "growth.alpha", "growth.beta", "mc_samples", "timing",
    "output.csv", "output.json", "check.slope_min", "check.slope_max",
}


@dataclass(frozen=True)
class GrowthRule:
    """diam(m): constant, m**alpha, or exp(beta * sqrt(m))."""

    kind: str = "constant"
    alpha: Optional[float] = None
    beta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("constant", "power", "exponential"):
            raise ValidationError(f"unknown diameter growth rule {self.kind!r}")
        if self.kind == "power" and not (self.alpha and self.alpha > 0):
            raise ValidationError("power growth needs alpha > 0")
        if self.kind == "exponential" and not (self.beta and self.beta > 0):
            raise ValidationError("exponential growth needs beta > 0")

    def diameter(self, m: int, base: float) -> float:
        if self.kind == "power":
            return float(m) ** self.alpha
        if self.kind == "exponential":
            return math.exp(self.beta * math.sqrt(m))
        return base


@dataclass(frozen=True)
class ExperimentConfig:
    measure: SpectralMeasure
    set: CompactSet
    p: MultiIndex
    q: MultiIndex
    m_grid: tuple
    trials: int = 100
    tau_grid: tuple = (1.0,)
    eps_grid: tuple = ()
    base_seed: int = 0
    norm_kind: str = "sup"
    r: float = 2.0
    quadrature: Optional[Quadrature] = None
    target_slack: float = 1e-3
    max_points: int = 2**24
    growth: GrowthRule = field(default_factory=GrowthRule)
    mc_samples: Optional[int] = None
    timing: bool = False
    output_csv: str = "records.csv"
    output_json: str = "summary.json"
    slope_band: tuple = (-0.58, -0.42)

    def __post_init__(self):
        if len(self.m_grid) == 0 or any(int(m) < 1 for m in self.m_grid):
            raise ValidationError("m_grid must be a non-empty sequence of positive counts")
        if any(b <= a for a, b in zip(self.m_grid, self.m_grid[1:])):
            raise ValidationError("m_grid must be strictly increasing")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if self.norm_kind not in ("sup", "lr"):
            raise ValidationError("norm must be 'sup' or 'lr'")
        if self.norm_kind == "lr" and not self.r >= 1:
            raise ValidationError("r must be >= 1")
        if self.p.d != self.measure.d or self.q.d != self.measure.d or self.set.d != self.measure.d:
            raise ValidationError("measure, set, p and q must share one dimension")
        if any(t <= 0 for t in self.tau_grid) or any(e <= 0 for e in self.eps_grid):
            raise ValidationError("tau and eps values must be > 0")

    @property
    def d(self) -> int:
        return self.measure.d

    @property
    def norm_label(self) -> str:
        return "sup" if self.norm_kind == "sup" else f"Lr({self.r:g})"

    def set_for(self, m: int) -> CompactSet:
        if self.growth.kind == "constant":
            return self.set
        return self.set.scaled_to_diameter(self.growth.diameter(m, self.set.diameter))

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


def _floats(text: str) -> list[float]:
    return [float(t) for t in re.split(r"[,\s]+", text.strip()) if t]


def _points(text: str, d: int) -> np.ndarray:
    rows = [r for r in text.split(";") if r.strip()]
    pts = np.array([_floats(r) for r in rows], dtype=float)
    if pts.shape[1] != d:
        if pts.size % d:
            raise ValidationError(f"cannot read {text!r} as points of dimension {d}")
        pts = pts.reshape(-1, d)
    return pts


def parse_m_grid(text: str) -> tuple:
    """'64,128,256' or '2^6..2^13' (consecutive powers of two)."""
    mt = re.fullmatch(r"\s*2\^(\d+)\s*\.\.\s*2\^(\d+)\s*", text)
    if mt:
        lo, hi = int(mt.group(1)), int(mt.group(2))
        return tuple(2**k for k in range(lo, hi + 1))
    return tuple(int(float(t)) for t in re.split(r"[,\s]+", text.strip()) if t)


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {text!r}")


def read_kv(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValidationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def measure_from_kv(kv: dict) -> SpectralMeasure:
    kind = kv.get("measure.kind", "gaussian").lower()
    d = int(kv.get("measure.d", "1"))
    if kind == "gaussian":
        return GaussianIso(d, float(kv.get("measure.gamma", "1")))
    if kind == "uniform":
        return UniformBox(d, float(kv.get("measure.R", "1")))
    if kind == "discrete":
        if "measure.atoms" not in kv:
            raise ValidationError("discrete measure needs measure.atoms")
        atoms = _points(kv["measure.atoms"], d)
        w = _floats(kv["measure.weights"]) if "measure.weights" in kv else None
        return Discrete(d, atoms, w)
    raise ValidationError(f"unknown measure kind {kind!r}")


def set_from_kv(kv: dict, d: int) -> CompactSet:
    kind = kv.get("set.kind", "box").lower()
    if kind == "box":
        lo = _floats(kv.get("set.lower", "0"))
        hi = _floats(kv.get("set.upper", "1"))
        if len(lo) == 1 and d > 1:
            lo = lo * d
        if len(hi) == 1 and d > 1:
            hi = hi * d
        return Box(lo, hi)
    if kind == "ball":
        c = _floats(kv.get("set.center", "0"))
        if len(c) == 1 and d > 1:
            c = c * d
        return Ball(c, float(kv.get("set.radius", "1")))
    raise ValidationError(f"unknown set kind {kind!r}")


def _growth(kv: dict) -> GrowthRule:
    text = kv.get("diameter_growth", "constant").strip().lower()
    mt = re.fullmatch(r"(power|exponential)\(\s*([0-9.eE+-]+)\s*\)", text)
    if mt:
        kind, val = mt.group(1), float(mt.group(2))
        return GrowthRule(kind, alpha=val if kind == "power" else None,
                          beta=val if kind == "exponential" else None)
    alpha = float(kv["growth.alpha"]) if "growth.alpha" in kv else None
    beta = float(kv["growth.beta"]) if "growth.beta" in kv else None
    return GrowthRule(text, alpha, beta)


def config_from_kv(kv: dict) -> ExperimentConfig:
    try:
        measure = measure_from_kv(kv)
        d = measure.d
        p = parse_multi_index(kv.get("p", ",".join("0" * d)))
        q = parse_multi_index(kv.get("q", ",".join("0" * d)))
        quad = None
        if "quadrature" in kv or "quadrature.n" in kv:
            default = Quadrature.default(d)
            quad = Quadrature(kv.get("quadrature", default.kind).lower(),
                              int(float(kv.get("quadrature.n", default.n))),
                              int(kv.get("quadrature.seed", "0")))
        return ExperimentConfig(
            measure=measure,
            set=set_from_kv(kv, d),
            p=p,
            q=q,
            m_grid=parse_m_grid(kv.get("m_grid", "2^6..2^13")),
            trials=int(kv.get("trials", "100")),
            tau_grid=tuple(_floats(kv.get("tau_grid", "1"))),
            eps_grid=tuple(_floats(kv.get("eps_grid", ""))),
            base_seed=int(kv.get("base_seed", "0"), 0),
            norm_kind=kv.get("norm", "sup").lower(),
            r=float(kv.get("r", "2")),
            quadrature=quad,
            target_slack=float(kv.get("target_slack", "1e-3")),
            max_points=int(float(kv.get("max_points", str(2**24)))),
            growth=_growth(kv),
            mc_samples=int(float(kv["mc_samples"])) if "mc_samples" in kv else None,
            timing=_bool(kv.get("timing", "false")),
            output_csv=kv.get("output.csv", "records.csv"),
            output_json=kv.get("output.json", "summary.json"),
            slope_band=(float(kv.get("check.slope_min", "-0.58")), float(kv.get("check.slope_max", "-0.42"))),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    return config_from_kv(read_kv(Path(path).read_text(encoding="utf-8")))
