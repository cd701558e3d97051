"""Seeded Monte Carlo experiments: convergence rates, bound coverage, growing sets."""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .. import bounds
from ..errors import DegenerateInput, RFFError, UnboundedSupport
from ..norms import gradient_sup, lr_error, sup_error_certified
from ..spectral import moment_E, sample_frequencies, second_moment
from .config import ExperimentConfig

GOLDEN = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1
CSV_HEADER = ["m", "trial", "seed", "error", "slack", "bound_t1", "bound_c1", "bound_t2",
              "bound_t3", "diam", "wall_ms"]


def mix64(x: int) -> int:
    """splitmix64 finalizer."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def trial_seed(base_seed: int, m_index: int, trial: int, trials: int) -> int:
    return mix64(base_seed + GOLDEN * (m_index * trials + trial))


@dataclass(frozen=True)
class TrialRecord:
    m: int
    trial_index: int
    seed_used: int
    measured_error: float
    certificate_slack: float
    bound_t1: float
    bound_c1: float
    bound_t2: float
    bound_t3: float
    diam_used: float
    wall_time: float = 0.0

    def row(self) -> list:
        return [self.m, self.trial_index, self.seed_used, self.measured_error, self.certificate_slack,
                self.bound_t1, self.bound_c1, self.bound_t2, self.bound_t3, self.diam_used,
                self.wall_time * 1000.0]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def records_to_csv(records: Sequence[TrialRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        w.writerow([_fmt(v) for v in rec.row()])
    return buf.getvalue()


def fit_loglog_slope(pairs: Sequence[tuple]) -> tuple[float, float, float]:
    """Least squares of log(error) on log(m); returns (slope, intercept, rms residual)."""
    if len(pairs) < 3:
        raise DegenerateInput("slope fit needs at least 3 (m, error) pairs")
    m = np.array([p[0] for p in pairs], dtype=float)
    e = np.array([p[1] for p in pairs], dtype=float)
    if np.any(m <= 0) or np.any(~(e > 0)):
        raise DegenerateInput("slope fit needs positive m and positive errors")
    x, y = np.log(m), np.log(e)
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid**2)))


@dataclass
class _MContext:
    """Per-m quantities shared by all trials at that m."""

    m: int
    m_index: int
    set: object
    D: Optional[float]
    bound_t1: float
    bound_c1: float
    bound_t2: float
    bound_t3: float


def _nan_bound(fn, *args) -> float:
    try:
        return fn(*args).bound_value
    except (UnboundedSupport, RFFError):
        return math.nan


def _context(cfg: ExperimentConfig, m_index: int, m: int) -> _MContext:
    s = cfg.set_for(m)
    diam = s.diameter
    d = cfg.d
    tau = cfg.tau_grid[0]
    sigma = math.sqrt(second_moment(cfg.measure))
    r_bound = cfg.r if cfg.norm_kind == "lr" else 2.0
    D = None
    if cfg.norm_kind == "sup":
        D, exact = gradient_sup(cfg.measure, cfg.p, cfg.q, s)
        if not exact:
            D *= 2.0
    return _MContext(
        m=m, m_index=m_index, set=s, D=D,
        bound_t1=_nan_bound(bounds.thm1_bound, d, diam, sigma, m, tau),
        bound_c1=_nan_bound(bounds.cor1_bound, d, diam, sigma, m, tau, max(r_bound, 1.0)),
        bound_t2=_nan_bound(bounds.thm2_bound, d, diam, m, tau, r_bound) if r_bound > 1 else math.nan,
        bound_t3=_nan_bound(bounds.thm3_bound, d, cfg.p, cfg.q, diam, cfg.measure, m, tau),
    )


def run_trial(cfg: ExperimentConfig, ctx: _MContext, trial: int) -> TrialRecord:
    seed = trial_seed(cfg.base_seed, ctx.m_index, trial, cfg.trials)
    t0 = time.perf_counter()
    try:
        feats = sample_frequencies(cfg.measure, ctx.m, seed)
        if cfg.norm_kind == "sup":
            rep = sup_error_certified(feats, cfg.p, cfg.q, cfg.measure, ctx.set,
                                      cfg.target_slack, cfg.max_points, D=ctx.D)
        else:
            rep = lr_error(feats, cfg.p, cfg.q, cfg.measure, ctx.set, cfg.r, cfg.quadrature)
    except RFFError as exc:
        raise RFFError(f"trial failed at m={ctx.m}, trial={trial}, seed={seed}: {exc}") from exc
    wall = time.perf_counter() - t0 if cfg.timing else 0.0
    return TrialRecord(ctx.m, trial, seed, rep.value, rep.certificate_slack, ctx.bound_t1,
                       ctx.bound_c1, ctx.bound_t2, ctx.bound_t3, ctx.set.diameter, wall)


def run_trials(cfg: ExperimentConfig, threads: int = 1) -> list[TrialRecord]:
    contexts = [_context(cfg, i, int(m)) for i, m in enumerate(cfg.m_grid)]
    tasks = [(ctx, t) for ctx in contexts for t in range(cfg.trials)]
    if threads <= 1:
        records = [run_trial(cfg, ctx, t) for ctx, t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda job: run_trial(cfg, *job), tasks))
    m_pos = {ctx.m: ctx.m_index for ctx in contexts}
    records.sort(key=lambda r: (m_pos[r.m], r.trial_index))
    return records


def per_m_medians(records: Sequence[TrialRecord]) -> list[tuple[int, float]]:
    by_m: dict[int, list[float]] = {}
    for rec in records:
        by_m.setdefault(rec.m, []).append(rec.measured_error)
    return [(m, float(np.median(v))) for m, v in by_m.items()]


@dataclass
class RateSummary:
    medians: list
    slope: Optional[float]
    intercept: Optional[float]
    residual: Optional[float]
    norm_kind: str
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "medians": [{"m": m, "median_error": e} for m, e in self.medians],
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "norm_kind": self.norm_kind,
            "note": self.note,
        }


def summarize_rate(records: Sequence[TrialRecord], norm_kind: str) -> RateSummary:
    med = per_m_medians(records)
    try:
        slope, icpt, res = fit_loglog_slope(med)
        return RateSummary(med, slope, icpt, res, norm_kind)
    except DegenerateInput as exc:
        return RateSummary(med, None, None, None, norm_kind, f"slope undefined: {exc}")


def run_rate_experiment(cfg: ExperimentConfig, threads: int = 1):
    """Returns (records, RateSummary)."""
    records = run_trials(cfg, threads)
    return records, summarize_rate(records, cfg.norm_label)


@dataclass
class CoverageRow:
    m: int
    level: float
    kind: str
    bound: float
    theoretical: float
    exceedance: float
    trials: int
    se: float
    validated: bool
    max_certified_error: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


COVERAGE_HEADER = ["m", "level", "kind", "bound", "theoretical", "exceedance", "trials", "se",
                   "validated", "max_certified_error"]


def coverage_to_csv(rows: Sequence[CoverageRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COVERAGE_HEADER)
    for row in rows:
        w.writerow([_fmt(getattr(row, k)) for k in COVERAGE_HEADER])
    return buf.getvalue()


def _bernstein_failure_prob(cfg: ExperimentConfig, m: int, eps: float, s) -> float:
    bp = bounds.bernstein_params(cfg.measure, cfg.p, cfg.q)
    D, exact = gradient_sup(cfg.measure, cfg.p, cfg.q, s)
    if not exact:
        D *= 2.0
    E = moment_E(cfg.measure, cfg.p, cfg.q, cfg.mc_samples, cfg.base_seed).E
    return bounds.thm4_failure_prob(cfg.d, cfg.p, cfg.q, eps, m, cfg.measure, s, bp.sigma, bp.L, D, E).bound_value


def coverage_table(cfg: ExperimentConfig, records: Sequence[TrialRecord]) -> list[CoverageRow]:
    """Exceedance frequencies of each high-probability bound against its failure probability."""
    if cfg.norm_kind != "sup":
        raise RFFError("coverage experiments use the sup norm")
    sigma = math.sqrt(second_moment(cfg.measure))
    rows = []
    by_m: dict[int, list[float]] = {}
    for rec in records:
        by_m.setdefault(rec.m, []).append(rec.measured_error + rec.certificate_slack)
    for m, certified in by_m.items():
        cert = np.array(certified)
        s = cfg.set_for(m)
        for tau in cfg.tau_grid:
            if (cfg.p + cfg.q).is_zero():
                bound, kind = bounds.thm1_bound(cfg.d, s.diameter, sigma, m, tau).bound_value, "T1"
            else:
                bound, kind = bounds.thm3_bound(cfg.d, cfg.p, cfg.q, s.diameter, cfg.measure, m, tau).bound_value, "T3"
            rows.append(_row(m, tau, kind, bound, math.exp(-tau), cert))
        for eps in cfg.eps_grid:
            prob = _bernstein_failure_prob(cfg, m, eps, s)
            rows.append(_row(m, eps, "T4", eps, prob, cert))
    return rows


def _row(m, level, kind, bound, p_theory, cert) -> CoverageRow:
    n = cert.size
    exceed = float(np.count_nonzero(cert >= bound)) / n
    p = min(max(p_theory, 0.0), 1.0)
    se = math.sqrt(p * (1.0 - p) / n)
    return CoverageRow(m, level, kind, bound, p_theory, exceed, n, se,
                       exceed <= p_theory + 3.0 * se, float(cert.max()))


def run_coverage_experiment(cfg: ExperimentConfig, threads: int = 1):
    """Returns (records, coverage rows)."""
    records = run_trials(cfg, threads)
    return records, coverage_table(cfg, records)


@dataclass
class GrowthSummary:
    rate: RateSummary
    rule: str
    trend_to_zero: bool
    first_third_median: float
    last_third_median: float
    critical_alpha: Optional[float]
    regime: str
    expected_consistent: Optional[bool]

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "rate"}
        out["rate"] = self.rate.to_dict()
        return out


def summarize_growth(cfg: ExperimentConfig, records: Sequence[TrialRecord]) -> GrowthSummary:
    rate = summarize_rate(records, cfg.norm_label)
    meds = np.array([e for _, e in rate.medians])
    k = max(1, len(meds) // 3)
    first, last = float(np.median(meds[:k])), float(np.median(meds[-k:]))
    g = cfg.growth
    rule = g.kind if g.kind == "constant" else f"{g.kind}({g.alpha if g.kind == 'power' else g.beta})"
    crit = None
    if cfg.norm_kind == "sup":
        # every shipped rule is e^{o(m)}
        regime, expected = "sup: log-diameter o(m)", True
    else:
        crit = cfg.r / (4.0 * cfg.d)
        if g.kind == "constant":
            regime, expected = "fixed set", True
        elif g.kind == "exponential":
            regime, expected = "above critical power", False
        elif math.isclose(g.alpha, crit):
            regime, expected = "at critical power", None
        elif g.alpha < crit:
            regime, expected = "below critical power", True
        else:
            regime, expected = "above critical power", False
    return GrowthSummary(rate, rule, last < first, first, last, crit, regime, expected)


def run_growing_diameter(cfg: ExperimentConfig, threads: int = 1):
    """Returns (records, GrowthSummary)."""
    records = run_trials(cfg, threads)
    return records, summarize_growth(cfg, records)
