"""Command line interface.

    rffbounds bound {t1,c1,t2,t3,t4} [flags]
    rffbounds moments --measure gaussian --d 1 --p 1 --q 0
    rffbounds experiment {rate,coverage,growth} --config FILE --out DIR [--check]

Exit codes: 0 success, 2 validation error, 3 failed ``--check`` assertion.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .. import bounds
from ..errors import RFFError, ValidationError
from ..multiindex import MultiIndex, parse_multi_index
from ..norms import Box, gradient_sup
from ..spectral import Discrete, GaussianIso, UniformBox, moment_E, moment_report
from .config import load_config
from .experiments import (coverage_to_csv, records_to_csv, run_coverage_experiment, run_growing_diameter,
                          run_rate_experiment)

EXIT_OK, EXIT_VALIDATION, EXIT_CHECK = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _global_flags(parser, suppress: bool):
    default = argparse.SUPPRESS
    parser.add_argument("--seed", type=int, default=default if suppress else None)
    parser.add_argument("--threads", type=int, default=default if suppress else 1)
    parser.add_argument("--format", choices=("csv", "json"), default=default if suppress else "json")


def _measure_flags(parser):
    parser.add_argument("--measure", choices=("gaussian", "uniform", "discrete"), default="gaussian")
    parser.add_argument("--d", type=int, default=1)
    parser.add_argument("--gamma", type=float, default=1.0)
    parser.add_argument("--R", type=float, default=1.0)
    parser.add_argument("--atoms", default=None, help="points separated by ';', coordinates by ','")
    parser.add_argument("--weights", default=None)


def _pq_flags(parser):
    parser.add_argument("--p", default=None)
    parser.add_argument("--q", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rffbounds", description=__doc__.splitlines()[0] if __doc__ else None)
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bound", help="evaluate a closed-form bound")
    bsub = b.add_subparsers(dest="which", required=True, parser_class=_Parser)
    for name in ("t1", "c1", "t2", "t3", "t4"):
        sp = bsub.add_parser(name)
        _global_flags(sp, suppress=True)
        sp.add_argument("--d", type=int, default=1)
        sp.add_argument("--diam", type=float, default=1.0)
        sp.add_argument("--m", type=int, required=True)
        if name in ("t1", "c1"):
            sp.add_argument("--sigma", type=float, required=True)
        if name in ("t1", "c1", "t2", "t3"):
            sp.add_argument("--tau", type=float, default=1.0)
        if name in ("c1", "t2"):
            sp.add_argument("--r", type=float, required=True)
        if name in ("t3", "t4"):
            sp.add_argument("--measure", choices=("gaussian", "uniform", "discrete"), default="gaussian")
            sp.add_argument("--gamma", type=float, default=1.0)
            sp.add_argument("--R", type=float, default=1.0)
            sp.add_argument("--atoms", default=None)
            sp.add_argument("--weights", default=None)
            _pq_flags(sp)
        if name == "t4":
            sp.add_argument("--eps", type=float, required=True)
            sp.add_argument("--sigma-b", dest="sigma_b", type=float, default=None)
            sp.add_argument("--L-b", dest="L_b", type=float, default=None)
            sp.add_argument("--D", type=float, default=None)
            sp.add_argument("--E", type=float, default=None)
            sp.add_argument("--mc-samples", dest="mc_samples", type=int, default=None)

    mo = sub.add_parser("moments", help="print the moment functionals of a spectral measure")
    _global_flags(mo, suppress=True)
    _measure_flags(mo)
    _pq_flags(mo)
    mo.add_argument("--mc-samples", dest="mc_samples", type=int, default=None)

    ex = sub.add_parser("experiment", help="run a seeded Monte Carlo experiment")
    _global_flags(ex, suppress=True)
    ex.add_argument("kind", choices=("rate", "coverage", "growth"))
    ex.add_argument("--config", required=True)
    ex.add_argument("--out", required=True)
    ex.add_argument("--check", action="store_true")
    return parser


def _measure(args):
    d = args.d
    if args.measure == "gaussian":
        return GaussianIso(d, args.gamma)
    if args.measure == "uniform":
        return UniformBox(d, args.R)
    if not args.atoms:
        raise ValidationError("--atoms is required for a discrete measure")
    atoms = np.array([[float(v) for v in row.split(",")] for row in args.atoms.split(";") if row.strip()])
    w = [float(v) for v in args.weights.split(",")] if args.weights else None
    return Discrete(d, atoms, w)


def _pq(args, d):
    p = parse_multi_index(args.p) if args.p else MultiIndex.zeros(d)
    q = parse_multi_index(args.q) if args.q else MultiIndex.zeros(d)
    return p, q


def _emit(payload: dict, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(payload, indent=2, default=_json_default) + "\n")
        return
    for key, value in _flatten(payload):
        out.write(f"{key},{value}\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o))


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _cmd_bound(args) -> dict:
    w = args.which
    if w == "t1":
        rep = bounds.thm1_bound(args.d, args.diam, args.sigma, args.m, args.tau)
    elif w == "c1":
        rep = bounds.cor1_bound(args.d, args.diam, args.sigma, args.m, args.tau, args.r)
    elif w == "t2":
        rep = bounds.thm2_bound(args.d, args.diam, args.m, args.tau, args.r)
    elif w == "t3":
        measure = _measure(args)
        p, q = _pq(args, args.d)
        rep = bounds.thm3_bound(args.d, p, q, args.diam, measure, args.m, args.tau)
    else:
        measure = _measure(args)
        p, q = _pq(args, args.d)
        s = Box(np.zeros(args.d), np.full(args.d, args.diam / math.sqrt(args.d)))
        sigma_b, L_b = args.sigma_b, args.L_b
        if sigma_b is None or L_b is None:
            bp = bounds.bernstein_params(measure, p, q)
            sigma_b = bp.sigma if sigma_b is None else sigma_b
            L_b = bp.L if L_b is None else L_b
        D = args.D
        if D is None:
            D, exact = gradient_sup(measure, p, q, s)
            D = D if exact else 2.0 * D
        E = args.E
        if E is None:
            E = moment_E(measure, p, q, args.mc_samples, args.seed or 0).E
        rep = bounds.thm4_failure_prob(args.d, p, q, args.eps, args.m, measure, s, sigma_b, L_b, D, E)
    return rep.to_dict()


def _cmd_moments(args) -> dict:
    measure = _measure(args)
    p, q = _pq(args, args.d)
    rep = moment_report(measure, p, q, args.mc_samples, args.seed or 0)
    out = rep.to_dict()
    if out["T"] is not None and math.isinf(out["T"]):
        out["T"] = "inf"
    out["measure_id"] = measure.measure_id
    return out


def _cmd_experiment(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_overrides(base_seed=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    threads = max(1, args.threads)
    ok = True
    if args.kind == "rate":
        records, summary = run_rate_experiment(cfg, threads)
        payload = summary.to_dict()
        lo, hi = cfg.slope_band
        ok = summary.slope is not None and lo <= summary.slope <= hi
        payload["check"] = {"slope_band": [lo, hi], "passed": ok}
    elif args.kind == "coverage":
        records, table = run_coverage_experiment(cfg, threads)
        payload = {"coverage": [row.to_dict() for row in table]}
        ok = all(row.validated for row in table)
        payload["check"] = {"all_validated": ok}
        (out_dir / "coverage.csv").write_text(coverage_to_csv(table), encoding="utf-8")
    else:
        records, summary = run_growing_diameter(cfg, threads)
        payload = summary.to_dict()
        ok = summary.expected_consistent is None or summary.trend_to_zero == summary.expected_consistent
        payload["check"] = {"trend_matches_expectation": ok}
    (out_dir / cfg.output_csv).write_text(records_to_csv(records), encoding="utf-8")
    (out_dir / cfg.output_json).write_text(
        json.dumps(payload, indent=2, default=_json_default) + "\n", encoding="utf-8")
    return payload, ok


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bound":
            _emit(_cmd_bound(args), args.format)
        elif args.command == "moments":
            _emit(_cmd_moments(args), args.format)
        else:
            payload, ok = _cmd_experiment(args)
            _emit(payload, args.format)
            if args.check and not ok:
                print("check failed", file=sys.stderr)
                return EXIT_CHECK
    except (ValidationError, RFFError, OSError) as exc:
        print(f"rffbounds: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
