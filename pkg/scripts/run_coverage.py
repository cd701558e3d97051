"""Bound coverage: exceedance frequencies of the kernel bound and the Bernstein-based failure probability.

    python scripts/run_coverage.py [--out results/coverage] [--threads N] [config ...]

Each config writes its CSV and JSON into its own subdirectory of --out; the
exit status is the worst --check status over all configs.
"""
import argparse
import sys
from pathlib import Path

from rffbounds.harness.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
DEFAULT = ["coverage_gaussian_t1.cfg", "coverage_uniform_t4.cfg"]


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="*", default=DEFAULT)
    ap.add_argument("--out", default="results/coverage")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    status = 0
    for name in args.configs:
        path = Path(name) if Path(name).exists() else CONFIGS / name
        out = Path(args.out) / path.stem
        print(f"== {path.name} -> {out}", file=sys.stderr)
        code = main(["--threads", str(args.threads), "experiment", "coverage", "--config", str(path),
                     "--out", str(out), "--check"])
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(run())
