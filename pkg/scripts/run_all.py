"""Run every scenario with its defaults and print a one-line summary of each.

    python scripts/run_all.py --out results
    python scripts/run_all.py --out /tmp/quick --quick    # coarse smoke run
"""
import argparse
import json
import sys
import time
from pathlib import Path

from ddgate.experiments import SCENARIOS
from ddgate.experiments.cli import main as cli

QUICK = ["--dt", "2e-7", "--set", "propagation.check_convergence=false"]


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--quick", action="store_true", help="coarse step, no dt-halving")
    ap.add_argument("--only", nargs="*", choices=SCENARIOS)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    worst = 0
    for name in args.only or SCENARIOS:
        start = time.perf_counter()
        argv = [name, "--out", str(args.out / name), "--workers", str(args.workers)]
        code = cli(argv + (QUICK if args.quick else []))
        secs = time.perf_counter() - start
        worst = max(worst, code)
        status = "ok" if code == 0 else f"exit {code}"
        print(f"{name:16s} {status:8s} {secs:7.1f} s", flush=True)
        manifest = args.out / name / f"{name}_manifest.json"
        if manifest.exists():
            conv = json.loads(manifest.read_text())["convergence"]
            if "max_delta" in conv:
                print(f"{'':16s} dt-halving max change {conv['max_delta']:.2e}")
    return worst


if __name__ == "__main__":
    sys.exit(main())
