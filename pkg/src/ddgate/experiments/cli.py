"""Command-line entry point: ``ddgate <scenario> [flags]``.

Exit codes: 0 success, 2 configuration error, 3 dt-halving convergence
failure (manifest written, tables withheld), 4 sideband-regime violation
under ``--strict``.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from .. import __version__
from ..errors import ConfigError, DDGateError
from .config import SCENARIOS, default_config_text, load_config, parse_yaml
from .manifest import RunManifest, write_table
from .scenarios import run_scenario, sideband_violations

log = logging.getLogger("ddgate")

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_VALIDITY = 0, 2, 3, 4
OUT_ENV = "DDGATE_OUT"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddgate", description="Simulate the double-dressed gradient gate.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="scenario", required=True, metavar="SCENARIO")
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", type=Path, help="YAML config file")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", type=Path, help=f"output directory (overrides ${OUT_ENV} and the config)")
        p.add_argument("--strict", action="store_true", help="refuse to run outside the sideband regime")
        p.add_argument("--dt", type=float, help="propagation time step in s")
        p.add_argument("--fock-dim", type=int, help="retained phonon levels")
        p.add_argument("--workers", type=int, help="process-pool size for scan points")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a dotted config key, value parsed as YAML")
        p.add_argument("--emit-default-config", action="store_true",
                       help="print an annotated default config and exit")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    out: dict = {}
    for item in args.set:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = parse_yaml(raw)
    if args.seed is not None:
        out["seed"] = args.seed
    if args.dt is not None:
        out["propagation.dt"] = args.dt
    if args.fock_dim is not None:
        out["propagation.fock_dim"] = args.fock_dim
    if args.workers is not None:
        out["workers"] = args.workers
    return out


def _out_dir(args: argparse.Namespace, cfg: dict) -> Path:
    if args.out is not None:
        return args.out
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    return Path(cfg["out"])


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.emit_default_config:
        sys.stdout.write(default_config_text(args.scenario))
        return EXIT_OK
    try:
        cfg = load_config(args.scenario, args.config, _overrides(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(args, cfg)
    cfg["out"] = str(out)

    if args.strict:
        bad = sideband_violations(cfg)
        if bad:
            print("sideband-regime conditions violated: " + ", ".join(bad), file=sys.stderr)
            return EXIT_VALIDITY

    start = time.perf_counter()
    try:
        result = run_scenario(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DDGateError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    manifest = RunManifest(
        scenario=args.scenario,
        version=__version__,
        config=cfg,
        seed=cfg["seed"],
        convergence=result.convergence,
        summary={**result.summary, "validity": result.validity},
        wall_time=time.perf_counter() - start,
    )
    if not result.converged:
        manifest.status = "convergence-failure"
        path = manifest.write(out)
        print(f"dt-halving check failed (max change {result.convergence.get('max_delta'):.3g}); see {path}", file=sys.stderr)
        return EXIT_CONVERGENCE
    for name, table in result.tables.items():
        path = out / f"{name}.csv"
        write_table(path, table, manifest.hash)
        manifest.outputs.append(path.name)
    path = manifest.write(out)
    log.info("wrote %s", path)
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
