"""Command-line entry point.

    cv2xsim simulate --config sim.toml [--jobs N] [--seed S] [--out DIR]
    cv2xsim cdf      --config sim.toml [--seed S] [--out DIR]
    cv2xsim validate --config sim.toml

Failures print one line ``cv2xsim: error: <category>: <message>`` to stderr
and exit non-zero (2 parse, 3 validation, 4 I/O, 1 anything else).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import (
    MAX_SEED,
    ConfigParseError,
    ConfigValidationError,
    SimConfig,
    dump_config,
    parse_config,
)
from .sweep import compute_cdfs, export_csv, run_sweep

EXIT_CODES = {"config-parse": 2, "config-validation": 3, "io": 4, "internal": 1}


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _jobs(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("--jobs must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cv2xsim", description="C-V2X highway sidelink PRR simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the PRR sweep and the pathloss CDFs")
    sim.add_argument("--config", required=True)
    sim.add_argument("--jobs", type=_jobs, default=1)
    sim.add_argument("--seed", type=_seed)
    sim.add_argument("--out")

    cdf = sub.add_parser("cdf", help="write pathloss CDF datasets only")
    cdf.add_argument("--config", required=True)
    cdf.add_argument("--seed", type=_seed)
    cdf.add_argument("--out")

    val = sub.add_parser("validate", help="parse the config and print it fully resolved")
    val.add_argument("--config", required=True)
    return parser


def _apply_overrides(cfg: SimConfig, args) -> SimConfig:
    sweep = cfg.sweep
    if getattr(args, "seed", None) is not None:
        sweep = replace(sweep, seed=args.seed)
    if getattr(args, "out", None):
        sweep = replace(sweep, output_dir=args.out)
    return replace(cfg, sweep=sweep)


def _fail(category: str, message: str) -> int:
    message = " ".join(str(message).split())
    print(f"cv2xsim: error: {category}: {message}", file=sys.stderr)
    return EXIT_CODES[category]


def _run(args) -> int:
    try:
        cfg = parse_config(Path(args.config))
    except FileNotFoundError:
        return _fail("io", f"config file not found: {args.config}")
    cfg = _apply_overrides(cfg, args)

    if args.command == "validate":
        print(dump_config(cfg))
        return 0
    if args.command == "cdf":
        written = export_csv([], compute_cdfs(cfg), cfg.output_dir)
        print(f"wrote {len(written)} files to {cfg.output_dir}")
        return 0

    reports, _ = run_sweep(cfg, jobs=args.jobs)
    for r in reports:
        mcs = r.mcs_used.index if r.mcs_used else "-"
        flag = "" if r.feasible else "  (capacity infeasible)"
        print(
            f"{r.model.value:<13} bw={r.bandwidth_hz / 1e6:>5.1f} MHz  ivd={r.ivd_m:>4g} m  "
            f"mcs={mcs}  prr={r.prr:.4f}{flag}"
        )
    print(f"results written to {cfg.output_dir}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.ERROR,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _run(args)
    except ConfigParseError as exc:
        return _fail("config-parse", exc)
    except ConfigValidationError as exc:
        return _fail("config-validation", exc)
    except OSError as exc:
        return _fail("io", exc)
    except Exception as exc:  # noqa: BLE001 - single-line contract for every failure
        return _fail("internal", f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
