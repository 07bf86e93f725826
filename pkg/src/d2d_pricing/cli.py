"""Command line entry point.

    d2d-pricing run --config fig7.json [--out DIR] [--seed N] [--trials N]
    d2d-pricing run --preset fig7 --full
    d2d-pricing list-scenarios
"""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import ConfigError, ScenarioConfig, SolverError, load_preset, preset_names, run_scenario

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SOLVER = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="d2d-pricing", description="Interference pricing experiments for D2D underlay networks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress and excluded trials")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write CSV plus metadata")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="scenario JSON file")
    src.add_argument("--preset", help="name of a shipped preset (see list-scenarios)")
    run.add_argument("--out", help="output directory (default: directory of output_path)")
    run.add_argument("--seed", type=int, help="override the base seed")
    run.add_argument("--trials", type=int, help="override the Monte Carlo trial count")
    run.add_argument("--full", action="store_true", help="use the full trial count of the preset")
    run.add_argument("--jobs", type=int, default=1, help="worker processes for Monte Carlo trials")

    sub.add_parser("list-scenarios", help="list shipped presets")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "list-scenarios":
        for name in preset_names():
            cfg = load_preset(name)
            print(f"{name:6s} {cfg.scenario.value:22s} {cfg.description}")
        return 0

    try:
        cfg = ScenarioConfig.from_json(args.config) if args.config else load_preset(args.preset)
        trials = args.trials
        if args.full and trials is None:
            trials = cfg.full_trials
        cfg = cfg.with_overrides(seed=args.seed, trials=trials)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        csv_path, meta_path = run_scenario(cfg, out_dir=args.out, jobs=args.jobs)
    except SolverError as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(csv_path)
    print(meta_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
