"""Command line front end.

Three subcommands:

    mcf-lab run <config.toml> [--strict] [--out DIR]
    mcf-lab suite <manifest.toml> [--out DIR] [--criteria] [--strict]
    mcf-lab classify <history-dir> --center x,y[,z],t [--out FILE]

Exit codes: 0 success, 2 invalid configuration, 3 aborted evolution, 4
violated assertion under strict mode or a failed gate criterion. The
MCF_LAB_THREADS environment variable caps compiled-kernel threads.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .geometry import SpaceTimePoint
from .scenario import (EXIT_CONFIG, EXIT_OK, ConfigError, run_scenario,
                       run_suite)


def _cap_threads() -> None:
    raw = os.environ.get("MCF_LAB_THREADS")
    if not raw:
        return
    try:
        import numba
        numba.set_num_threads(max(1, int(raw)))
    except (ImportError, ValueError):
        pass


def _parse_center(raw: str) -> SpaceTimePoint:
    parts = [float(v) for v in raw.split(",")]
    if len(parts) < 3:
        raise ValueError("--center needs x,y[,z],t")
    return SpaceTimePoint(np.array(parts[:-1]), parts[-1])


def _cmd_run(args) -> int:
    code, report, _ = run_scenario(args.config, args.out,
                                   strict=args.strict)
    for v in report.get("violations", []):
        print(f"violation: {v}", file=sys.stderr)
    if "classification" in report:
        cl = report["classification"]
        print(f"classification: {cl['label']} "
              f"(residual {cl['residual']:.4g})")
    print(f"{report['name']}: exit {code}, outputs in "
          f"{Path(args.out) / report['name']}")
    return code


def _cmd_suite(args) -> int:
    code = run_suite(args.manifest, args.out,
                     criteria=True if args.criteria else None,
                     strict=True if args.strict else None)
    print(f"suite: exit {code}, summary in "
          f"{Path(args.out) / 'suite_report.md'}")
    return code


def _cmd_classify(args) -> int:
    from .io import read_history, write_classification_json
    from .singularity import DEFAULT_LAMBDAS, classify_tangent_flow

    try:
        center = _parse_center(args.center)
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    hist = read_history(args.history_dir)
    cls = classify_tangent_flow(hist, center, list(DEFAULT_LAMBDAS))
    out = args.out or str(Path(args.history_dir) / "classification.json")
    write_classification_json(out, cls)
    print(f"{cls.label()} (residual {cls.residual:.4g}, "
          f"rescale {cls.lambda_used:g})")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mcf-lab",
                                description="mean curvature flow "
                                "laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario config")
    r.add_argument("config")
    r.add_argument("--strict", action="store_true",
                   help="exit 4 on any violated assertion")
    r.add_argument("--out", default="runs", help="output directory")
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("suite", help="run a manifest of scenarios")
    s.add_argument("manifest")
    s.add_argument("--out", default="runs", help="output directory")
    s.add_argument("--criteria", action="store_true",
                   help="also run the release gate criteria")
    s.add_argument("--strict", action="store_true",
                   help="strict mode for every scenario")
    s.set_defaults(func=_cmd_suite)

    c = sub.add_parser("classify", help="classify a blow-up limit from "
                       "an exported history")
    c.add_argument("history_dir")
    c.add_argument("--center", required=True,
                   help="space-time center as x,y[,z],t")
    c.add_argument("--out", default="",
                   help="classification JSON path (default: inside the "
                   "history directory)")
    c.set_defaults(func=_cmd_classify)
    return p


def main(argv=None) -> int:
    _cap_threads()
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
