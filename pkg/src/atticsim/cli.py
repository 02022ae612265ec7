"""Command-line entry point.

Subcommands:
  run <scenario.json> [--seed N] [--out DIR]
  replay <log.jsonl>
  serve <scenario.json> [--listen HOST:PORT]
  export <run-dir> --kind map|rois|frames [--out DIR]

Exit codes: 0 ok, 1 validation error, 2 runtime error, 3 replay divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_DIVERGENCE = 3


def _load_scenario(path_str: str, seed=None):
    from .scenarios import BUILTIN
    from .sim import Scenario

    if path_str in BUILTIN:
        doc = BUILTIN[path_str]()
        base_dir = Path.cwd()
    else:
        path = Path(path_str)
        doc = json.loads(path.read_text())
        base_dir = path.parent
    if seed is not None:
        doc["seed"] = seed
    return Scenario.from_document(doc, base_dir=base_dir)


def cmd_run(args) -> int:
    from .export import write_run_artifacts
    from .sim import run

    try:
        scenario = _load_scenario(args.scenario, seed=args.seed)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        sim, metrics = run(scenario, log_path=out / "replay.jsonl")
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    write_run_artifacts(sim, metrics, out)
    print(json.dumps(metrics.to_dict(), indent=2))
    return EXIT_OK


def cmd_replay(args) -> int:
    from .sim import replay

    try:
        verdict = replay(args.log)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if verdict.ok:
        print(f"replay ok: {verdict.ticks_checked} ticks verified")
        return EXIT_OK
    where = ("" if verdict.first_divergence is None
             else f" at tick {verdict.first_divergence}")
    print(f"replay FAILED{where}: {verdict.reason}", file=sys.stderr)
    return EXIT_DIVERGENCE


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app
    from .sim import Simulation

    try:
        scenario = _load_scenario(args.scenario)
        host, _, port = args.listen.rpartition(":")
        port = int(port)
        if not host:
            raise ValueError(f"listen address must be HOST:PORT, got {args.listen!r}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    sim = Simulation(scenario)
    app = create_app(sim)
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    except (OSError, SystemExit) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_export(args) -> int:
    from .export import ExportError, export

    try:
        written = export(args.run_dir, args.kind, out_dir=args.out)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in written:
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atticsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a scenario headlessly")
    p.add_argument("scenario", help="scenario JSON path or built-in name")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="run_out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="verify a replay log")
    p.add_argument("log")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="serve a live teleoperated simulation")
    p.add_argument("scenario")
    p.add_argument("--listen", default="127.0.0.1:8751")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", help="re-derive artifacts from a run directory")
    p.add_argument("run_dir")
    p.add_argument("--kind", required=True, choices=["map", "rois", "frames"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
