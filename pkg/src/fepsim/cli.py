"""Command-line front end.

Every subcommand takes a JSON config file; command-line flags override
the seeding and output fields so one config can drive many runs.  Usage:

    fepsim hydro-compare --config run.json --seed 7 --out results/
    fepsim verify --out checks/

Exit codes: 0 success, 1 failed verification checks, 2 invalid config.
"""

from __future__ import annotations

import argparse
import json
import sys

from .runner import KINDS, ConfigError, run, validate_config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fepsim",
        description="Facilitated-exclusion simulation and validation toolkit.",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", help="path to the JSON config file")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--out", help="override out_dir")
        p.add_argument("--threads", type=int, help="worker processes for replicas")
        p.add_argument(
            "--deterministic",
            action="store_true",
            help="omit timestamps so reruns are byte-identical",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    document: dict = {}
    if args.config is not None:
        try:
            with open(args.config) as handle:
                document = json.load(handle)
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2
        except json.JSONDecodeError as exc:
            print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
            return 2
    if not isinstance(document, dict):
        print("error: config must be a JSON object", file=sys.stderr)
        return 2

    declared = document.setdefault("kind", args.kind)
    if declared != args.kind:
        print(
            f"error: config kind {declared!r} does not match subcommand {args.kind!r}",
            file=sys.stderr,
        )
        return 2
    if args.seed is not None:
        document["master_seed"] = args.seed
    if args.out is not None:
        document["out_dir"] = args.out
    if args.threads is not None:
        document["threads"] = args.threads
    if args.deterministic:
        document["deterministic"] = True

    try:
        cfg = validate_config(document)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2

    manifest = run(cfg)
    for record in manifest.outputs:
        print(f"wrote {cfg.out_dir}/{record['path']} ({record['bytes']} bytes)")
    print(f"wrote {cfg.out_dir}/manifest.json")
    if manifest.failures:
        for name in manifest.failures:
            print(f"FAILED check: {name}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
