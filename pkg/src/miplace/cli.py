"""Command-line harness.

Runs a benchmark sweep described by a JSON config file and/or flags,
the randomized self-verification suite, or the HTTP service.  Exit
codes: 0 on success, 1 when verification fails, 2 on usage, config, or
dataset errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    RunConfig,
    report_to_csv,
    report_to_json,
    run_experiment,
    verify,
)
from .errors import PlacementError
from .objectives import KINDS

USAGE_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="miplace",
        description="Mutual-information sensor placement benchmarks.",
    )
    p.add_argument("--config", metavar="FILE", help="JSON file of config fields")
    p.add_argument("--dataset", metavar="CSV", help="dataset path (header x,y,value)")
    p.add_argument("--objective", choices=KINDS, help="objective kind")
    p.add_argument("--optimizer", choices=("greedy", "lazy"), help="selection loop")
    p.add_argument(
        "--s", metavar="LIST", help="comma-separated selection sizes, e.g. 5,10,20"
    )
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument(
        "--out",
        metavar="STEM",
        help="write STEM.json and STEM.csv instead of printing JSON",
    )
    p.add_argument(
        "--verify",
        nargs="?",
        const=100,
        type=int,
        metavar="TRIALS",
        help="run the randomized self-checks (default 100 trials) and exit",
    )
    p.add_argument(
        "--synthetic",
        type=int,
        metavar="M",
        help="run on a synthetic dataset of M points instead of --dataset",
    )
    p.add_argument("--serve", action="store_true", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1", help="bind address for --serve")
    p.add_argument("--port", type=int, default=8000, help="port for --serve")
    return p


def _merged_config(args) -> RunConfig:
    fields: dict = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                fields = json.load(fh)
        except OSError as exc:
            raise PlacementError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise PlacementError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(fields, dict):
            raise PlacementError("config must be a JSON object")
    if args.dataset is not None:
        fields["dataset"] = args.dataset
    if args.synthetic is not None:
        fields["synthetic_m"] = args.synthetic
        fields.pop("dataset", None)
    if args.objective is not None:
        fields["objective"] = args.objective
    if args.optimizer is not None:
        fields["optimizer"] = args.optimizer
    if args.s is not None:
        try:
            fields["s_values"] = [int(tok) for tok in args.s.split(",") if tok.strip()]
        except ValueError:
            raise PlacementError(f"--s expects comma-separated integers: {args.s!r}")
    if args.seed is not None:
        fields["seed"] = args.seed
    return RunConfig.from_dict(fields)


def _write_report(report, out: str | None) -> None:
    js = report_to_json(report)
    if out is None:
        sys.stdout.write(js)
        return
    stem = Path(out)
    if stem.suffix in (".json", ".csv"):
        stem = stem.with_suffix("")
    json_path = stem.with_suffix(".json")
    csv_path = stem.with_suffix(".csv")
    json_path.write_text(js)
    csv_path.write_text(report_to_csv(report))
    print(f"wrote {json_path} and {csv_path}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.serve:
        import uvicorn

        from .service.app import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    try:
        if args.verify is not None:
            seed = args.seed if args.seed is not None else 0
            summary = verify(seed=seed, trials=args.verify)
            json.dump(summary, sys.stdout, indent=2)
            sys.stdout.write("\n")
            return 0 if summary["passed"] else 1

        config = _merged_config(args)
        report = run_experiment(config)
        _write_report(report, args.out)
        return 0
    except PlacementError as exc:
        notes = getattr(exc, "__notes__", None)
        detail = f" ({'; '.join(notes)})" if notes else ""
        print(f"error: {exc}{detail}", file=sys.stderr)
        return USAGE_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
