"""Command-line entry points: run experiment grids, generate benchmarks,
evaluate ad-hoc feature subsets.

Exit codes: 0 on success, 1 on configuration errors, 2 when every grid point
of a run failed. KAFS_WORKERS overrides the worker count and KAFS_OUT_DIR
the output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .data import DatasetSpec, PlantedSpec, generate_planted, load_csv, standardize, write_csv
from .harness import OUT_DIR_ENV, ExperimentConfig, run_and_report
from .metrics import evaluate

_PLANTED_INT_FIELDS = ("n", "d_informative", "d_noise", "n_classes", "seed")
_PLANTED_FLOAT_FIELDS = ("separation", "noise_sigma")


class _Parser(argparse.ArgumentParser):
    # usage problems are configuration errors -> exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _parse_planted(text: str) -> PlantedSpec:
    kwargs = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"planted parameter {part!r} is not key=value")
        key, value = part.split("=", 1)
        key = key.strip()
        if key in _PLANTED_INT_FIELDS:
            kwargs[key] = int(value)
        elif key in _PLANTED_FLOAT_FIELDS:
            kwargs[key] = float(value)
        else:
            raise ValueError(
                f"unknown planted parameter {key!r}; expected one of "
                f"{_PLANTED_INT_FIELDS + _PLANTED_FLOAT_FIELDS}"
            )
    return PlantedSpec(**kwargs)


def _cmd_run(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg_dict = json.load(fh)
        config = ExperimentConfig.from_dict(cfg_dict)
        out_dir = os.environ.get(OUT_DIR_ENV) or args.out
        record = run_and_report(config, out_dir)
    except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    failures = [r for r in record.results if not r.ok]
    for r in failures:
        print(f"grid point {r.point.index} failed: {r.error}", file=sys.stderr)
    if record.all_failed:
        print("all grid points failed", file=sys.stderr)
        return 2
    print(f"wrote reports for {len(record.results) - len(failures)} grid points to {out_dir}")
    return 0


def _cmd_generate(args) -> int:
    try:
        spec = _parse_planted(args.planted)
        data = generate_planted(spec)
        write_csv(data, args.out)
    except (OSError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {args.out}: {data.n_samples} samples, {data.n_features} features "
        f"({spec.d_informative} informative), {spec.n_classes} classes"
    )
    return 0


def _cmd_evaluate(args) -> int:
    try:
        label_column = args.label_index if args.label_index is not None else args.label_column
        dataset = DatasetSpec(
            path=args.data,
            label_column=label_column,
            delimiter=args.delimiter,
            has_header=not args.no_header,
            standardize=not args.no_standardize,
        )
        data = load_csv(dataset)
        if dataset.standardize:
            data = standardize(data)
        indices = np.array([int(t) for t in args.features.split(",") if t.strip() != ""])
        rep = evaluate(
            data, indices, n_clusters=args.clusters, repeats=args.repeats, seed=args.seed
        )
    except (OSError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    payload = rep.to_dict()
    payload["features"] = [int(i) for i in indices]
    payload["data"] = args.data
    payload["seed"] = args.seed
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="kafs",
        description="Kernel-alignment unsupervised feature selection toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment grid from a JSON config")
    p_run.add_argument("--config", required=True, help="JSON file mirroring ExperimentConfig")
    p_run.add_argument(
        "--out",
        default="kafs_out",
        help=f"output directory (default kafs_out; {OUT_DIR_ENV} overrides)",
    )
    p_run.set_defaults(func=_cmd_run)

    p_gen = sub.add_parser("generate", help="generate a planted-feature benchmark CSV")
    p_gen.add_argument(
        "--planted",
        required=True,
        help="comma-separated key=value pairs: n, d_informative, d_noise, "
        "n_classes, separation, noise_sigma, seed",
    )
    p_gen.add_argument("--out", required=True, help="output CSV path")
    p_gen.set_defaults(func=_cmd_generate)

    p_eval = sub.add_parser("evaluate", help="evaluate an explicit feature subset")
    p_eval.add_argument("--data", required=True, help="CSV dataset with labels")
    p_eval.add_argument("--features", required=True, help="comma-separated feature indices")
    p_eval.add_argument("--label-column", default="label", help="label column name")
    p_eval.add_argument("--label-index", type=int, default=None, help="label column index")
    p_eval.add_argument("--clusters", type=int, default=None, help="number of clusters")
    p_eval.add_argument("--repeats", type=int, default=30)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--delimiter", default=",")
    p_eval.add_argument("--no-header", action="store_true")
    p_eval.add_argument("--no-standardize", action="store_true")
    p_eval.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
