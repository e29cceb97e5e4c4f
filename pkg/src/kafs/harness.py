"""Batch experiment runner: hyperparameter grids, evaluation, and reports.

A run fits the selector at every grid point, evaluates each selected subset
with repeated k-means, and writes machine-readable reports (summary.csv,
best.csv, run.json, per-point objective traces). Every number in summary.csv
is reproducible byte-for-byte from the config and seeds stored in run.json.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import DataMatrix, DatasetSpec, load_csv, standardize
from .kernels import KernelSpec, center, default_kernel_specs, gram
from .metrics import EvalReport, evaluate
from .multikernel import build_bank, fit_mk
from .solver import SolverConfig, fit

METHODS = ("kaufs", "mkaufs", "baseline")

DEFAULT_K_GRID = [10 * t for t in range(1, 11)]
DEFAULT_PARAM_GRID = [10.0**t for t in range(-3, 4)]

WORKERS_ENV = "KAFS_WORKERS"
OUT_DIR_ENV = "KAFS_OUT_DIR"

SUMMARY_COLUMNS = ["k", "alpha", "beta", "gamma", "acc_mean", "acc_std", "nmi_mean", "nmi_std", "red"]
BEST_COLUMNS = SUMMARY_COLUMNS + [
    "nmi_best_mean",
    "nmi_best_std",
    "nmi_best_alpha",
    "nmi_best_beta",
    "nmi_best_gamma",
]


@dataclass
class ExperimentConfig:
    """Everything a run needs: dataset, method, kernels, grids and seeds.

    dataset may be None only when the data matrix is passed to run()
    directly; such runs are not replayable from run.json. solver holds
    keyword overrides for SolverConfig (max_iter, rel_tol, eps_denom).
    kernel_bank defaults per method: a single linear kernel for "kaufs",
    the 14-kernel candidate set for "mkaufs".
    """

    dataset: DatasetSpec | None = None
    method: str = "kaufs"
    kernel_bank: list[KernelSpec] | None = None
    k_grid: list[int] = field(default_factory=lambda: list(DEFAULT_K_GRID))
    alpha_grid: list[float] = field(default_factory=lambda: list(DEFAULT_PARAM_GRID))
    beta_grid: list[float] = field(default_factory=lambda: list(DEFAULT_PARAM_GRID))
    gamma_grid: list[float] = field(default_factory=lambda: list(DEFAULT_PARAM_GRID))
    repeats: int = 30
    seed: int = 0
    n_clusters: int | None = None
    workers: int = 1
    solver: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.kernel_bank is None:
            if self.method == "kaufs":
                self.kernel_bank = [KernelSpec("linear")]
            elif self.method == "mkaufs":
                self.kernel_bank = default_kernel_specs()
            else:
                self.kernel_bank = []
        if self.method != "baseline":
            if not self.k_grid or not self.alpha_grid or not self.beta_grid:
                raise ValueError("k_grid, alpha_grid and beta_grid must be non-empty")
            if not self.kernel_bank:
                raise ValueError("kernel_bank must be non-empty")
        if self.method == "kaufs" and len(self.kernel_bank) != 1:
            raise ValueError(
                f"method 'kaufs' uses exactly one kernel per run, got {len(self.kernel_bank)}"
            )
        if self.method == "mkaufs" and not self.gamma_grid:
            raise ValueError("gamma_grid must be non-empty for method 'mkaufs'")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset.to_dict() if self.dataset is not None else None,
            "method": self.method,
            "kernel_bank": [s.to_dict() for s in self.kernel_bank],
            "k_grid": [int(k) for k in self.k_grid],
            "alpha_grid": [float(a) for a in self.alpha_grid],
            "beta_grid": [float(b) for b in self.beta_grid],
            "gamma_grid": [float(g) for g in self.gamma_grid],
            "repeats": self.repeats,
            "seed": self.seed,
            "n_clusters": self.n_clusters,
            "workers": self.workers,
            "solver": dict(self.solver),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        unknown = set(d) - {
            "dataset",
            "method",
            "kernel_bank",
            "k_grid",
            "alpha_grid",
            "beta_grid",
            "gamma_grid",
            "repeats",
            "seed",
            "n_clusters",
            "workers",
            "solver",
        }
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if d.get("dataset") is not None:
            d["dataset"] = DatasetSpec.from_dict(d["dataset"])
        if "kernel_bank" in d:
            d["kernel_bank"] = [KernelSpec.from_dict(s) for s in d["kernel_bank"]]
        return cls(**d)


@dataclass
class GridPoint:
    """One cell of the hyperparameter grid with its derived seeds."""

    index: int
    k: int
    alpha: float | None
    beta: float | None
    gamma: float | None
    solver_seed: int
    eval_seed: int


@dataclass
class GridResult:
    """Outcome of one grid point: metrics on success, the error otherwise."""

    point: GridPoint
    report: EvalReport | None = None
    eta: list[float] | None = None
    objective_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    fit_seconds: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class RunRecord:
    """Full outcome of a run; report() serializes it to files."""

    config: dict
    n_samples: int
    n_features: int
    n_clusters: int
    results: list[GridResult]
    best: list[dict]
    red_by_k: dict[int, float]
    red_mean_best: float
    std_convention: str = "population"

    @property
    def all_failed(self) -> bool:
        return all(not r.ok for r in self.results)


def _grid_points(config: ExperimentConfig, d: int) -> list[GridPoint]:
    points: list[GridPoint] = []
    if config.method == "baseline":
        points.append(GridPoint(0, d, None, None, None, config.seed, config.seed))
        return points
    for k in config.k_grid:
        if not 1 <= k < d:
            raise ValueError(f"k_grid entry {k} out of range for d={d}")
    gammas = config.gamma_grid if config.method == "mkaufs" else [None]
    idx = 0
    for k in config.k_grid:
        for alpha in config.alpha_grid:
            for beta in config.beta_grid:
                for gamma in gammas:
                    points.append(
                        GridPoint(
                            idx, int(k), float(alpha), float(beta),
                            float(gamma) if gamma is not None else None,
                            config.seed + idx, config.seed + idx,
                        )
                    )
                    idx += 1
    return points


def _solver_config(point: GridPoint, overrides: dict) -> SolverConfig:
    return SolverConfig(
        alpha=point.alpha, beta=point.beta, seed=point.solver_seed, **overrides
    )


def _best_rows(results: list[GridResult]) -> tuple[list[dict], dict[int, float], float]:
    by_k: dict[int, list[GridResult]] = {}
    for r in results:
        if r.ok:
            by_k.setdefault(r.point.k, []).append(r)

    def pick(rows: list[GridResult], key) -> GridResult:
        best = rows[0]
        for r in rows[1:]:
            if key(r) > key(best):
                best = r
        return best

    best_rows: list[dict] = []
    red_by_k: dict[int, float] = {}
    for k in sorted(by_k):
        rows = by_k[k]
        acc_best = pick(rows, lambda r: (r.report.acc_mean, r.report.nmi_mean))
        nmi_best = pick(rows, lambda r: (r.report.nmi_mean, r.report.acc_mean))
        row = {
            "k": k,
            "alpha": acc_best.point.alpha,
            "beta": acc_best.point.beta,
            "gamma": acc_best.point.gamma,
            "acc_mean": acc_best.report.acc_mean,
            "acc_std": acc_best.report.acc_std,
            "nmi_mean": acc_best.report.nmi_mean,
            "nmi_std": acc_best.report.nmi_std,
            "red": acc_best.report.red,
            "nmi_best_mean": nmi_best.report.nmi_mean,
            "nmi_best_std": nmi_best.report.nmi_std,
            "nmi_best_alpha": nmi_best.point.alpha,
            "nmi_best_beta": nmi_best.point.beta,
            "nmi_best_gamma": nmi_best.point.gamma,
        }
        best_rows.append(row)
        red_by_k[k] = acc_best.report.red
    red_mean = float(np.mean(list(red_by_k.values()))) if red_by_k else float("nan")
    return best_rows, red_by_k, red_mean


def run(config: ExperimentConfig, data: DataMatrix | None = None) -> RunRecord:
    """Execute every grid point and collect the results.

    Loads (and optionally standardizes) the dataset unless one is passed in.
    A failing grid point is recorded with its error and the run continues.
    Grid points may execute concurrently (config.workers or the KAFS_WORKERS
    environment variable); outputs are ordered and seeded deterministically
    regardless of the worker count.
    """
    if data is None:
        if config.dataset is None:
            raise ValueError("config has no dataset and no data matrix was provided")
        data = load_csv(config.dataset)
        if config.dataset.standardize:
            data = standardize(data)
    if data.labels is None:
        raise ValueError("experiment data must carry true labels for evaluation")

    x = data.values
    n, d = x.shape
    n_classes = len(np.unique(np.asarray(data.labels)))
    n_clusters = config.n_clusters if config.n_clusters is not None else n_classes
    points = _grid_points(config, d)

    kc = None
    bank = None
    if config.method == "kaufs":
        kc = center(gram(x, config.kernel_bank[0]))
    elif config.method == "mkaufs":
        bank = build_bank(x, config.kernel_bank)

    overrides = dict(config.solver)

    def execute(point: GridPoint) -> GridResult:
        try:
            if config.method == "baseline":
                report = evaluate(
                    data, np.arange(d), n_clusters, config.repeats, point.eval_seed
                )
                return GridResult(point, report=report)
            cfg = _solver_config(point, overrides)
            t0 = time.perf_counter()
            if config.method == "kaufs":
                selection = fit(x, kc, point.k, cfg)
                eta = None
            else:
                selection, weights = fit_mk(x, bank, point.k, cfg, gamma=point.gamma)
                eta = [float(e) for e in weights.eta]
            dt = time.perf_counter() - t0
            report = evaluate(
                data, selection.ranked_indices, n_clusters, config.repeats, point.eval_seed
            )
            return GridResult(
                point,
                report=report,
                eta=eta,
                objective_trace=[float(v) for v in selection.trace.objective_per_iter],
                iterations=selection.trace.iterations_run,
                converged=selection.trace.converged,
                fit_seconds=dt,
            )
        except Exception as exc:  # recorded, run continues
            return GridResult(point, error=f"{type(exc).__name__}: {exc}")

    workers = int(os.environ.get(WORKERS_ENV, config.workers))
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(execute, points))
    else:
        results = [execute(p) for p in points]

    best, red_by_k, red_mean = _best_rows(results)
    return RunRecord(
        config=config.to_dict(),
        n_samples=n,
        n_features=d,
        n_clusters=n_clusters,
        results=results,
        best=best,
        red_by_k=red_by_k,
        red_mean_best=red_mean,
    )


def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _csv_lines(columns: list[str], rows: list[dict]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def _summary_rows(record: RunRecord) -> list[dict]:
    rows = []
    for r in record.results:
        if not r.ok:
            continue
        rows.append(
            {
                "k": r.point.k,
                "alpha": r.point.alpha,
                "beta": r.point.beta,
                "gamma": r.point.gamma,
                "acc_mean": r.report.acc_mean,
                "acc_std": r.report.acc_std,
                "nmi_mean": r.report.nmi_mean,
                "nmi_std": r.report.nmi_std,
                "red": r.report.red,
            }
        )
    return rows


def report(record: RunRecord, out_dir: str) -> list[str]:
    """Write summary.csv, best.csv, run.json and per-point objective traces.

    File contents are a pure function of the record: re-running report on the
    same record produces byte-identical summary/best/trace files. Returns the
    written paths.
    """
    if not record.results:
        raise ValueError("run record has no grid results; nothing to report")

    summary_text = _csv_lines(SUMMARY_COLUMNS, _summary_rows(record))
    best_text = _csv_lines(BEST_COLUMNS, record.best)

    trace_files: dict[int, str] = {}
    trace_texts: dict[str, str] = {}
    for r in record.results:
        if r.ok and r.objective_trace:
            name = f"trace_{r.point.index}.csv"
            trace_files[r.point.index] = name
            lines = ["iteration,objective"]
            lines += [f"{i},{_fmt(v)}" for i, v in enumerate(r.objective_trace)]
            trace_texts[name] = "\n".join(lines) + "\n"

    payload = {
        "config": record.config,
        "n_samples": record.n_samples,
        "n_features": record.n_features,
        "n_clusters": record.n_clusters,
        "std_convention": record.std_convention,
        "results": [
            {
                "index": r.point.index,
                "k": r.point.k,
                "alpha": r.point.alpha,
                "beta": r.point.beta,
                "gamma": r.point.gamma,
                "solver_seed": r.point.solver_seed,
                "eval_seed": r.point.eval_seed,
                "metrics": r.report.to_dict() if r.report is not None else None,
                "eta": r.eta,
                "iterations": r.iterations,
                "converged": r.converged,
                "fit_seconds": r.fit_seconds,
                "trace_file": trace_files.get(r.point.index),
                "error": r.error,
            }
            for r in record.results
        ],
        "best": record.best,
        "red_by_k": {str(k): v for k, v in record.red_by_k.items()},
        "red_mean_best": record.red_mean_best,
    }

    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, text in [("summary.csv", summary_text), ("best.csv", best_text)]:
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)
    path = os.path.join(out_dir, "run.json")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)
    for name, text in sorted(trace_texts.items()):
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)
    return written


def run_and_report(
    config: ExperimentConfig, out_dir: str, data: DataMatrix | None = None
) -> RunRecord:
    record = run(config, data)
    report(record, out_dir)
    return record


def replay(run_json_path: str, out_dir: str) -> RunRecord:
    """Re-run an experiment from its run.json and write fresh reports.

    The regenerated summary.csv is byte-identical to the original because the
    config and the seed chain fully determine every number in it.
    """
    with open(run_json_path, encoding="utf-8") as fh:
        payload = json.load(fh)
    config = ExperimentConfig.from_dict(payload["config"])
    if config.dataset is None:
        raise ValueError("run.json records an in-memory dataset; replay needs a dataset path")
    return run_and_report(config, out_dir)
