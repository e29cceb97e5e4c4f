"""Dataset containers, CSV ingestion, standardization and synthetic benchmarks."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


@dataclass
class DataMatrix:
    """An n-by-d sample-by-feature matrix with feature names and optional labels."""

    values: np.ndarray
    feature_names: list[str]
    labels: list | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError(f"data must be 2-D, got ndim={v.ndim}")
        n, d = v.shape
        if n < 2 or d < 1:
            raise ValueError(f"need at least 2 samples and 1 feature, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise ValueError("data contains non-finite entries")
        names = [str(c) for c in self.feature_names]
        if len(names) != d:
            raise ValueError(f"{len(names)} feature names for {d} features")
        if len(set(names)) != d:
            raise ValueError("feature names must be unique")
        if self.labels is not None and len(self.labels) != n:
            raise ValueError(f"{len(self.labels)} labels for {n} samples")
        self.values = v
        self.feature_names = names

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass
class DatasetSpec:
    """Where and how to read a CSV dataset."""

    path: str
    label_column: str | int | None = None
    delimiter: str = ","
    has_header: bool = True
    standardize: bool = True

    def __post_init__(self):
        if len(self.delimiter) != 1:
            raise ValueError(f"delimiter must be a single character, got {self.delimiter!r}")

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "label_column": self.label_column,
            "delimiter": self.delimiter,
            "has_header": self.has_header,
            "standardize": self.standardize,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSpec":
        return cls(**d)


def load_csv(spec: DatasetSpec) -> DataMatrix:
    """Read a CSV file into a DataMatrix, extracting the label column if given.

    Rows keep their file order. Parse failures name the offending file line
    and column; ragged rows are rejected.
    """
    with open(spec.path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=spec.delimiter))
    if not rows:
        raise ValueError(f"{spec.path}: file is empty")

    header: list[str] | None = None
    body = rows
    first_line = 1
    if spec.has_header:
        header = rows[0]
        body = rows[1:]
        first_line = 2
    if not body:
        raise ValueError(f"{spec.path}: no data rows")

    ncol = len(body[0])
    for i, row in enumerate(body):
        if len(row) != ncol:
            raise ValueError(
                f"{spec.path}: line {first_line + i} has {len(row)} fields, expected {ncol}"
            )
    if header is not None and len(header) != ncol:
        raise ValueError(f"{spec.path}: header has {len(header)} fields, data rows have {ncol}")

    label_idx: int | None = None
    if spec.label_column is not None:
        if isinstance(spec.label_column, str):
            if header is None:
                raise ValueError("label_column given by name requires has_header=True")
            try:
                label_idx = header.index(spec.label_column)
            except ValueError:
                raise ValueError(
                    f"{spec.path}: label column {spec.label_column!r} not found in header"
                ) from None
        else:
            label_idx = int(spec.label_column)
            if not 0 <= label_idx < ncol:
                raise ValueError(f"label column index {label_idx} out of range for {ncol} columns")

    feat_cols = [j for j in range(ncol) if j != label_idx]
    if not feat_cols:
        raise ValueError(f"{spec.path}: no feature columns left after removing the label column")
    if header is not None:
        names = [header[j] for j in feat_cols]
    else:
        names = [f"f{i}" for i in range(len(feat_cols))]

    values = np.empty((len(body), len(feat_cols)), dtype=float)
    labels: list[str] | None = [] if label_idx is not None else None
    for i, row in enumerate(body):
        for out_j, j in enumerate(feat_cols):
            cell = row[j]
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(
                    f"{spec.path}: cannot parse {cell!r} as a number "
                    f"at line {first_line + i}, column {j + 1}"
                ) from None
            if not math.isfinite(v):
                raise ValueError(
                    f"{spec.path}: non-finite value {cell!r} at line {first_line + i}, "
                    f"column {j + 1}"
                )
            values[i, out_j] = v
        if labels is not None:
            labels.append(row[label_idx])
    return DataMatrix(values, names, labels)


def write_csv(data: DataMatrix, path: str, label_name: str = "label") -> None:
    """Write a DataMatrix as CSV with a header row.

    Reals are written with 17 significant digits, enough for an exact
    binary64 round trip through load_csv.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = list(data.feature_names)
        if data.labels is not None:
            header.append(label_name)
        writer.writerow(header)
        for i in range(data.n_samples):
            row = [format(v, ".17g") for v in data.values[i]]
            if data.labels is not None:
                row.append(str(data.labels[i]))
            writer.writerow(row)


def standardize(data: DataMatrix) -> DataMatrix:
    """Center each feature to mean 0 and scale to unit population std.

    Constant features are left at 0 after centering. Idempotent.
    """
    x = data.values
    centered = x - x.mean(axis=0, keepdims=True)
    std = x.std(axis=0, keepdims=True)
    scale = np.where(std > 0, std, 1.0)
    out = centered / scale
    labels = list(data.labels) if data.labels is not None else None
    return DataMatrix(out, list(data.feature_names), labels)


@dataclass
class PlantedSpec:
    """Synthetic benchmark: Gaussian class blobs in an informative subspace
    padded with pure-noise features."""

    n: int = 200
    d_informative: int = 10
    d_noise: int = 90
    n_classes: int = 3
    separation: float = 10.0
    noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2 or self.n < self.n_classes:
            raise ValueError(f"need n >= n_classes >= 2, got n={self.n}, n_classes={self.n_classes}")
        if self.d_informative < 1:
            raise ValueError("d_informative must be >= 1")
        if self.d_noise < 0:
            raise ValueError("d_noise must be >= 0")
        if not self.separation > 0 or not self.noise_sigma > 0:
            raise ValueError("separation and noise_sigma must be positive")


def generate_planted(spec: PlantedSpec) -> DataMatrix:
    """Generate the planted-feature benchmark.

    The first ``d_informative`` columns hold ``n_classes`` unit-variance
    Gaussian blobs whose centroids are at pairwise distance >= ``separation``;
    the remaining ``d_noise`` columns are N(0, noise_sigma^2) noise. Labels
    are the blob ids; class sizes differ by at most one sample. Deterministic
    for a fixed seed.
    """
    rng = np.random.default_rng(spec.seed)
    c, d_inf = spec.n_classes, spec.d_informative
    while True:
        raw = rng.normal(size=(c, d_inf))
        diffs = raw[:, None, :] - raw[None, :, :]
        dist = np.sqrt((diffs**2).sum(axis=2))
        dmin = dist[np.triu_indices(c, k=1)].min()
        if dmin > 0:
            break
    centroids = raw * (spec.separation / dmin)

    base, rem = divmod(spec.n, c)
    counts = [base + (1 if i < rem else 0) for i in range(c)]
    labels = np.repeat(np.arange(c), counts)

    informative = centroids[labels] + rng.normal(size=(spec.n, d_inf))
    if spec.d_noise:
        noise = rng.normal(scale=spec.noise_sigma, size=(spec.n, spec.d_noise))
        values = np.hstack([informative, noise])
    else:
        values = informative
    names = [f"inf_{j}" for j in range(d_inf)] + [f"noise_{j}" for j in range(spec.d_noise)]
    return DataMatrix(values, names, labels.tolist())
