"""Clustering-based evaluation of feature subsets.

k-means over the selected columns, accuracy after optimal label matching,
normalized mutual information, and a redundancy rate built on distance
correlation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .data import DataMatrix


def _as_labels(x, name: str) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D label array")
    return arr


def _encode(labels: np.ndarray) -> np.ndarray:
    return np.unique(labels, return_inverse=True)[1]


def kmeans(
    points,
    n_clusters: int,
    seed: int = 0,
    max_iter: int = 100,
    return_history: bool = False,
):
    """Lloyd's k-means with seeded random-point initialization.

    Initial centroids are n_clusters distinct data points drawn with the
    seed; iteration stops at an assignment fixpoint or after max_iter rounds.
    An empty cluster steals the point currently farthest from its centroid
    (from a cluster with more than one member, lowest index on ties), so every
    cluster is always non-empty. Deterministic for a fixed seed.

    Returns the label array, or (labels, sse_per_iter) with
    return_history=True; the recorded within-cluster SSE is non-increasing.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"points must be 1-D or 2-D, got ndim={x.ndim}")
    if not np.isfinite(x).all():
        raise ValueError("points contain non-finite entries")
    n = x.shape[0]
    if not 1 <= n_clusters <= n:
        raise ValueError(f"need 1 <= n_clusters <= n, got n_clusters={n_clusters}, n={n}")

    rng = np.random.default_rng(seed)
    centroids = x[rng.choice(n, size=n_clusters, replace=False)].copy()

    def assign(cents: np.ndarray) -> np.ndarray:
        d2 = ((x[:, None, :] - cents[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        # repair empties: move the globally farthest point into each empty
        # cluster, never emptying another cluster in the process
        counts = np.bincount(labels, minlength=n_clusters)
        for c in np.flatnonzero(counts == 0):
            own = d2[np.arange(n), labels]
            movable = counts[labels] > 1
            own = np.where(movable, own, -np.inf)
            j = int(own.argmax())
            counts[labels[j]] -= 1
            labels[j] = c
            counts[c] += 1
        return labels

    def means(labels: np.ndarray) -> np.ndarray:
        cents = np.empty_like(centroids)
        for c in range(n_clusters):
            cents[c] = x[labels == c].mean(axis=0)
        return cents

    labels = assign(centroids)
    history: list[float] = []
    for _ in range(max_iter):
        centroids = means(labels)
        history.append(float(((x - centroids[labels]) ** 2).sum()))
        new_labels = assign(centroids)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels

    if return_history:
        return labels, history
    return labels


def acc(pred, truth) -> float:
    """Clustering accuracy after the optimal one-to-one label matching.

    Builds the contingency table and solves the maximum-weight assignment
    (Kuhn-Munkres); the matched count over n is invariant to relabeling
    either argument.
    """
    p = _as_labels(pred, "pred")
    t = _as_labels(truth, "truth")
    if p.size != t.size:
        raise ValueError(f"label arrays differ in length: {p.size} vs {t.size}")
    pi = _encode(p)
    ti = _encode(t)
    table = np.zeros((pi.max() + 1, ti.max() + 1))
    np.add.at(table, (pi, ti), 1.0)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum() / p.size)


def nmi(pred, truth) -> float:
    """Mutual information normalized by the geometric mean of the entropies.

    Natural-log entropies of the empirical label distributions. If both
    labelings are constant the value is 1; if exactly one is constant it
    is 0 (the quotient is otherwise undefined).
    """
    p = _as_labels(pred, "pred")
    t = _as_labels(truth, "truth")
    if p.size != t.size:
        raise ValueError(f"label arrays differ in length: {p.size} vs {t.size}")
    n = p.size
    pi = _encode(p)
    ti = _encode(t)
    table = np.zeros((pi.max() + 1, ti.max() + 1))
    np.add.at(table, (pi, ti), 1.0)
    pm = table.sum(axis=1) / n
    qm = table.sum(axis=0) / n
    hp = float(-(pm * np.log(pm)).sum())
    hq = float(-(qm * np.log(qm)).sum())
    if hp == 0.0 or hq == 0.0:
        return 1.0 if hp == hq else 0.0
    joint = table / n
    nz = joint > 0
    mi = float((joint[nz] * np.log(joint[nz] / np.outer(pm, qm)[nz])).sum())
    return mi / np.sqrt(hp * hq)


def distance_correlation(x, y) -> float:
    """Distance correlation between two 1-D variables, in [0, 1].

    Double-centers the pairwise absolute-difference matrices of each variable
    and compares their inner products. Returns 0 when either variable is
    constant (zero distance variance). Symmetric, and invariant to affine
    transforms of either argument.
    """
    xv = np.asarray(x, dtype=float).ravel()
    yv = np.asarray(y, dtype=float).ravel()
    if xv.size != yv.size:
        raise ValueError(f"inputs differ in length: {xv.size} vs {yv.size}")
    if xv.size < 2:
        raise ValueError("distance correlation needs at least 2 samples")
    if not (np.isfinite(xv).all() and np.isfinite(yv).all()):
        raise ValueError("inputs contain non-finite entries")

    def centered_dists(v: np.ndarray) -> np.ndarray:
        a = np.abs(v[:, None] - v[None, :])
        return a - a.mean(axis=0, keepdims=True) - a.mean(axis=1, keepdims=True) + a.mean()

    a = centered_dists(xv)
    b = centered_dists(yv)
    dcov2 = float((a * b).mean())
    dvar_x = float((a * a).mean())
    dvar_y = float((b * b).mean())
    if dvar_x <= 0.0 or dvar_y <= 0.0 or dcov2 <= 0.0:
        return 0.0
    # sqrt((c/vx)(c/vy)) == c / sqrt(vx vy); the ratio form gives exactly 1
    # for bitwise-identical inputs
    r2 = np.sqrt((dcov2 / dvar_x) * (dcov2 / dvar_y))
    return float(np.sqrt(min(r2, 1.0)))


def red(selected) -> float:
    """Redundancy rate: mean distance correlation over all feature pairs."""
    f = np.asarray(selected, dtype=float)
    if f.ndim != 2:
        raise ValueError(f"selected features must be 2-D, got ndim={f.ndim}")
    m = f.shape[1]
    if m < 2:
        raise ValueError(f"redundancy rate needs at least 2 features, got {m}")
    vals = [
        distance_correlation(f[:, i], f[:, j]) for i in range(m - 1) for j in range(i + 1, m)
    ]
    return float(np.mean(vals))


@dataclass
class EvalReport:
    """Clustering metrics of one feature subset over repeated k-means runs.

    Standard deviations are population (divide by repeats). red is 0 when
    fewer than two features were selected (no pairs to average).
    """

    acc_mean: float
    acc_std: float
    nmi_mean: float
    nmi_std: float
    red: float
    repeats: int
    k_selected: int

    def to_dict(self) -> dict:
        return {
            "acc_mean": self.acc_mean,
            "acc_std": self.acc_std,
            "nmi_mean": self.nmi_mean,
            "nmi_std": self.nmi_std,
            "red": self.red,
            "repeats": self.repeats,
            "k_selected": self.k_selected,
        }


def evaluate(
    data: DataMatrix,
    selected_indices,
    n_clusters: int | None = None,
    repeats: int = 30,
    seed: int = 0,
) -> EvalReport:
    """Cluster the selected columns repeatedly and report ACC/NMI/RED.

    k-means runs with seeds seed .. seed+repeats-1 against the true labels;
    n_clusters defaults to the number of distinct labels.
    """
    if data.labels is None:
        raise ValueError("evaluation requires true labels on the dataset")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    truth = _encode(np.asarray(data.labels))
    c = n_clusters if n_clusters is not None else int(truth.max()) + 1
    cols = np.asarray(selected_indices, dtype=int).ravel()
    if cols.size == 0:
        raise ValueError("no features selected")
    if cols.min() < 0 or cols.max() >= data.n_features:
        raise ValueError(f"feature indices out of range for d={data.n_features}")
    points = data.values[:, cols]

    accs = np.empty(repeats)
    nmis = np.empty(repeats)
    for r in range(repeats):
        labels = kmeans(points, c, seed=seed + r)
        accs[r] = acc(labels, truth)
        nmis[r] = nmi(labels, truth)
    red_val = red(points) if cols.size >= 2 else 0.0
    return EvalReport(
        acc_mean=float(accs.mean()),
        acc_std=float(accs.std()),
        nmi_mean=float(nmis.mean()),
        nmi_std=float(nmis.std()),
        red=red_val,
        repeats=repeats,
        k_selected=int(cols.size),
    )
