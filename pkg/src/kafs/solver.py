"""Single-kernel feature selection by alignment-maximizing matrix factorization.

The solver alternates multiplicative updates on a nonnegative feature-weight
matrix W (d-by-k) and representation matrix H (k-by-d), minimizing

    -1/2 Tr(K X W H H^T W^T X^T)
    + alpha/2 [Tr(1 W W^T) - Tr(W W^T)]
    + beta/2  [Tr(1 H^T H) - Tr(H^T H)]

for a centered kernel K. Features are ranked by the row norms of the final W.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from time import perf_counter
from typing import NamedTuple

import numpy as np

from .kernels import GramMatrix, SignSplit, _as_matrix, projected_gram, sign_split


@dataclass
class SolverConfig:
    """Hyperparameters and run controls for the multiplicative solvers.

    alpha/beta weigh the off-diagonal inner-product penalties on W and H.
    eps_denom guards denominators so rows that die stay at zero instead of
    going NaN. init is "random" (uniform entries in (0.1, 1.0), seeded) or
    "custom" (use w0/h0 as given).
    """

    alpha: float = 1.0
    beta: float = 1.0
    max_iter: int = 300
    rel_tol: float = 1e-6
    eps_denom: float = 1e-12
    seed: int = 0
    init: str = "random"
    w0: np.ndarray | None = None
    h0: np.ndarray | None = None
    # The alignment term is quartic in (W, H) but the penalties are only
    # quadratic, so the objective can be unbounded below; when a factor entry
    # passes this limit the fit stops and flags the trace as diverged. The
    # ranking is still usable: the growth is multiplicative, so relative row
    # norms stabilize long before the scale runs away.
    divergence_limit: float = 1e60

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError(f"alpha and beta must be nonnegative, got {self.alpha}, {self.beta}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if not self.eps_denom > 0:
            raise ValueError("eps_denom must be positive")
        if not self.divergence_limit > 0:
            raise ValueError("divergence_limit must be positive")
        if self.init not in ("random", "custom"):
            raise ValueError(f"init must be 'random' or 'custom', got {self.init!r}")
        if self.init == "custom" and (self.w0 is None or self.h0 is None):
            raise ValueError("init='custom' requires w0 and h0")


class FactorPair(NamedTuple):
    """Nonnegative factor pair: feature weights (d, k) and representation (k, d)."""

    weights: np.ndarray
    representation: np.ndarray


@dataclass
class SolverTrace:
    """Objective history and final state of one solver run.

    objective_per_iter[0] is the objective at initialization; one further
    entry is recorded per full (W then H) iteration. eta_per_iter is filled
    by the multiple-kernel solver only.
    """

    objective_per_iter: list[float]
    iterations_run: int
    converged: bool
    final: FactorPair
    iter_seconds: list[float] = field(default_factory=list)
    eta_per_iter: list[np.ndarray] | None = None
    diverged: bool = False


@dataclass
class SelectionResult:
    """Top-k feature indices (best first), all d row norms, and the trace."""

    ranked_indices: np.ndarray
    row_norms: np.ndarray
    trace: SolverTrace


def _initial_factors(d: int, k: int, cfg: SolverConfig) -> FactorPair:
    if cfg.init == "custom":
        w = np.array(cfg.w0, dtype=float)
        h = np.array(cfg.h0, dtype=float)
        if w.shape != (d, k) or h.shape != (k, d):
            raise ValueError(
                f"custom init shapes {w.shape}, {h.shape} do not match (d={d}, k={k})"
            )
        if (w < 0).any() or (h < 0).any():
            raise ValueError("custom init factors must be nonnegative")
        return FactorPair(w, h)
    rng = np.random.default_rng(cfg.seed)
    w = rng.uniform(0.1, 1.0, size=(d, k))
    h = rng.uniform(0.1, 1.0, size=(k, d))
    return FactorPair(w, h)


def _regularizers(w: np.ndarray, h: np.ndarray) -> tuple[float, float]:
    # Tr(1 W W^T) - Tr(W W^T) = ||colsum(W)||^2 - ||W||_F^2, and the H analogue
    # with row sums; 1_{dxd} is never materialized.
    reg_w = float(np.square(w.sum(axis=0)).sum() - np.square(w).sum())
    reg_h = float(np.square(h.sum(axis=1)).sum() - np.square(h).sum())
    return reg_w, reg_h


def _objective_from_projected(
    a: np.ndarray, w: np.ndarray, h: np.ndarray, alpha: float, beta: float
) -> float:
    b = h @ h.T
    fit_term = float(np.sum((a @ (w @ b)) * w))  # Tr(A W B W^T)
    reg_w, reg_h = _regularizers(w, h)
    return -0.5 * fit_term + 0.5 * alpha * reg_w + 0.5 * beta * reg_h


def objective(data, kc: GramMatrix, factors: FactorPair, cfg: SolverConfig) -> float:
    """Objective value for the given data, centered kernel and factors."""
    x = _as_matrix(data)
    w, h = factors
    d = x.shape[1]
    if w.shape[0] != d or h.shape[1] != d or w.shape[1] != h.shape[0]:
        raise ValueError(f"factor shapes {w.shape}, {h.shape} do not match d={d}")
    a = projected_gram(x, kc)
    return _objective_from_projected(a, w, h, cfg.alpha, cfg.beta)


def update_w(factors: FactorPair, split: SignSplit, cfg: SolverConfig) -> FactorPair:
    """One multiplicative update of W; H is untouched.

    W_ij <- W_ij * sqrt((P W H H^T + alpha W)_ij /
                        (N W H H^T + alpha 1 W)_ij + eps)
    with (P, N) the sign split of X^T K X.
    """
    w, h = factors
    b = h @ h.T
    wb = w @ b
    numer = split.pos @ wb + cfg.alpha * w
    denom = split.neg @ wb + cfg.alpha * w.sum(axis=0, keepdims=True) + cfg.eps_denom
    return FactorPair(w * np.sqrt(numer / denom), h)


def update_h(factors: FactorPair, split: SignSplit, cfg: SolverConfig) -> FactorPair:
    """One multiplicative update of H; W is untouched.

    H_ij <- H_ij * sqrt((W^T P W H + beta H)_ij /
                        (W^T N W H + beta H 1)_ij + eps)
    """
    w, h = factors
    wpw = w.T @ (split.pos @ w)
    wnw = w.T @ (split.neg @ w)
    numer = wpw @ h + cfg.beta * h
    denom = wnw @ h + cfg.beta * h.sum(axis=1, keepdims=True) + cfg.eps_denom
    return FactorPair(w, h * np.sqrt(numer / denom))


def rank_features(row_norms) -> np.ndarray:
    """Feature indices sorted by row norm descending, ties by ascending index."""
    return np.argsort(-np.asarray(row_norms, dtype=float), kind="stable")


def _check_finite(factors: FactorPair, iteration: int) -> None:
    if not (np.isfinite(factors.weights).all() and np.isfinite(factors.representation).all()):
        raise FloatingPointError(f"non-finite factor entries at iteration {iteration}")


def _factor_scale(factors: FactorPair) -> float:
    return max(float(factors.weights.max(initial=0.0)), float(factors.representation.max(initial=0.0)))


def fit(data, kc: GramMatrix, k: int, cfg: SolverConfig | None = None) -> SelectionResult:
    """Run the alternating updates on one centered kernel and rank features.

    X^T K X and its sign split are computed once up front. The loop stops when
    the objective changes by at most rel_tol relative, max_iter is hit, or a
    factor entry crosses the divergence limit; the top-k features by final row
    norm of W are returned either way.
    """
    x = _as_matrix(data)
    n, d = x.shape
    if cfg is None:
        cfg = SolverConfig()
    if not 1 <= k < d:
        raise ValueError(f"k must satisfy 1 <= k < d, got k={k}, d={d}")
    if kc.n != n:
        raise ValueError(f"kernel dimension {kc.n} does not match {n} samples")

    a = projected_gram(x, kc)
    split = sign_split(a)
    factors = _initial_factors(d, k, cfg)

    objs = [_objective_from_projected(a, *factors, cfg.alpha, cfg.beta)]
    if not np.isfinite(objs[0]):
        raise FloatingPointError("non-finite objective at initialization")
    secs: list[float] = []
    converged = False
    diverged = False
    for it in range(1, cfg.max_iter + 1):
        t0 = perf_counter()
        factors = update_w(factors, split, cfg)
        factors = update_h(factors, split, cfg)
        secs.append(perf_counter() - t0)
        _check_finite(factors, it)
        if _factor_scale(factors) > cfg.divergence_limit:
            diverged = True
            break
        j = _objective_from_projected(a, *factors, cfg.alpha, cfg.beta)
        if not np.isfinite(j):
            raise FloatingPointError(f"non-finite objective at iteration {it}")
        objs.append(j)
        if abs(objs[-1] - objs[-2]) <= cfg.rel_tol * max(1.0, abs(objs[-2])):
            converged = True
            break

    row_norms = np.linalg.norm(factors.weights, axis=1)
    ranking = rank_features(row_norms)
    trace = SolverTrace(objs, len(secs), converged, factors, secs, diverged=diverged)
    return SelectionResult(ranking[:k].copy(), row_norms, trace)
