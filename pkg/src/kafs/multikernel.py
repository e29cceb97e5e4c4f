"""Multiple-kernel feature selection over a bank of candidate kernels.

A consensus kernel sum_i eta_i K_i (eta on the probability simplex) replaces
the single kernel; the factor updates alternate with an exact solve of the
kernel-weight subproblem

    min_eta  -1/2 sum_i eta_i f_i + gamma/2 ||eta||^2   s.t. eta in simplex,

where f_i = Tr(K_i X W H H^T W^T X^T). The subproblem is the Euclidean
projection of f / (2 gamma) onto the simplex, solved by sort-and-threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from time import perf_counter

import numpy as np

from .kernels import (
    CENTERED,
    CENTERED_NORMALIZED,
    GramMatrix,
    KernelSpec,
    _as_matrix,
    center,
    cosine_normalize,
    gram,
    projected_gram,
    sign_split,
)
from .solver import (
    FactorPair,
    SelectionResult,
    SolverConfig,
    SolverTrace,
    _check_finite,
    _factor_scale,
    _initial_factors,
    _regularizers,
    rank_features,
    update_h,
    update_w,
)


@dataclass
class KernelBank:
    """Candidate kernels for the consensus: all centered-normalized, same n."""

    kernels: list[GramMatrix]
    specs: list[KernelSpec] | None = None

    def __post_init__(self):
        if not self.kernels:
            raise ValueError("kernel bank must contain at least one kernel")
        n = self.kernels[0].n
        for i, g in enumerate(self.kernels):
            if g.n != n:
                raise ValueError(f"bank kernel {i} has dimension {g.n}, expected {n}")
            if g.state != CENTERED_NORMALIZED:
                raise ValueError(f"bank kernel {i} has state {g.state!r}, expected centered_normalized")
        if self.specs is not None and len(self.specs) != len(self.kernels):
            raise ValueError("specs length does not match number of kernels")

    @property
    def n(self) -> int:
        return self.kernels[0].n

    def __len__(self) -> int:
        return len(self.kernels)


def build_bank(data, specs: list[KernelSpec]) -> KernelBank:
    """Center then cosine-normalize the Gram matrix of each candidate kernel.

    Normalization removes the magnitude differences between kernel families
    that would otherwise bias the alignment scores f_i.
    """
    mats = [cosine_normalize(center(gram(data, s))) for s in specs]
    return KernelBank(mats, list(specs))


@dataclass
class KernelWeights:
    """Simplex weights eta over the bank plus the per-kernel scores f_i."""

    eta: np.ndarray
    scores: np.ndarray
    gamma: float

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        scores = np.asarray(self.scores, dtype=float)
        if eta.ndim != 1 or scores.shape != eta.shape:
            raise ValueError("eta and scores must be 1-D and the same length")
        if (eta < 0).any() or abs(eta.sum() - 1.0) > 1e-10:
            raise ValueError("eta must be nonnegative and sum to 1")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        self.eta = eta
        self.scores = scores


def consensus(bank: KernelBank, eta) -> GramMatrix:
    """Convex combination sum_i eta_i K_i of the bank, tagged as centered."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (len(bank),):
        raise ValueError(f"{eta.size} weights for {len(bank)} kernels")
    if (eta < 0).any() or abs(eta.sum() - 1.0) > 1e-10:
        raise ValueError("weights must be nonnegative and sum to 1")
    out = eta[0] * bank.kernels[0].values
    for e, g in zip(eta[1:], bank.kernels[1:]):
        out = out + e * g.values
    return GramMatrix(out, CENTERED)


def kernel_scores(data, bank: KernelBank, factors: FactorPair) -> np.ndarray:
    """Per-kernel alignment scores f_i = Tr(K_i X W H H^T W^T X^T).

    Evaluated as sum((K_i (X W B)) * (X W)) with B = H H^T, so each kernel
    costs one n^2 k product.
    """
    x = _as_matrix(data)
    w, h = factors
    if w.shape[0] != x.shape[1] or bank.n != x.shape[0]:
        raise ValueError("factor/bank dimensions do not match the data")
    p = x @ w
    pb = p @ (h @ h.T)
    return np.array([float(np.sum((g.values @ pb) * p)) for g in bank.kernels])


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum(x) = 1} by sort and threshold.

    The projection is invariant to adding a constant to every coordinate, so
    the input is shifted by its maximum first; that keeps the thresholding
    well conditioned even for very large score scales.
    """
    v = np.asarray(v, dtype=float)
    v = v - v.max()
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, v.size + 1)
    rho = np.nonzero(u - (css - 1.0) / j > 0)[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def solve_eta(scores, gamma: float) -> KernelWeights:
    """Exact minimizer of the kernel-weight subproblem.

    Because the Hessian is gamma * I, the minimizer is the projection of
    scores / (2 gamma) onto the probability simplex.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    s = np.asarray(scores, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("scores must be a non-empty 1-D array")
    if not np.isfinite(s).all():
        raise ValueError("scores contain non-finite entries")
    eta = project_simplex(s / (2.0 * gamma))
    return KernelWeights(eta, s, float(gamma))


def _full_objective(
    scores: np.ndarray, eta: np.ndarray, factors: FactorPair, cfg: SolverConfig, gamma: float
) -> float:
    reg_w, reg_h = _regularizers(*factors)
    return (
        -0.5 * float(eta @ scores)
        + 0.5 * cfg.alpha * reg_w
        + 0.5 * cfg.beta * reg_h
        + 0.5 * gamma * float(eta @ eta)
    )


def fit_mk(
    data,
    bank: KernelBank,
    k: int,
    cfg: SolverConfig | None = None,
    gamma: float = 1.0,
) -> tuple[SelectionResult, KernelWeights]:
    """Alternate factor updates on the consensus kernel with exact eta solves.

    eta starts uniform; each iteration recombines the bank, recomputes the
    sign split, updates W and H once each, rescores the kernels and solves for
    eta. Convergence is measured on the full objective including the
    gamma/2 ||eta||^2 term.
    """
    x = _as_matrix(data)
    n, d = x.shape
    if cfg is None:
        cfg = SolverConfig()
    if not 1 <= k < d:
        raise ValueError(f"k must satisfy 1 <= k < d, got k={k}, d={d}")
    if bank.n != n:
        raise ValueError(f"bank dimension {bank.n} does not match {n} samples")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")

    n_kernels = len(bank)
    factors = _initial_factors(d, k, cfg)
    eta = np.full(n_kernels, 1.0 / n_kernels)
    scores = kernel_scores(x, bank, factors)

    objs = [_full_objective(scores, eta, factors, cfg, gamma)]
    if not np.isfinite(objs[0]):
        raise FloatingPointError("non-finite objective at initialization")
    etas = [eta.copy()]
    secs: list[float] = []
    converged = False
    diverged = False
    for it in range(1, cfg.max_iter + 1):
        t0 = perf_counter()
        kc = consensus(bank, eta)
        split = sign_split(projected_gram(x, kc))
        factors = update_w(factors, split, cfg)
        factors = update_h(factors, split, cfg)
        secs.append(perf_counter() - t0)
        _check_finite(factors, it)
        if _factor_scale(factors) > cfg.divergence_limit:
            diverged = True
            break
        scores = kernel_scores(x, bank, factors)
        eta = solve_eta(scores, gamma).eta
        j = _full_objective(scores, eta, factors, cfg, gamma)
        if not np.isfinite(j):
            raise FloatingPointError(f"non-finite objective at iteration {it}")
        objs.append(j)
        etas.append(eta.copy())
        if abs(objs[-1] - objs[-2]) <= cfg.rel_tol * max(1.0, abs(objs[-2])):
            converged = True
            break

    row_norms = np.linalg.norm(factors.weights, axis=1)
    ranking = rank_features(row_norms)
    trace = SolverTrace(objs, len(secs), converged, factors, secs, eta_per_iter=etas, diverged=diverged)
    result = SelectionResult(ranking[:k].copy(), row_norms, trace)
    return result, KernelWeights(eta, scores, float(gamma))
