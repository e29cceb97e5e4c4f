"""scikit-learn style selector estimators wrapping the functional solvers."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .kernels import KernelSpec, center, default_kernel_specs, gram
from .multikernel import build_bank, fit_mk
from .solver import SolverConfig, fit, rank_features


class KernelAlignmentSelector(SelectorMixin, BaseEstimator):
    """Select features whose span best aligns with a single kernel.

    Fits nonnegative factors W, H by multiplicative updates so that the linear
    kernel of X W H aligns with the centered kernel of X, then keeps the
    n_features rows of W with the largest norms.

    Parameters
    ----------
    n_features : int
        Number of features to select; must be < n_features_in_.
    kernel : str
        One of "linear", "polynomial", "gaussian", "laplacian".
    offset, degree : polynomial kernel parameters.
    bandwidth : gaussian/laplacian kernel parameter.
    alpha, beta : nonnegative regularization weights on W and H.
    max_iter, tol : solver loop controls.
    random_state : seed for the factor initialization.

    Attributes
    ----------
    support_ : bool mask of the selected features.
    scores_ : row norms of the final W, one per feature.
    ranking_ : all feature indices, best first.
    trace_ : objective history of the solver run.
    """

    def __init__(
        self,
        n_features: int = 10,
        kernel: str = "linear",
        *,
        offset: float = 1.0,
        degree: int = 2,
        bandwidth: float = 1.0,
        alpha: float = 1.0,
        beta: float = 1.0,
        max_iter: int = 300,
        tol: float = 1e-6,
        random_state: int = 0,
    ):
        self.n_features = n_features
        self.kernel = kernel
        self.offset = offset
        self.degree = degree
        self.bandwidth = bandwidth
        self.alpha = alpha
        self.beta = beta
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        d = X.shape[1]
        if not 1 <= self.n_features < d:
            raise ValueError(f"n_features must satisfy 1 <= n_features < d, got {self.n_features}, d={d}")
        spec = KernelSpec(
            self.kernel, offset=self.offset, degree=self.degree, bandwidth=self.bandwidth
        )
        kc = center(gram(X, spec))
        cfg = SolverConfig(
            alpha=self.alpha,
            beta=self.beta,
            max_iter=self.max_iter,
            rel_tol=self.tol,
            seed=self.random_state,
        )
        result = fit(X, kc, self.n_features, cfg)
        self.n_features_in_ = d
        self.scores_ = result.row_norms
        self.ranking_ = rank_features(result.row_norms)
        mask = np.zeros(d, dtype=bool)
        mask[result.ranked_indices] = True
        self.support_ = mask
        self.trace_ = result.trace
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        return self.support_


class MultipleKernelAlignmentSelector(SelectorMixin, BaseEstimator):
    """Select features by aligning with a learned convex combination of kernels.

    Candidate kernels are centered and cosine-normalized, combined with
    simplex weights eta learned jointly with the factors. With kernels=None
    the default 14-kernel candidate set is used.

    Attributes
    ----------
    support_, scores_, ranking_, trace_ : as in KernelAlignmentSelector.
    kernel_weights_ : learned simplex weights over the candidate kernels.
    kernel_scores_ : final per-kernel alignment scores.
    """

    def __init__(
        self,
        n_features: int = 10,
        kernels: list[KernelSpec] | None = None,
        *,
        alpha: float = 1.0,
        beta: float = 1.0,
        gamma: float = 1.0,
        max_iter: int = 300,
        tol: float = 1e-6,
        random_state: int = 0,
    ):
        self.n_features = n_features
        self.kernels = kernels
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        d = X.shape[1]
        if not 1 <= self.n_features < d:
            raise ValueError(f"n_features must satisfy 1 <= n_features < d, got {self.n_features}, d={d}")
        specs = self.kernels if self.kernels is not None else default_kernel_specs()
        bank = build_bank(X, specs)
        cfg = SolverConfig(
            alpha=self.alpha,
            beta=self.beta,
            max_iter=self.max_iter,
            rel_tol=self.tol,
            seed=self.random_state,
        )
        result, weights = fit_mk(X, bank, self.n_features, cfg, gamma=self.gamma)
        self.n_features_in_ = d
        self.scores_ = result.row_norms
        self.ranking_ = rank_features(result.row_norms)
        mask = np.zeros(d, dtype=bool)
        mask[result.ranked_indices] = True
        self.support_ = mask
        self.trace_ = result.trace
        self.kernel_weights_ = weights.eta
        self.kernel_scores_ = weights.scores
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        return self.support_
