"""Gram (kernel) matrix construction, centering, normalization and comparison.

Everything downstream of the raw data runs through this module: the four
kernel families, double centering, cosine normalization of centered kernels,
alignment scores between kernels, and the positive/negative split used by the
multiplicative solvers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import cdist

RAW = "raw"
CENTERED = "centered"
CENTERED_NORMALIZED = "centered_normalized"

KERNEL_FAMILIES = ("linear", "polynomial", "gaussian", "laplacian")


class DegenerateKernelWarning(UserWarning):
    """A centered kernel had (near-)zero diagonal entries during normalization."""


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family together with its parameters.

    ``offset`` and ``degree`` apply to the polynomial family only,
    ``bandwidth`` to the gaussian and laplacian families only.
    """

    family: str
    offset: float = 1.0
    degree: int = 2
    bandwidth: float = 1.0

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ValueError(
                f"unknown kernel family {self.family!r}; expected one of {KERNEL_FAMILIES}"
            )
        if self.family == "polynomial":
            if int(self.degree) != self.degree or self.degree < 1:
                raise ValueError(f"polynomial degree must be a positive integer, got {self.degree}")
        if self.family in ("gaussian", "laplacian") and not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")

    def label(self) -> str:
        """Short human-readable identifier used in reports."""
        if self.family == "polynomial":
            return f"polynomial(offset={self.offset:g},degree={self.degree:d})"
        if self.family in ("gaussian", "laplacian"):
            return f"{self.family}(bandwidth={self.bandwidth:g})"
        return self.family

    def to_dict(self) -> dict:
        d = {"family": self.family}
        if self.family == "polynomial":
            d["offset"] = float(self.offset)
            d["degree"] = int(self.degree)
        elif self.family in ("gaussian", "laplacian"):
            d["bandwidth"] = float(self.bandwidth)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(**d)


def default_kernel_specs() -> list[KernelSpec]:
    """The 14-kernel candidate set: linear, polynomial (degree 2/4/6, offset 1)
    and gaussian/laplacian with bandwidths 0.01, 0.1, 1, 10, 100."""
    specs = [KernelSpec("linear")]
    specs += [KernelSpec("polynomial", offset=1.0, degree=p) for p in (2, 4, 6)]
    specs += [KernelSpec("gaussian", bandwidth=s) for s in (0.01, 0.1, 1.0, 10.0, 100.0)]
    specs += [KernelSpec("laplacian", bandwidth=s) for s in (0.01, 0.1, 1.0, 10.0, 100.0)]
    return specs


@dataclass(frozen=True)
class GramMatrix:
    """A symmetric n-by-n kernel matrix tagged with its processing state.

    The values are symmetrized on construction; state is one of ``raw``,
    ``centered`` or ``centered_normalized``.
    """

    values: np.ndarray
    state: str = RAW

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"kernel matrix must be square, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise ValueError("kernel matrix contains non-finite entries")
        if self.state not in (RAW, CENTERED, CENTERED_NORMALIZED):
            raise ValueError(f"unknown gram state {self.state!r}")
        v = (v + v.T) / 2.0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _as_matrix(data) -> np.ndarray:
    """Accept a DataMatrix-like object (anything with ``.values``) or an array."""
    values = getattr(data, "values", data)
    x = np.asarray(values, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D sample-by-feature matrix, got ndim={x.ndim}")
    if not np.isfinite(x).all():
        raise ValueError("data matrix contains non-finite entries")
    return x


def gram(data, spec: KernelSpec) -> GramMatrix:
    """Raw Gram matrix of the samples under the given kernel.

    Families: linear x.y, polynomial (x.y + offset)^degree,
    gaussian exp(-||x-y||_2^2 / (2 bandwidth^2)),
    laplacian exp(-||x-y||_1 / bandwidth).
    """
    x = _as_matrix(data)
    if spec.family == "linear":
        k = x @ x.T
    elif spec.family == "polynomial":
        k = (x @ x.T + spec.offset) ** spec.degree
    elif spec.family == "gaussian":
        d2 = cdist(x, x, "sqeuclidean")
        k = np.exp(-d2 / (2.0 * spec.bandwidth**2))
    else:  # laplacian
        d1 = cdist(x, x, "cityblock")
        k = np.exp(-d1 / spec.bandwidth)
    return GramMatrix(k, RAW)


def center(g: GramMatrix) -> GramMatrix:
    """Double-center a kernel: subtract row and column means, add the grand mean.

    Equivalent to conjugating with I - (1/n) 11^T on both sides; idempotent,
    and the result has (numerically) zero row and column sums.
    """
    if g.state == CENTERED_NORMALIZED:
        raise ValueError("cannot re-center a cosine-normalized kernel")
    k = g.values
    row = k.mean(axis=1, keepdims=True)
    col = k.mean(axis=0, keepdims=True)
    grand = k.mean()
    return GramMatrix(k - row - col + grand, CENTERED)


def cosine_normalize(g: GramMatrix) -> GramMatrix:
    """Rescale a centered kernel so K_ij <- K_ij / sqrt(K_ii K_jj).

    Diagonal entries with K_ii > 0 map to exactly 1. Rows/columns whose
    diagonal is within 1e-12 of zero (relative to the max-abs entry) are
    zeroed out and a DegenerateKernelWarning is issued; a centered kernel of
    duplicated constant samples legitimately produces such entries.
    """
    if g.state != CENTERED:
        raise ValueError(f"cosine normalization expects a centered kernel, got state {g.state!r}")
    k = g.values
    diag = np.diag(k).copy()
    scale = float(np.abs(k).max()) if k.size else 0.0
    ok = diag > 1e-12 * scale
    if not ok.all():
        warnings.warn(
            f"{int((~ok).sum())} diagonal entries of the centered kernel are (near-)zero; "
            "the corresponding rows and columns were zeroed during normalization",
            DegenerateKernelWarning,
            stacklevel=2,
        )
    root = np.sqrt(np.where(ok, diag, 1.0))
    out = k / (root[:, None] * root[None, :])
    out[~ok, :] = 0.0
    out[:, ~ok] = 0.0
    idx = np.flatnonzero(ok)
    out[idx, idx] = 1.0
    return GramMatrix(out, CENTERED_NORMALIZED)


def _centered_values(g: GramMatrix) -> np.ndarray:
    return center(g).values if g.state == RAW else g.values


def alignment(a: GramMatrix, b: GramMatrix, normalized: bool = True) -> float:
    """Alignment between two kernels over the same samples.

    Raw inputs are centered first. With ``normalized=True`` this is the cosine
    similarity Tr(A B) / (||A||_F ||B||_F) of the centered matrices, in
    [-1, 1]; otherwise the unnormalized form Tr(A B) / n^2.
    """
    if a.n != b.n:
        raise ValueError(f"kernel dimensions differ: {a.n} vs {b.n}")
    ac = _centered_values(a)
    bc = _centered_values(b)
    tr = float(np.sum(ac * bc))  # Tr(AB) for symmetric A, B
    if normalized:
        na = float(np.linalg.norm(ac))
        nb = float(np.linalg.norm(bc))
        if na == 0.0 or nb == 0.0:
            raise ValueError("alignment is undefined for a centered kernel with zero Frobenius norm")
        return tr / (na * nb)
    return tr / float(a.n) ** 2


class SignSplit(NamedTuple):
    """Elementwise split m = pos - neg with pos, neg >= 0 and pos * neg = 0."""

    pos: np.ndarray
    neg: np.ndarray


def sign_split(m) -> SignSplit:
    """Split a matrix into its positive and negative parts, (|m| +/- m) / 2."""
    m = np.asarray(m, dtype=float)
    if not np.isfinite(m).all():
        raise ValueError("matrix to split contains non-finite entries")
    a = np.abs(m)
    return SignSplit((a + m) / 2.0, (a - m) / 2.0)


def projected_gram(data, kc: GramMatrix) -> np.ndarray:
    """X^T K X for a centered kernel K; symmetrized d-by-d output."""
    x = _as_matrix(data)
    if kc.state == RAW:
        raise ValueError("projected_gram expects a centered kernel")
    if kc.n != x.shape[0]:
        raise ValueError(f"kernel dimension {kc.n} does not match {x.shape[0]} samples")
    a = x.T @ kc.values @ x
    return (a + a.T) / 2.0


def is_positive_semidefinite(g: GramMatrix, rtol: float = 1e-8) -> bool:
    """Diagnostic check: smallest eigenvalue >= -rtol * largest.

    Not run by default anywhere (it costs an eigendecomposition); alignment
    scores are only meaningful for positive semidefinite kernels.
    """
    w = np.linalg.eigvalsh(g.values)
    return bool(w[0] >= -rtol * w[-1])
