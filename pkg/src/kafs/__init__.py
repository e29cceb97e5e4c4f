"""Kernel-alignment unsupervised feature selection.

Nonnegative matrix factorization solvers that pick feature subsets whose
kernel best aligns with the kernel of the full data, in single-kernel and
learned multiple-kernel variants, plus clustering-based evaluation metrics
and a batch experiment harness.
"""

from .data import (
    DataMatrix,
    DatasetSpec,
    PlantedSpec,
    generate_planted,
    load_csv,
    standardize,
    write_csv,
)
from .estimators import KernelAlignmentSelector, MultipleKernelAlignmentSelector
from .harness import ExperimentConfig, RunRecord, replay, report, run, run_and_report
from .kernels import (
    DegenerateKernelWarning,
    GramMatrix,
    KernelSpec,
    SignSplit,
    alignment,
    center,
    cosine_normalize,
    default_kernel_specs,
    gram,
    is_positive_semidefinite,
    projected_gram,
    sign_split,
)
from .metrics import (
    EvalReport,
    acc,
    distance_correlation,
    evaluate,
    kmeans,
    nmi,
    red,
)
from .multikernel import (
    KernelBank,
    KernelWeights,
    build_bank,
    consensus,
    fit_mk,
    kernel_scores,
    project_simplex,
    solve_eta,
)
from .solver import (
    FactorPair,
    SelectionResult,
    SolverConfig,
    SolverTrace,
    fit,
    objective,
    rank_features,
    update_h,
    update_w,
)

__version__ = "0.1.0"

__all__ = [
    "DataMatrix",
    "DatasetSpec",
    "PlantedSpec",
    "generate_planted",
    "load_csv",
    "standardize",
    "write_csv",
    "KernelAlignmentSelector",
    "MultipleKernelAlignmentSelector",
    "ExperimentConfig",
    "RunRecord",
    "replay",
    "report",
    "run",
    "run_and_report",
    "DegenerateKernelWarning",
    "GramMatrix",
    "KernelSpec",
    "SignSplit",
    "alignment",
    "center",
    "cosine_normalize",
    "default_kernel_specs",
    "gram",
    "is_positive_semidefinite",
    "projected_gram",
    "sign_split",
    "EvalReport",
    "acc",
    "distance_correlation",
    "evaluate",
    "kmeans",
    "nmi",
    "red",
    "KernelBank",
    "KernelWeights",
    "build_bank",
    "consensus",
    "fit_mk",
    "kernel_scores",
    "project_simplex",
    "solve_eta",
    "FactorPair",
    "SelectionResult",
    "SolverConfig",
    "SolverTrace",
    "fit",
    "objective",
    "rank_features",
    "update_h",
    "update_w",
]
