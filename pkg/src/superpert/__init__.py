"""Superconvergent perturbation theory for finite Hermitian operators.

Stagewise unitary conjugation doubles the cleared perturbation order at
every step (stage n removes orders up to 2^n - 1), with exact spectral
averaging solving each homological equation.  Rayleigh-Schrodinger
corrections through order 4 and dense exact diagonalization are included
as baselines, plus a batch CLI producing deterministic CSV/JSON reports.
"""

from ._jacobi import HAS_NUMBA, default_backend, jacobi_eigh
from .averaging import AveragingResult, SmallDenominatorError, average, min_cross_block_gap
from .kolmogorov import (
    ConsistencyError,
    KolmogorovState,
    StageInfo,
    SuResult,
    default_n_stages,
    init,
    match_labels,
    run,
    step,
)
from .linalg import (
    SpectralData,
    adjoint,
    commutator_ad,
    eigh,
    hermitian_part,
    hermiticity_defect,
    max_norm,
    require_hermitian,
)
from .models import (
    BUILTIN_MODELS,
    ModelFormatError,
    ModelSpec,
    build_quartic_oscillator,
    load_model,
    make_model,
    model_from_dict,
)
from .rayleigh_schrodinger import RsCorrections, rs_corrections
from .series import (
    MAX_ORDER,
    OperatorSeries,
    TransformSeries,
    conjugate_series,
    conjugate_series_table,
    eval_series,
    t_apply,
    u_coefficients,
    weighted_sum,
)

__version__ = "0.1.0"

__all__ = [
    "AveragingResult",
    "BUILTIN_MODELS",
    "ConsistencyError",
    "HAS_NUMBA",
    "KolmogorovState",
    "MAX_ORDER",
    "ModelFormatError",
    "ModelSpec",
    "OperatorSeries",
    "RsCorrections",
    "SmallDenominatorError",
    "SpectralData",
    "StageInfo",
    "SuResult",
    "TransformSeries",
    "adjoint",
    "average",
    "build_quartic_oscillator",
    "commutator_ad",
    "conjugate_series",
    "conjugate_series_table",
    "default_backend",
    "default_n_stages",
    "eigh",
    "eval_series",
    "hermitian_part",
    "hermiticity_defect",
    "init",
    "jacobi_eigh",
    "load_model",
    "make_model",
    "match_labels",
    "max_norm",
    "min_cross_block_gap",
    "model_from_dict",
    "require_hermitian",
    "rs_corrections",
    "run",
    "step",
    "t_apply",
    "u_coefficients",
    "weighted_sum",
    "__version__",
]
