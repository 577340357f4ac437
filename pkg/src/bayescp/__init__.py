"""Bayesian CP factorization of incomplete tensors with automatic rank
determination, plus predictive distributions over missing entries."""

from .errors import FormatError, NumericalError, ShapeMismatchError
from .io import read_mask, read_tensor, write_mask, write_tensor
from .metrics import MetricsReport, psnr, rse
from .mixture import MixtureWeights, apply_mixture, build_weights, fit_mp
from .model import (
    FactorPosterior,
    FitReport,
    LambdaPosterior,
    ModelState,
    PriorConfig,
    TauPosterior,
    component_powers,
    effective_rank,
    expected_kr_gram,
    expected_model_error,
    fit,
    init_model,
    lower_bound,
    max_init_rank,
    prune,
    reconstruct,
    update_factor,
    update_lambda,
    update_tau,
)
from .predict import StudentTPrediction, predict_entry, predict_missing
from .synthetic import (
    SweepSummary,
    SyntheticInstance,
    generate_synthetic,
    rank_detection_sweep,
)
from .tensors import (
    ObservationMask,
    fold,
    generalized_inner_product,
    hadamard,
    khatri_rao,
    kruskal,
    masked_sq_frobenius,
    unfold,
)

__version__ = "0.1.0"

__all__ = [
    "FormatError",
    "NumericalError",
    "ShapeMismatchError",
    "read_mask",
    "read_tensor",
    "write_mask",
    "write_tensor",
    "MetricsReport",
    "psnr",
    "rse",
    "MixtureWeights",
    "apply_mixture",
    "build_weights",
    "fit_mp",
    "FactorPosterior",
    "FitReport",
    "LambdaPosterior",
    "ModelState",
    "PriorConfig",
    "TauPosterior",
    "component_powers",
    "effective_rank",
    "expected_kr_gram",
    "expected_model_error",
    "fit",
    "init_model",
    "lower_bound",
    "max_init_rank",
    "prune",
    "reconstruct",
    "update_factor",
    "update_lambda",
    "update_tau",
    "StudentTPrediction",
    "predict_entry",
    "predict_missing",
    "SweepSummary",
    "SyntheticInstance",
    "generate_synthetic",
    "rank_detection_sweep",
    "ObservationMask",
    "fold",
    "generalized_inner_product",
    "hadamard",
    "khatri_rao",
    "kruskal",
    "masked_sq_frobenius",
    "unfold",
]
