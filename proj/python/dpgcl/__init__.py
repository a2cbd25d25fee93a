"""Differentially private group-level contrastive learning.

Thin re-export of the compiled core. The heavy lifting (losses, clipping
strategies, the RDP accountant, the sensitivity oracle, the training loop)
lives in C++; this package exposes the main operations for scripting and
analysis.
"""

from ._core import (
    CalibrationError,
    ConfigError,
    Dataset,
    SensitivityViolation,
    calibrate_sigma,
    certified_epsilon,
    cosine_similarity,
    default_delta,
    encode,
    generate_dualmodal,
    generate_unimodal,
    knn_accuracy,
    linear_probe,
    load_dataset,
    poisson_subsample_indices,
    rdp_gaussian,
    rdp_subsampled_gaussian,
    rdp_to_dp,
    retrieval_at_k,
    run_sensitivity_trial,
    split_dataset,
    theoretical_bound,
    train,
)

__all__ = [
    "CalibrationError",
    "ConfigError",
    "Dataset",
    "SensitivityViolation",
    "calibrate_sigma",
    "certified_epsilon",
    "cosine_similarity",
    "default_delta",
    "encode",
    "generate_dualmodal",
    "generate_unimodal",
    "knn_accuracy",
    "linear_probe",
    "load_dataset",
    "poisson_subsample_indices",
    "rdp_gaussian",
    "rdp_subsampled_gaussian",
    "rdp_to_dp",
    "retrieval_at_k",
    "run_sensitivity_trial",
    "split_dataset",
    "theoretical_bound",
    "train",
]
