"""Quantum estimation toolkit.

Information bounds (Fisher, Cramér-Rao, Van Trees), score operators, optimal
measurements and estimators, Bures geometry, and Monte-Carlo estimation
experiments over parametric density-matrix families loaded from JSON files.
"""

from ._core import (
    BuresReport,
    CRBBounds,
    Estimability,
    EstimatorOp,
    ExperimentReport,
    FamilyKind,
    FisherResult,
    NumericalError,
    POVM,
    Prior,
    QFIMatrix,
    QFIReport,
    SLDOperator,
    StateFamily,
    ValidationError,
    VanTreesReport,
    born_probs,
    bures_distance_sq,
    bures_metric_check,
    classical_fisher,
    crb_bounds,
    estimability,
    fidelity,
    file_digest,
    load_model,
    load_povm,
    load_prior,
    optimal_estimator,
    optimal_povm,
    qfi,
    qfi_decomposed,
    qfi_from_state,
    qfi_matrix,
    qfi_pure,
    qfi_unitary,
    reparametrize,
    simulate,
    sld,
    sld_from_state,
    van_trees,
)

__version__ = "1.0.0"

__all__ = [
    "BuresReport",
    "CRBBounds",
    "Estimability",
    "EstimatorOp",
    "ExperimentReport",
    "FamilyKind",
    "FisherResult",
    "NumericalError",
    "POVM",
    "Prior",
    "QFIMatrix",
    "QFIReport",
    "SLDOperator",
    "StateFamily",
    "ValidationError",
    "VanTreesReport",
    "born_probs",
    "bures_distance_sq",
    "bures_metric_check",
    "classical_fisher",
    "crb_bounds",
    "estimability",
    "fidelity",
    "file_digest",
    "load_model",
    "load_povm",
    "load_prior",
    "optimal_estimator",
    "optimal_povm",
    "qfi",
    "qfi_decomposed",
    "qfi_from_state",
    "qfi_matrix",
    "qfi_pure",
    "qfi_unitary",
    "reparametrize",
    "simulate",
    "sld",
    "sld_from_state",
    "van_trees",
]
