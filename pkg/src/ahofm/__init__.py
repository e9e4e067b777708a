"""Penalized additive models with factorized higher-order interactions.

Univariate P-spline smooths plus interaction terms of any order, where
each interaction is a sum over latent factors of products of per-feature
spline curves. Smoothness is specified in degrees of freedom, fitting is
stochastic (Adam) or blockwise coordinate descent, and an exact
tensor-product GAM is included as the accuracy reference.
"""

from .basis import (
    BasisMatrix,
    PenaltyMatrix,
    SplineSpec,
    diff_penalty,
    eval_basis,
    eval_basis_matrix,
    make_spec,
)
from .bench import bench, compare, storage_bytes
from .core import (
    LatentTensor,
    ModelConfig,
    PhiCache,
    ThetaParams,
    afm_pairwise,
    ahot,
    ahot_brute,
    multilinearity_split,
    objective,
    penalty_value,
    phi_eval,
    predict_eta,
    predict_response,
    predict_row,
)
from .data import Dataset, SimulationResult, ingest_csv, simulate
from .effects import MarginalSummary, marginal_summary, pairwise_surface
from .model_io import load_model, save_model
from .oracle import ExactGamFit, TpsDesign, fit_exact_gam, surface_mse, tps_design
from .smoothing import (
    DroSingularValues,
    SmoothingTable,
    df_exact,
    dffun,
    dro,
    homogeneous_smoothing,
    sv2la,
)
from .train import FitState, TrainOptions, bcd_update_fiber, fit, fit_adam, fit_bcd, gradient, init

__version__ = "0.1.0"

__all__ = [
    "BasisMatrix", "PenaltyMatrix", "SplineSpec", "diff_penalty", "eval_basis",
    "eval_basis_matrix", "make_spec",
    "DroSingularValues", "SmoothingTable", "df_exact", "dffun", "dro",
    "homogeneous_smoothing", "sv2la",
    "LatentTensor", "ModelConfig", "PhiCache", "ThetaParams", "afm_pairwise",
    "ahot", "ahot_brute", "multilinearity_split", "objective", "penalty_value",
    "phi_eval", "predict_eta", "predict_response", "predict_row",
    "FitState", "TrainOptions", "bcd_update_fiber", "fit", "fit_adam", "fit_bcd",
    "gradient", "init",
    "ExactGamFit", "TpsDesign", "fit_exact_gam", "surface_mse", "tps_design",
    "MarginalSummary", "marginal_summary", "pairwise_surface",
    "Dataset", "SimulationResult", "ingest_csv", "simulate",
    "load_model", "save_model",
    "bench", "compare", "storage_bytes",
]
