"""Central-solution-space sufficient dimension reduction.

Classical inverse-regression estimators (OLS, SIR, KIR, PIR), their CSS
corrections fitted over Givens-angle frames, plug-in asymptotics for CSS-PIR
and a simulation harness for nonelliptical designs.
"""

from __future__ import annotations

from .data import DataError, Dataset, center, covariance, load_csv, standardize, whiten, write_csv
from .estimators import candidate_matrix, classical_fit, leading_span
from .evaluation import (
    METHODS,
    MODELS,
    SimConfig,
    gen_design,
    gen_response,
    loo_cv,
    run_benchmark,
    simulate,
    trace_correlation,
    true_basis,
)
from .kernels import GKernel, HBasis, make_slices
from .objective import CssObjective, FitOptions, FitReport, GBasis, fit_classical, fit_css
from .optimizer import OptimOptions, OptimResult
from .rotations import AngleVector, eta, frame_to_angles, n_angles, wrap

__version__ = "0.1.0"

__all__ = [
    "AngleVector", "CssObjective", "DataError", "Dataset", "FitOptions", "FitReport", "GBasis",
    "GKernel", "HBasis", "METHODS", "MODELS", "OptimOptions", "OptimResult", "SimConfig",
    "candidate_matrix", "center", "classical_fit", "covariance", "eta", "fit_classical", "fit_css",
    "frame_to_angles", "gen_design", "gen_response", "leading_span", "load_csv", "loo_cv",
    "make_slices", "n_angles", "run_benchmark", "simulate", "standardize", "trace_correlation",
    "true_basis", "whiten", "wrap", "write_csv",
]
