"""Stationary analysis of the two-queue non-work-conserving GPS system."""

__version__ = "0.1.0"

from .asymptotics import TailEstimate, classify_case, removable_singularity_check, tail_estimate, tail_eval
from .errors import GPSError, ParameterDomainError, UnstableSystemError
from .kernel import BranchPoints, Kernel, branch_points
from .model import DerivedRates, ModelParams, derive_rates, stability_check, transition_rates
from .oracle import simulate, solve_stationary
from .rh_solver import RHSolver, compute_P00

__all__ = [
    "BranchPoints", "DerivedRates", "GPSError", "Kernel", "ModelParams", "ParameterDomainError",
    "RHSolver", "TailEstimate", "UnstableSystemError", "branch_points", "classify_case",
    "compute_P00", "derive_rates", "removable_singularity_check", "simulate", "solve_stationary",
    "stability_check", "tail_estimate", "tail_eval", "transition_rates",
]
