"""Weighted L^2 estimates for the drift heat semigroup on gradient shrinking solitons."""

from .errors import ConfigurationError, DivergenceError, DomainError, DriftHeatError
from .models import Kind, SolitonModel, check_identities, make_model, perturb_potential, probe, rescaled_potential
from .spectral import (
    Family,
    GaussianProfile,
    HermiteField,
    evolve,
    evolve_gaussian,
    project,
    weighted_norm_sq,
)
from .bounds import Schedule, classical_bound, critical_bound, sharpness_L

__all__ = [
    "ConfigurationError",
    "DivergenceError",
    "DomainError",
    "DriftHeatError",
    "Family",
    "GaussianProfile",
    "HermiteField",
    "Kind",
    "Schedule",
    "SolitonModel",
    "check_identities",
    "classical_bound",
    "critical_bound",
    "evolve",
    "evolve_gaussian",
    "make_model",
    "perturb_potential",
    "probe",
    "project",
    "rescaled_potential",
    "sharpness_L",
    "weighted_norm_sq",
]

__version__ = "0.1.0"
