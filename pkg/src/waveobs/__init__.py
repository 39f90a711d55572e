"""Spectral-Galerkin laboratory for boundary observability and control of
coupled wave systems on the unit interval."""

from waveobs.errors import (
    HypothesisViolation,
    IllPosedControlError,
    InvalidConfiguration,
    InvalidWindowError,
    NoCertifiedMuError,
    NumericalSingularityError,
    QuadratureError,
)
from waveobs.spectral import SpectralGrid, VectorState, ks_norm, ks_pair_norm, laplacian_spectrum

__all__ = [
    "HypothesisViolation",
    "IllPosedControlError",
    "InvalidConfiguration",
    "InvalidWindowError",
    "NoCertifiedMuError",
    "NumericalSingularityError",
    "QuadratureError",
    "SpectralGrid",
    "VectorState",
    "ks_norm",
    "ks_pair_norm",
    "laplacian_spectrum",
]

__version__ = "0.1.0"
