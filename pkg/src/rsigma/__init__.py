"""Counting weighted multigraphs and the phase transitions of constraint problems built on them."""
from .errors import DomainError, NonConvergenceError
from .spectral import SpectralSummary, WeightMatrix, spectral_summary

__version__ = "0.1.0"

__all__ = ["DomainError", "NonConvergenceError", "SpectralSummary", "WeightMatrix", "spectral_summary"]
