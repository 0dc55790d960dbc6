"""Estimate quadratic fermion and boson Hamiltonians from local dynamics."""

from .core import CouplingGraph, QuadraticHamiltonian, Statistics, validate
from .diag import BogoliubovDecomposition, diagonalize
from .errors import QuadTomoError
from .pipeline import RunConfig, run_pipeline
from .reconstruct import chain_auto, chain_distinct, chain_equal, is_infecting, reconstruct_graph
from .spectral import SpectralData, SurfaceData

__all__ = [
    "BogoliubovDecomposition",
    "CouplingGraph",
    "QuadTomoError",
    "QuadraticHamiltonian",
    "RunConfig",
    "SpectralData",
    "Statistics",
    "SurfaceData",
    "chain_auto",
    "chain_distinct",
    "chain_equal",
    "diagonalize",
    "is_infecting",
    "reconstruct_graph",
    "run_pipeline",
    "validate",
]
