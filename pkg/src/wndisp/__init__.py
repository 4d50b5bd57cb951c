"""Spectral toolkit for the periodic nonlinear Schroedinger equation whose
dispersion is modulated by a Brownian path.

The package provides the Fourier representation of fields on the 2pi-torus,
reproducible Brownian ensembles, an exact-substep splitting solver, moment
estimators with closed-form oracles, resonance counting, the quintic
illposedness witness, and campaign drivers that check the space-time
integrability bounds numerically.
"""

__version__ = "0.1.0"

from .torus import TorusGrid, SpectralField, to_spectral
from .brownian import BrownianPath, EnsembleSpec, sample_path, refine
from .propagation import Trajectory, linear_flow, nonlinear_flow, solve_nls, duhamel

__all__ = [
    "TorusGrid",
    "SpectralField",
    "to_spectral",
    "BrownianPath",
    "EnsembleSpec",
    "sample_path",
    "refine",
    "Trajectory",
    "linear_flow",
    "nonlinear_flow",
    "solve_nls",
    "duhamel",
]
