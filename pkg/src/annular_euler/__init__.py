"""Overdetermined free-boundary problems for steady 2-D Euler flow on annuli.

Closed-form radial states, dispersion relations and bifurcation vorticities,
a spectral solver on perturbed annuli, Newton continuation of bifurcating
branches and stability solves under perturbed Neumann data.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    AnnularEulerError,
    ConfigError,
    DegeneracyError,
    DegenerateParameterError,
    DivergenceError,
    DomainError,
    GeometryError,
    NotFoundError,
    SolverError,
)
from .geometry import AnnulusGeometry, CosineSeries, FlatteningMap, flatten
from .radial import RadialProfile, bernoulli_Q, neumann_constants, trivial_stream

__all__ = [
    "AnnularEulerError",
    "AnnulusGeometry",
    "ConfigError",
    "CosineSeries",
    "DegeneracyError",
    "DegenerateParameterError",
    "DivergenceError",
    "DomainError",
    "FlatteningMap",
    "GeometryError",
    "NotFoundError",
    "RadialProfile",
    "SolverError",
    "bernoulli_Q",
    "flatten",
    "neumann_constants",
    "trivial_stream",
]
