"""Exception hierarchy shared by every module."""

from __future__ import annotations


class AnnularEulerError(Exception):
    """Base class for all package errors."""


class ConfigError(AnnularEulerError, ValueError):
    """Invalid parameters or grid sizes."""


class DomainError(AnnularEulerError, ValueError):
    """A point was requested outside the domain of a closed-form profile."""


class GeometryError(AnnularEulerError, ValueError):
    """Boundary curves overlap, self-intersect or leave the admissible range."""


class DegenerateParameterError(AnnularEulerError, ValueError):
    """A closed-form expression has a vanishing denominator."""


class SolverError(AnnularEulerError, RuntimeError):
    """The linear elliptic solve failed to reach its tolerance."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class DegeneracyError(AnnularEulerError, RuntimeError):
    """The linearized operator is singular (or nearly so) in a represented mode."""

    def __init__(self, message: str, mode: int | None = None):
        super().__init__(message)
        self.mode = mode


class DivergenceError(AnnularEulerError, RuntimeError):
    """Newton iteration failed to converge."""


class NotFoundError(AnnularEulerError, LookupError):
    """A root search found no sign change in the requested interval."""
