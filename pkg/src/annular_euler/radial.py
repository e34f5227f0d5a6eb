"""Closed-form radially symmetric states and their boundary constants.

Single phase: psi'' + psi'/r = gamma on (lam, 1), psi(lam) = 1, psi(1) = 0, whose
solution is ``c ln r - gamma (1 - r^2) / 4`` with
``c = (4 + (1 - lam^2) gamma) / (4 ln lam)``.

Two phase: vorticity gamma_1 in the core disk r < lam and gamma_2 in the ring,
Psi(1) = 0, Psi continuous and Psi_r / Gamma continuous across r = lam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

SINGLE = "single_phase"
TWO_PHASE = "two_phase"

_EDGE = 1e-12


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not (0.0 < lam < 1.0):
        raise ConfigError(f"lambda must lie in (0, 1), got {lam}")
    return lam


@dataclass(frozen=True)
class RadialProfile:
    kind: str
    lam: float
    gamma: float | tuple[float, float]

    def __post_init__(self):
        _check_lambda(self.lam)
        if self.kind == SINGLE:
            if not isinstance(self.gamma, (int, float)) or not math.isfinite(self.gamma):
                raise ConfigError("single-phase profile needs one finite gamma")
        elif self.kind == TWO_PHASE:
            if len(self.gamma) != 2 or not all(math.isfinite(g) for g in self.gamma):
                raise ConfigError("two-phase profile needs (gamma_1, gamma_2)")
        else:
            raise ConfigError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def single_phase(cls, lam: float, gamma: float) -> "RadialProfile":
        return cls(SINGLE, float(lam), float(gamma))

    @classmethod
    def two_phase(cls, lam: float, gamma1: float, gamma2: float) -> "RadialProfile":
        return cls(TWO_PHASE, float(lam), (float(gamma1), float(gamma2)))

    @property
    def r_min(self) -> float:
        return self.lam if self.kind == SINGLE else 0.0

    def __call__(self, r, order: int = 0):
        return trivial_stream(self, r, order)


def log_coefficient(lam: float, gamma: float) -> float:
    """Coefficient of ln r in the single-phase trivial state."""
    return (4.0 + (1.0 - lam * lam) * gamma) / (4.0 * math.log(lam))


def trivial_stream(p: RadialProfile, r, order: int = 0):
    """Closed-form trivial state (or its ``order``-th radial derivative, order <= 3)."""
    rr = np.asarray(r, dtype=float)
    lo = p.r_min
    if np.any(~np.isfinite(rr)) or np.any(rr < lo - _EDGE * max(1.0, lo)) or np.any(rr > 1.0 + _EDGE):
        raise DomainError(f"radius outside [{lo}, 1]")
    if order not in (0, 1, 2, 3):
        raise ConfigError("derivative order must be 0..3")
    if p.kind == SINGLE:
        out = _single(p.lam, p.gamma, rr, order)
    else:
        g1, g2 = p.gamma
        inner = -((1.0 - p.lam**2) * g2 + (p.lam**2 - rr * rr) * g1) / 4.0
        outer = -(1.0 - rr * rr) * g2 / 4.0
        if order == 0:
            v1, v2 = inner, outer
        elif order == 1:
            v1, v2 = g1 * rr / 2.0, g2 * rr / 2.0
        elif order == 2:
            v1, v2 = g1 / 2.0 + 0 * rr, g2 / 2.0 + 0 * rr
        else:
            v1 = v2 = 0.0 * rr
        out = np.where(rr < p.lam, v1, v2)
    return float(out) if np.ndim(out) == 0 else out


def _single(lam: float, gamma: float, r: np.ndarray, order: int):
    c = log_coefficient(lam, gamma)
    if order == 0:
        return c * np.log(r) - gamma * (1.0 - r * r) / 4.0
    if order == 1:
        return c / r + gamma * r / 2.0
    if order == 2:
        return -c / (r * r) + gamma / 2.0
    return 2.0 * c / r**3


def bernoulli_Q(lam: float, gamma: float) -> float:
    """Bernoulli constant |grad psi|^2 on the outer circle (single phase)."""
    lam = _check_lambda(lam)
    return (log_coefficient(lam, gamma) + gamma / 2.0) ** 2


def bernoulli_Q_two_phase(gamma2: float) -> float:
    return gamma2 * gamma2 / 4.0


def neumann_constants(lam: float, gamma: float) -> tuple[float, float]:
    """Signed normal derivatives (q_out, q_in) of the trivial state.

    Both use the outward normal of the annulus: +r on the outer circle and
    -r on the inner one.
    """
    lam = _check_lambda(lam)
    c = log_coefficient(lam, gamma)
    q_out = c + gamma / 2.0
    q_in = -(c / lam + gamma * lam / 2.0)
    return q_out, q_in


def degenerate_bernoulli_gamma(lam: float) -> float:
    """The vorticity at which the outer velocity of the trivial state vanishes."""
    lam = _check_lambda(lam)
    return 4.0 / (lam * lam - 2.0 * math.log(lam) - 1.0)
