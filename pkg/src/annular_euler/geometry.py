"""Even boundary perturbations of the annulus and the flattening map.

A perturbed annulus is described by two zero-mean cosine series: ``eta`` moves
the outer circle to ``r = 1 + eta(theta)`` and ``xi`` moves the inner circle to
``r = lam + xi(theta)``.  The flattening map

    r(s, theta) = (lam + xi(theta)) (1 - s) + (1 + eta(theta)) s,   s in [0, 1]

sends the perturbed annulus onto the reference rectangle ``[0, 1] x [0, pi]``
(evenness in theta lets every field live on the half circle).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, GeometryError

DEFAULT_MODES = 32
DEFAULT_N_THETA = 128
DEFAULT_N_RADIAL = 48


@dataclass(frozen=True)
class CosineSeries:
    """f(theta) = sum_{k=1..K} a_k cos(k theta); the mean is structurally zero."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Iterable[float]):
        values = tuple(float(c) for c in np.asarray(list(coeffs), dtype=float).ravel())
        if not values:
            raise ConfigError("a CosineSeries needs at least one coefficient")
        if not all(np.isfinite(values)):
            raise ConfigError("CosineSeries coefficients must be finite")
        object.__setattr__(self, "coeffs", values)

    @classmethod
    def zeros(cls, K: int) -> "CosineSeries":
        return cls([0.0] * int(K))

    @classmethod
    def mode(cls, k: int, amplitude: float, K: int) -> "CosineSeries":
        """Single-mode series ``amplitude * cos(k theta)`` truncated at ``K``."""
        if not 1 <= k <= K:
            raise ConfigError(f"mode {k} outside 1..{K}")
        c = np.zeros(K)
        c[k - 1] = amplitude
        return cls(c)

    @property
    def K(self) -> int:
        return len(self.coeffs)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs)

    def __call__(self, theta, derivative: int = 0):
        return eval_series(self, theta, derivative)

    def __add__(self, other: "CosineSeries") -> "CosineSeries":
        K = max(self.K, other.K)
        return CosineSeries(_padded(self.array, K) + _padded(other.array, K))

    def __sub__(self, other: "CosineSeries") -> "CosineSeries":
        return self + other.scaled(-1.0)

    def scaled(self, factor: float) -> "CosineSeries":
        return CosineSeries(self.array * factor)

    def truncated(self, K: int) -> "CosineSeries":
        return CosineSeries(_padded(self.array, K))

    def sup_norm(self, n: int = 1024) -> float:
        theta = np.linspace(0.0, np.pi, n + 1)
        return float(np.max(np.abs(self(theta))))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def to_json(self) -> str:
        return json.dumps(list(self.coeffs))

    @classmethod
    def from_json(cls, text: str) -> "CosineSeries":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ConfigError("CosineSeries JSON must be an array of numbers")
        return cls(data)


def _padded(a: np.ndarray, K: int) -> np.ndarray:
    out = np.zeros(K)
    n = min(K, a.size)
    out[:n] = a[:n]
    return out


def eval_series(f: CosineSeries, theta, derivative: int = 0):
    """Evaluate the series (or its ``derivative``-th theta derivative) at ``theta``."""
    th = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(th)):
        raise ConfigError("theta must be finite")
    k = np.arange(1, f.K + 1, dtype=float)
    a = f.array
    phase = np.multiply.outer(th, k)
    # d^n/dtheta^n cos(k theta) = k^n cos(k theta + n pi / 2)
    out = (np.cos(phase + derivative * np.pi / 2) * (a * k**derivative)).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def angular_grid(n: int) -> np.ndarray:
    """Uniform grid theta_j = 2 pi j / n, j = 0..n-1."""
    return 2.0 * np.pi * np.arange(n) / n


def project_to_cosines(samples: Sequence[float], K: int) -> tuple[CosineSeries, float]:
    """Discrete cosine coefficients of samples taken on :func:`angular_grid`.

    Returns ``(series, mean)``; the mean is the k=0 coefficient, kept apart
    because the series type cannot carry it.
    """
    f = np.asarray(samples, dtype=float)
    n = f.size
    if K < 1 or n < 2 * K + 1:
        raise ConfigError(f"need at least {2 * K + 1} samples for K={K}, got {n}")
    F = np.fft.rfft(f) / n
    coeffs = 2.0 * F.real[1 : K + 1]
    return CosineSeries(coeffs), float(F.real[0])


# --- half-circle cosine grid (theta_j = pi j / M, j = 0..M) -----------------


@lru_cache(maxsize=None)
def half_grid(M: int) -> np.ndarray:
    return np.pi * np.arange(M + 1) / M


@lru_cache(maxsize=None)
def dct_matrices(M: int) -> tuple[np.ndarray, np.ndarray]:
    """Synthesis ``C[j, m] = cos(m theta_j)`` and its inverse on the half grid."""
    theta = half_grid(M)
    m = np.arange(M + 1)
    C = np.cos(np.outer(theta, m))
    # DCT-I analysis with trapezoid end weights
    w = np.ones(M + 1)
    w[0] = w[-1] = 0.5
    Cinv = (2.0 / M) * (C * w[:, None]).T
    Cinv[0] *= 0.5
    Cinv[-1] *= 0.5
    for arr in (C, Cinv):
        arr.setflags(write=False)
    return C, Cinv


@lru_cache(maxsize=None)
def theta_derivative_matrices(M: int) -> tuple[np.ndarray, np.ndarray]:
    """Spectral d/dtheta and d2/dtheta2 acting on even samples on the half grid.

    The first derivative of an even function is odd; its samples on the half
    grid are returned (they vanish at theta = 0 and pi).  The Nyquist mode has
    zero first derivative on the grid.
    """
    theta = half_grid(M)
    m = np.arange(M + 1, dtype=float)
    C, Cinv = dct_matrices(M)
    mm = m.copy()
    mm[-1] = 0.0
    S = np.sin(np.outer(theta, m))
    T1 = (S * (-mm)) @ Cinv
    T2 = (C * (-(m**2))) @ Cinv
    for arr in (T1, T2):
        arr.setflags(write=False)
    return T1, T2


def half_grid_modes(values: np.ndarray, K: int | None = None) -> np.ndarray:
    """Cosine coefficients c_0..c_K of samples on the half grid (last axis)."""
    M = values.shape[-1] - 1
    _, Cinv = dct_matrices(M)
    c = values @ Cinv.T
    return c if K is None else c[..., : K + 1]


@lru_cache(maxsize=None)
def chebyshev(n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev-Lobatto points on s in [0, 1] (increasing) and d/ds matrix."""
    N = n_points - 1
    if N < 2:
        raise ConfigError("need at least 3 radial collocation points")
    x = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.ones(N + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(N + 1)
    X = np.tile(x, (N + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    # s = (1 - x) / 2 runs from 0 (inner) to 1 (outer)
    s = (1.0 - x) / 2.0
    Ds = -2.0 * D
    for arr in (s, Ds):
        arr.setflags(write=False)
    return s, Ds


# --- geometry ----------------------------------------------------------------


@dataclass(frozen=True)
class AnnulusGeometry:
    """Annulus ``lam + xi(theta) < r < 1 + eta(theta)``."""

    lam: float
    eta: CosineSeries = field(default_factory=lambda: CosineSeries.zeros(1))
    xi: CosineSeries = field(default_factory=lambda: CosineSeries.zeros(1))

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ConfigError(f"inner radius must lie in (0, 1), got {self.lam}")
        theta = np.linspace(0.0, np.pi, 2049)
        outer = 1.0 + self.eta(theta)
        inner = self.lam + self.xi(theta)
        if not np.min(inner) > 0.0:
            raise GeometryError("inner boundary reaches the origin")
        if not np.min(outer) > np.max(inner):
            raise GeometryError(
                f"boundaries not ordered: min outer radius {np.min(outer):.6g} "
                f"<= max inner radius {np.max(inner):.6g}"
            )

    @classmethod
    def circular(cls, lam: float) -> "AnnulusGeometry":
        return cls(lam)

    def with_eta(self, eta: CosineSeries) -> "AnnulusGeometry":
        return AnnulusGeometry(self.lam, eta, self.xi)

    def with_xi(self, xi: CosineSeries) -> "AnnulusGeometry":
        return AnnulusGeometry(self.lam, self.eta, xi)

    @property
    def is_circular(self) -> bool:
        return self.eta.is_zero() and self.xi.is_zero()


@dataclass(frozen=True, eq=False)
class FlatteningMap:
    """Collocation grid and metric terms of the flattening map.

    Arrays have shape ``(n_radial, M + 1)`` with ``M = n_angular // 2``; rows
    run from the inner boundary (s = 0) to the outer boundary (s = 1).
    """

    geometry: AnnulusGeometry
    n_radial: int
    n_angular: int
    s: np.ndarray
    theta: np.ndarray
    inner: np.ndarray  # a(theta), a', a''   shape (3, M+1)
    outer: np.ndarray  # b(theta), b', b''
    r: np.ndarray
    r_s: np.ndarray
    r_theta: np.ndarray
    r_thetatheta: np.ndarray

    @property
    def M(self) -> int:
        return self.n_angular // 2

    @property
    def shape(self) -> tuple[int, int]:
        return self.r.shape


def flatten(
    geometry: AnnulusGeometry,
    n_radial: int = DEFAULT_N_RADIAL,
    n_angular: int = DEFAULT_N_THETA,
) -> FlatteningMap:
    """Precompute r(s, theta) and its derivatives on the collocation grid."""
    if n_angular < 8 or n_angular % 2:
        raise ConfigError("n_angular must be an even integer >= 8")
    M = n_angular // 2
    K_needed = max(geometry.eta.K, geometry.xi.K)
    if 2 * K_needed + 1 > n_angular:
        raise ConfigError(
            f"angular grid of {n_angular} points cannot resolve {K_needed} boundary modes"
        )
    s, _ = chebyshev(n_radial)
    theta = half_grid(M)
    inner = np.array([geometry.xi(theta, d) for d in range(3)])
    inner[0] += geometry.lam
    outer = np.array([geometry.eta(theta, d) for d in range(3)])
    outer[0] += 1.0
    S = s[:, None]
    r = inner[0] * (1.0 - S) + outer[0] * S
    r_s = np.broadcast_to(outer[0] - inner[0], r.shape).copy()
    r_theta = inner[1] * (1.0 - S) + outer[1] * S
    r_tt = inner[2] * (1.0 - S) + outer[2] * S
    if np.min(r_s) <= 0.0:
        raise GeometryError("flattening map is not monotone in s")
    return FlatteningMap(
        geometry, int(n_radial), int(n_angular), s, theta, inner, outer, r, r_s, r_theta, r_tt
    )
