"""Linearization coefficients, dispersion relations and bifurcation vorticities.

Every closed form appears twice: as the displayed algebraic expression and as
the solution of the small boundary system that defines it.  Powers of lam are
only ever taken with positive exponents (``t = lam**(2k)``, ``p = lam**k``), so
large k underflows harmlessly instead of overflowing.

Conventions for the two-boundary problem: both boundary displacements are
measured along +r and both normal-derivative traces use the outward normal of
the annulus (+r outside, -r inside).
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateParameterError
from .radial import log_coefficient, neumann_constants

K_MAX = 512


def _check(k: int, lam: float) -> tuple[int, float]:
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ConfigError(f"mode index must be a positive integer, got {k}")
    if k > K_MAX:
        raise ConfigError(f"mode index {k} exceeds the cap {K_MAX}")
    lam = float(lam)
    if not (0.0 < lam < 1.0):
        raise ConfigError(f"lambda must lie in (0, 1), got {lam}")
    return int(k), lam


def _powers(k: int, lam: float) -> tuple[float, float, float]:
    L = math.log(lam)
    return L, math.exp(k * L), math.exp(2 * k * L)


@dataclass(frozen=True)
class DispersionRecord:
    k: int
    lam: float
    value: float | None = None
    roots: tuple = ()
    residual: float = 0.0


# --- single phase -------------------------------------------------------------


def harmonic_coeffs_single(k: int, lam: float, gamma: float) -> tuple[float, float]:
    """(A_k, B_k) of the mode-k shape derivative A_k r^-k + B_k r^k."""
    k, lam = _check(k, lam)
    L, _, t = _powers(k, lam)
    n = 2.0 * gamma * L + 4.0 + gamma * (1.0 - lam * lam)
    den = 4.0 * L * (1.0 - t)
    return t * n / den, -n / den


def harmonic_coeffs_single_bvp(k: int, lam: float, gamma: float) -> tuple[float, float]:
    """Same coefficients from the two boundary conditions S(lam) = 0, S(1) = -q_out."""
    k, lam = _check(k, lam)
    _, p, _ = _powers(k, lam)
    q_out, _ = neumann_constants(lam, gamma)
    # S = a (lam/r)^k + b r^k keeps both basis functions O(1) on [lam, 1]
    a, b = np.linalg.solve(np.array([[1.0, p], [p, 1.0]]), np.array([0.0, -q_out]))
    return float(a * p), float(b)


def sigma_k(k: int, lam: float, gamma: float) -> float:
    """Single-phase dispersion value, closed form."""
    k, lam = _check(k, lam)
    L, _, t = _powers(k, lam)
    g = 4.0 + gamma * (1.0 - lam * lam)
    num = k * (g + 2.0 * gamma * L) * (1.0 + t) + (g - 2.0 * gamma * L) * (1.0 - t)
    return -num / (4.0 * L * (1.0 - t))


def sigma_k_from_coeffs(k: int, lam: float, gamma: float) -> float:
    """Dispersion value assembled from (A_k, B_k) and the curvature of the trivial state."""
    A, B = harmonic_coeffs_single(k, lam, gamma)
    return -k * A + k * B - (log_coefficient(lam, gamma) - gamma / 2.0)


def sigma_k_slope(k: int, lam: float) -> float:
    """d sigma_k / d gamma (sigma_k is affine in gamma)."""
    return sigma_k(k, lam, 1.0) - sigma_k(k, lam, 0.0)


def g_k(k: int, lam: float, gamma: float) -> float:
    k, lam = _check(k, lam)
    L, _, t = _powers(k, lam)
    g = 4.0 + gamma * (1.0 - lam * lam)
    return k * (g + 2.0 * gamma * L) * (1.0 + t) + (g - 2.0 * gamma * L) * (1.0 - t)


def gamma_star_single(k: int, lam: float) -> float:
    """Root of the single-phase dispersion relation for mode k."""
    k, lam = _check(k, lam)
    L, _, t = _powers(k, lam)
    m = 1.0 - lam * lam
    num = -4.0 * (k + k * t + 1.0 - t)
    den = (m + 2.0 * L) * (k + k * t) + (m - 2.0 * L) * (1.0 - t)
    return num / den


def gamma_star_single_k1(lam: float) -> float:
    _, lam = _check(1, lam)
    return 4.0 / (lam * lam - 2.0 * lam * lam * math.log(lam) - 1.0)


def linearization_factor_single(lam: float, gamma: float) -> float:
    """2 q_out: the factor multiplying sigma_k in the linearized squared-trace residual."""
    q_out, _ = neumann_constants(lam, gamma)
    return 2.0 * q_out


def transversality_single(lam: float) -> float:
    """Closed-form mixed derivative d_gamma d_eta of the squared-trace residual at gamma*."""
    _, lam = _check(1, lam)
    L = math.log(lam)
    gs = gamma_star_single_k1(lam)
    num = lam * lam * (-2.0 * L - 1.0 + lam * lam) * (4.0 + (1.0 - lam * lam + 2.0 * L) * gs)
    return num / (4.0 * L * L * (1.0 - lam * lam))


def transversality_single_direct(lam: float) -> float:
    """d/dgamma [2 q_out sigma_1] at gamma*, where sigma_1 vanishes."""
    return linearization_factor_single(lam, gamma_star_single_k1(lam)) * sigma_k_slope(1, lam)


# --- two phase ----------------------------------------------------------------


def _two_phase_den(t: float, g1: float, g2: float) -> float:
    # the displayed denominator times lam^(2k)/2, grouped to keep g1 + g2 exact
    return (g1 + g2) + t * (g1 - g2)


def harmonic_coeffs_two_phase(k: int, lam: float, gamma1: float, gamma2: float):
    """(D_k, E_k, F_k): core field D_k r^k, ring field E_k r^-k + F_k r^k."""
    k, lam = _check(k, lam)
    _, _, t = _powers(k, lam)
    den = _two_phase_den(t, gamma1, gamma2)
    if abs(den) <= 1e-14 * (abs(gamma1) + abs(gamma2)):
        raise DegenerateParameterError(
            f"transmission system singular at k={k}, lambda={lam}, gammas=({gamma1}, {gamma2})"
        )
    num = gamma2 * gamma2 - gamma1 * gamma2
    E = num * t / (2.0 * den)
    F = -num * t / (2.0 * den) - gamma2 / 2.0
    D = (1.0 - t) * num / (2.0 * den) - gamma2 / 2.0
    return D, E, F


def harmonic_coeffs_two_phase_bvp(k: int, lam: float, gamma1: float, gamma2: float):
    """(D_k, E_k, F_k) from the outer Dirichlet datum and the two transmission conditions."""
    k, lam = _check(k, lam)
    _, _, t = _powers(k, lam)
    if gamma1 == 0.0 or gamma2 == 0.0:
        raise DegenerateParameterError("transmission weights need nonzero vorticities")
    # unknowns (D, e, F) with E = e lam^(2k); rows: r = 1, value jump, flux jump
    M = np.array(
        [[0.0, t, 1.0], [1.0, -1.0, -1.0], [1.0 / gamma1, 1.0 / gamma2, -1.0 / gamma2]]
    )
    rhs = np.array([-gamma2 / 2.0, 0.0, 0.0])
    if abs(np.linalg.det(M)) < 1e-14 * np.abs(M).max() ** 3:
        raise DegenerateParameterError(f"transmission system singular at k={k}")
    D, e, F = np.linalg.solve(M, rhs)
    return float(D), float(e * t), float(F)


def _sigma2(k: int, t, g1, g2):
    """Two-phase dispersion value in terms of t = lam^(2k); generic arithmetic."""
    den = (g1 + g2) + t * (g1 - g2)
    if den == 0 or (isinstance(den, float) and abs(den) <= 1e-14 * (abs(g1) + abs(g2))):
        raise DegenerateParameterError(f"transmission system singular at k={k}")
    return (1 - k) * g2 / 2 - k * (g2 * g2 - g1 * g2) * t / den


def _gamma2_root(k: int, t, g1):
    num = (1 - k) * (1 + t) + 2 * k * t
    den = (1 - k) * (1 - t) - 2 * k * t
    return -num / den * g1


def Sigma_k(k: int, lam: float, gamma1: float, gamma2: float) -> float:
    """Two-phase dispersion value (-k E_k + k F_k + gamma_2 / 2)."""
    k, lam = _check(k, lam)
    _, _, t = _powers(k, lam)
    return float(_sigma2(k, t, float(gamma1), float(gamma2)))


def h_k(k: int, lam: float, gamma1: float, gamma2: float) -> float:
    k, lam = _check(k, lam)
    _, _, t = _powers(k, lam)
    den = _two_phase_den(t, gamma1, gamma2)
    if den == 0.0:
        raise DegenerateParameterError(f"h_k undefined at k={k}")
    return k * (gamma1 * gamma2 - gamma2 * gamma2) * t / den + (1 - k) * gamma2 / 2.0


def gamma2_star(k: int, lam: float, gamma1: float) -> float:
    """Two-phase bifurcation vorticity gamma_2 for mode k (equals gamma_1 when k = 1)."""
    k, lam = _check(k, lam)
    _, _, t = _powers(k, lam)
    return float(_gamma2_root(k, t, float(gamma1)))


def two_phase_root_residual_exact(k: int, lam: float, gamma1: float) -> tuple[float, float]:
    """|Sigma_k| at the root, both in exact rational arithmetic on the given floats.

    Returns ``(exact, rounded)`` where ``rounded`` evaluates Sigma_k exactly at
    the double-precision root.  For large k the root lies within about
    lam^(2k) of a pole of Sigma_k, so ``rounded`` measures the conditioning
    of the representable root rather than the formula.
    """
    k, lam = _check(k, lam)
    t = Fraction(lam) ** (2 * k)
    g1 = Fraction(gamma1)
    root = _gamma2_root(k, t, g1)
    exact = abs(_sigma2(k, t, g1, root))
    try:
        rounded = abs(_sigma2(k, t, g1, Fraction(float(root))))
    except DegenerateParameterError:
        rounded = math.inf
    return float(exact), float(rounded)


def Sigma_k_slope(k: int, lam: float, gamma1: float, gamma2: float, h: float = 1e-6) -> float:
    """Central difference of Sigma_k in gamma_2 (Sigma_k is rational, not affine)."""
    return (Sigma_k(k, lam, gamma1, gamma2 + h) - Sigma_k(k, lam, gamma1, gamma2 - h)) / (2 * h)


def transversality_two_phase(lam: float, gamma1: float) -> float:
    """Mixed derivative of the two-phase squared-trace residual at gamma_2 = gamma_1, mode 1."""
    return -gamma1 * lam * lam / 2.0


# --- two free boundaries --------------------------------------------------------


def pair_harmonic_coeffs(k: int, lam: float, gamma: float) -> tuple[float, float, float, float]:
    """(calA_k, calB_k, calC_k, calD_k) as displayed for the two-boundary problem."""
    k, lam = _check(k, lam)
    L, p, t = _powers(k, lam)
    A, B = harmonic_coeffs_single(k, lam, gamma)
    n = 2.0 * gamma * lam * lam * L + 4.0 + gamma * (1.0 - lam * lam)
    C = n * p / (4.0 * lam * L * (1.0 - t))
    return A, B, C, -C


@dataclass(frozen=True)
class LinearizedMatrix2:
    """2x2 mode-k matrix of the two-boundary linearization, affine in gamma."""

    k: int
    lam: float
    gamma: float
    affine: tuple[float, float, float, float, float, float, float, float]
    source: str = "closed_form"

    @property
    def entries(self) -> tuple[float, float, float, float]:
        A1, A2, B1, B2, C1, C2, D1, D2 = self.affine
        g = self.gamma
        return (A1 * g + A2, B1 * g + B2, C1 * g + C2, D1 * g + D2)

    @property
    def matrix(self) -> np.ndarray:
        A, B, C, D = self.entries
        return np.array([[A, B], [C, D]])

    @property
    def det(self) -> float:
        A, B, C, D = self.entries
        return A * D - B * C

    def quadratic(self) -> tuple[float, float, float]:
        """(a2, J, a0) with det = a2 gamma^2 - J gamma + a0."""
        A1, A2, B1, B2, C1, C2, D1, D2 = self.affine
        a2 = A1 * D1 - B1 * C1
        J = B2 * C1 + C2 * B1 - A2 * D1 - A1 * D2
        a0 = A2 * D2 - B2 * C2
        return a2, J, a0

    def det_from_quadratic(self) -> float:
        a2, J, a0 = self.quadratic()
        return a2 * self.gamma**2 - J * self.gamma + a0

    def at(self, gamma: float) -> "LinearizedMatrix2":
        return LinearizedMatrix2(self.k, self.lam, float(gamma), self.affine, self.source)

    def null_vector(self) -> np.ndarray:
        """Right singular vector of the smallest singular value, first entry normalized to 1."""
        _, _, vt = np.linalg.svd(self.matrix)
        v = vt[-1]
        return v / v[0] if abs(v[0]) > 1e-300 else v


def matrix_Mk(k: int, lam: float, gamma: float) -> LinearizedMatrix2:
    """The displayed matrix, built from its printed affine parts."""
    k, lam = _check(k, lam)
    L, p, t = _powers(k, lam)
    l2 = lam * lam
    m = 1.0 - l2
    A1 = (-2 * k * L * (t + 1) - k * m * (t + 1) + (2 * L - 1 + l2) * (1 - t)) / (4 * L * (1 - t))
    A2 = (k * (t + 1) + 1 - t) / ((t - 1) * L)
    # lam^k - lam^-k = (t - 1) / p
    B1 = p * (2 * k * l2 * L + k * m) / (2 * lam * L * (t - 1))
    B2 = 2 * k * p / (lam * L * (t - 1))
    lk1 = p / lam
    C1 = (2 * k * lk1 * L + k * m * lk1) / (2 * L * (t - 1))
    C2 = 2 * k * lk1 / (L * (t - 1))
    D1 = (2 * k * l2 * L * (1 + t) + k * m * (1 + t) + (2 * l2 * L - 1 + l2) * (t - 1)) / (
        4 * l2 * L * (t - 1)
    )
    D2 = ((k - 1) * t + (k + 1)) / (l2 * L * (t - 1))
    return LinearizedMatrix2(k, lam, float(gamma), (A1, A2, B1, B2, C1, C2, D1, D2))


def matrix_Mk_entries_direct(k: int, lam: float, gamma: float) -> tuple[float, float, float, float]:
    """Entries assembled from (calA..calD) and the second radial derivative of the trivial state."""
    k, lam = _check(k, lam)
    _, p, _ = _powers(k, lam)
    cA, cB, cC, cD = pair_harmonic_coeffs(k, lam, gamma)
    c = log_coefficient(lam, gamma)
    psi_rr_1 = -c + gamma / 2.0
    psi_rr_lam = -c / (lam * lam) + gamma / 2.0
    lkm = 1.0 / (lam * p)  # lam^(-k-1)
    lkp = p / lam  # lam^(k-1)
    # calA r^-k is stored pre-multiplied: calA = t * n / den, so calA lam^(-k-1) stays finite
    A = -k * cA + k * cB + psi_rr_1
    B = -k * cC + k * cD
    C = -k * lkm * cA + k * lkp * cB
    D = -k * lkm * cC + k * lkp * cD + psi_rr_lam
    return A, B, C, D


def matrix_Mk_bvp(k: int, lam: float, gamma: float, inner_sign: float = 1.0) -> LinearizedMatrix2:
    """The mode-k matrix recomputed from the defining boundary-value problems.

    Columns: unit outer displacement along +r, unit inner displacement along
    ``inner_sign * r`` (use -1 for the annulus-outward convention of the
    printed coefficients calC_k, calD_k).  Rows: outer trace, inner trace
    (outward normals of the annulus).
    """
    k, lam = _check(k, lam)
    if inner_sign not in (1.0, -1.0):
        raise ConfigError("inner_sign must be +1 or -1")

    def entries(g: float):
        _, p, t = _powers(k, lam)
        q_out, q_in = neumann_constants(lam, g)
        c = log_coefficient(lam, g)
        psi_rr_1 = -c + g / 2.0
        psi_rr_lam = -c / (lam * lam) + g / 2.0
        r = (1.0 + t) / (1.0 - t)
        m11 = -k * q_out * r + psi_rr_1
        m12 = -2.0 * k * q_in * p / (1.0 - t)
        m21 = 2.0 * k * q_out * p / (lam * (1.0 - t))
        m22 = (k / lam) * q_in * r - psi_rr_lam
        return np.array([m11, inner_sign * m12, m21, inner_sign * m22])

    e0 = entries(0.0)
    e1 = entries(1.0) - e0
    affine = (e1[0], e0[0], e1[1], e0[1], e1[2], e0[2], e1[3], e0[3])
    return LinearizedMatrix2(k, lam, float(gamma), tuple(float(x) for x in affine), "bvp")


def det_Mk0_display(k: int, lam: float) -> float:
    """Displayed closed form of det(M_{k,0})."""
    k, lam = _check(k, lam)
    L, p, t = _powers(k, lam)
    # numerator and denominator multiplied by lam^k
    num = (k - 1) ** 2 * t * t + 2.0 * (k * k - 1) * t + (3 * k + 1)
    den = lam * lam * L * L * (t - 1.0) * (t - 1.0)
    return num / den


def matrix_M1_display(lam: float, gamma: float) -> tuple[float, float, float, float]:
    """Explicit k=1 entries (a, b, c, d) as printed."""
    _, lam = _check(1, lam)
    L = math.log(lam)
    l2 = lam * lam
    a = ((2 * l2 * L + 1 - l2) * gamma + 4) / (2 * L * (l2 - 1))
    b = ((2 * l2 * L + 1 - l2) * gamma + 4) / (2 * lam * L * (lam - 1 / lam))
    c = ((2 * L + 1 - l2) * gamma + 4) / (2 * L * (l2 - 1))
    d = ((2 * l2 * L + 1 / l2 - 1) * gamma + 4 / l2) / (2 * lam * L * (lam - 1 / lam))
    return a, b, c, d


def gamma_pair_k1_display(lam: float) -> tuple[float, float]:
    """The two printed k=1 bifurcation vorticities."""
    _, lam = _check(1, lam)
    L = math.log(lam)
    l2 = lam * lam
    g1 = 4.0 / (l2 - 2 * l2 * L - 1)
    g2 = (4 - 4 / l2) / (2 * l2 * L + 1 / l2 + l2 - 2 - 2 * L)
    return g1, g2


@dataclass(frozen=True)
class PairRoots:
    """Roots of det(M_{k,gamma}) = 0 as a quadratic in gamma.

    ``gamma_star`` carries the + sign in front of the square root.  When the
    discriminant is negative both roots are complex and ``real`` is False.
    """

    k: int
    lam: float
    gamma_star: complex | float
    gamma_star2: complex | float
    discriminant: float
    real: bool = field(default=True)

    def __iter__(self):
        return iter((self.gamma_star, self.gamma_star2))


def quadratic_roots(a2: float, J: float, a0: float) -> tuple[complex | float, complex | float, float]:
    """Roots of a2 x^2 - J x + a0 ordered as ((J + sqrt)/(2 a2), (J - sqrt)/(2 a2))."""
    disc = J * J - 4.0 * a2 * a0
    if a2 == 0.0:
        if J == 0.0:
            raise DegenerateParameterError("determinant is independent of gamma")
        x = a0 / J
        return x, x, disc
    if disc < 0.0:
        sq = 1j * math.sqrt(-disc)
        return (J + sq) / (2 * a2), (J - sq) / (2 * a2), disc
    sq = math.sqrt(disc)
    # cancellation-free evaluation
    if J >= 0.0:
        q = (J + sq) / 2.0
        plus, minus = q / a2, (a0 / q if q != 0.0 else 0.0)
    else:
        q = (J - sq) / 2.0
        minus, plus = q / a2, a0 / q
    return plus, minus, disc


def gamma_star_pair(k: int, lam: float, matrix=matrix_Mk) -> PairRoots:
    k, lam = _check(k, lam)
    a2, J, a0 = matrix(k, lam, 0.0).quadratic()
    plus, minus, disc = quadratic_roots(a2, J, a0)
    return PairRoots(k, lam, plus, minus, disc, disc >= 0.0)


# --- tables -------------------------------------------------------------------


def single_phase_record(k: int, lam: float) -> DispersionRecord:
    g = gamma_star_single(k, lam)
    return DispersionRecord(k, lam, sigma_k(k, lam, 0.0), (g,), abs(sigma_k(k, lam, g)))


def two_phase_record(k: int, lam: float, gamma1: float) -> DispersionRecord:
    g = gamma2_star(k, lam, gamma1)
    return DispersionRecord(k, lam, None, (g,), abs(Sigma_k(k, lam, gamma1, g)))


def pair_record(k: int, lam: float, matrix=matrix_Mk) -> DispersionRecord:
    roots = gamma_star_pair(k, lam, matrix)
    if not roots.real:
        return DispersionRecord(k, lam, matrix(k, lam, 0.0).det, (), float("nan"))
    M = matrix(k, lam, 0.0)
    res = max(abs(M.at(g).det) for g in roots)
    return DispersionRecord(k, lam, M.det, tuple(roots), res)


def pair_matrix_discrepancy(k: int, lam: float, gamma: float) -> dict:
    """Entrywise comparison of the printed matrix with the boundary-value recomputation."""
    lit = matrix_Mk(k, lam, gamma)
    # the printed calC_k, calD_k measure the inner displacement along -r
    ref = matrix_Mk_bvp(k, lam, gamma, inner_sign=-1.0)
    a, b = lit.matrix, ref.matrix
    scale = max(np.abs(b).max(), 1e-300)
    return {
        "k": k,
        "lambda": lam,
        "gamma": gamma,
        "printed": a.ravel().tolist(),
        "recomputed": b.ravel().tolist(),
        "max_rel_diff": float(np.abs(a - b).max() / scale),
        "det_printed": lit.det,
        "det_recomputed": ref.det,
    }
