"""Spectral solver on perturbed annuli and the overdetermined residual maps.

The field is discretized on the flattened rectangle: Chebyshev-Lobatto
collocation in s and a cosine (half-circle) grid in theta.  The transformed
Laplacian is applied matrix-free and the linear system is solved with GMRES,
right-preconditioned by exact mode-by-mode solves on the circular annulus with
the same mean radii.  On an unperturbed annulus the preconditioner is the
exact inverse and GMRES stops after one iteration.

In the two-phase problem the core disk is eliminated: its field is the
particular solution gamma_1 (r^2 - lam^2) / 4 plus the harmonic extension of the
interface trace, so the flux condition becomes a Dirichlet-to-Neumann (Robin)
row at s = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, gmres

from . import dispersion as disp
from .errors import ConfigError, DegenerateParameterError, GeometryError, SolverError
from .geometry import (
    DEFAULT_N_RADIAL,
    DEFAULT_N_THETA,
    AnnulusGeometry,
    CosineSeries,
    FlatteningMap,
    chebyshev,
    dct_matrices,
    flatten,
    half_grid_modes,
    theta_derivative_matrices,
)
from .radial import (
    RadialProfile,
    bernoulli_Q,
    bernoulli_Q_two_phase,
    neumann_constants,
    trivial_stream,
)

SINGLE = "single_phase"
TWO_PHASE = "two_phase"
PAIR = "pair"
KINDS = (SINGLE, TWO_PHASE, PAIR)

DEFAULT_SOLVER_TOL = 1e-14


# --- discretization ------------------------------------------------------------


class _Operator:
    """Transformed Laplacian and boundary rows on one flattening map."""

    def __init__(self, fmap: FlatteningMap, robin: tuple[float, float] | None = None):
        self.fmap = fmap
        n, M = fmap.n_radial, fmap.M
        self.n, self.M = n, M
        _, self.D = chebyshev(n)
        self.D2 = self.D @ self.D
        self.T1, self.T2 = theta_derivative_matrices(M)
        self.C, self.Cinv = dct_matrices(M)
        a, da, dda = fmap.inner
        b, db, ddb = fmap.outer
        S = fmap.s[:, None]
        w = b - a
        dw, ddw = db - da, ddb - dda
        r = fmap.r
        self.w = w
        beta = -(da + S * dw) / w
        beta_s = -dw / w
        beta_t = -(dda + S * ddw) / w + (da + S * dw) * dw / (w * w)
        self.beta, self.beta_s, self.beta_t = beta, beta_s, beta_t
        ir2 = 1.0 / (r * r)
        self.c_ss = 1.0 / (w * w) + beta * beta * ir2
        self.c_s = 1.0 / (r * w) + (beta_t + beta * beta_s) * ir2
        self.c_st = 2.0 * beta * ir2
        self.c_tt = ir2
        # robin = (gamma_2 / gamma_1, lam): core flux written through the DtN map
        self.robin = robin
        if robin is not None:
            ratio, lam = robin
            m = np.arange(M + 1, dtype=float)
            self.dtn = (self.C * (m / lam)) @ self.Cinv
            self.robin_ratio = ratio

    def norm_estimate(self) -> float:
        """Cheap infinity-norm bound of the discrete operator."""
        inf = lambda A: float(np.abs(A).sum(axis=1).max())
        return (
            inf(self.D2) * float(np.abs(self.c_ss).max())
            + inf(self.D) * float(np.abs(self.c_s).max())
            + inf(self.D) * inf(self.T1) * float(np.abs(self.c_st).max())
            + inf(self.T2) * float(np.abs(self.c_tt).max())
        )

    def derivatives(self, U: np.ndarray):
        Us = self.D @ U
        Uss = self.D2 @ U
        Ut = U @ self.T1.T
        Utt = U @ self.T2.T
        Ust = Us @ self.T1.T
        return Us, Uss, Ut, Utt, Ust

    def laplacian(self, U: np.ndarray) -> np.ndarray:
        Us, Uss, _, Utt, Ust = self.derivatives(U)
        return self.c_ss * Uss + self.c_s * Us + self.c_st * Ust + self.c_tt * Utt

    def apply(self, U: np.ndarray) -> np.ndarray:
        out = self.laplacian(U)
        out[-1] = U[-1]
        if self.robin is None:
            out[0] = U[0]
        else:
            out[0] = (self.D[0] @ U) / self.w - self.robin_ratio * (self.dtn @ U[0])
        return out


@lru_cache(maxsize=64)
def _mode_inverses(n: int, M: int, a0: float, w0: float, robin: tuple | None) -> np.ndarray:
    """Inverse of the circular-annulus operator for every cosine mode 0..M."""
    s, D = chebyshev(n)
    D2 = D @ D
    r = a0 + s * w0
    base = D2 / w0**2 + D / (r * w0)[:, None]
    out = np.empty((M + 1, n, n))
    for m in range(M + 1):
        A = base - np.diag(m * m / (r * r))
        A[-1] = 0.0
        A[-1, -1] = 1.0
        if robin is None:
            A[0] = 0.0
            A[0, 0] = 1.0
        else:
            ratio, lam = robin
            A[0] = D[0] / w0
            A[0, 0] -= ratio * m / lam
        out[m] = np.linalg.inv(A)
    out.setflags(write=False)
    return out


def _solve(op: _Operator, rhs: np.ndarray, tol: float) -> tuple[np.ndarray, dict]:
    fmap = op.fmap
    n, M = op.n, op.M
    a0 = float(half_grid_modes(fmap.inner[0])[0])
    w0 = float(half_grid_modes(fmap.outer[0] - fmap.inner[0])[0])
    robin = None if op.robin is None else (float(op.robin[0]), float(op.robin[1]))
    Pinv = _mode_inverses(n, M, round(a0, 14), round(w0, 14), robin)
    C, Cinv = op.C, op.Cinv

    def precond(V: np.ndarray) -> np.ndarray:
        Vh = V @ Cinv.T
        Xh = np.einsum("mij,jm->im", Pinv, Vh)
        return Xh @ C.T

    shape = (n, M + 1)

    def matvec(y):
        return op.apply(precond(y.reshape(shape))).ravel()

    A = LinearOperator((n * (M + 1),) * 2, matvec=matvec, dtype=float)
    b = rhs.ravel()
    bnorm = float(np.linalg.norm(b)) or 1.0
    lnorm = op.norm_estimate()
    U = precond(rhs)
    iters = 0
    best = (math.inf, U, math.inf)
    # the preconditioner is close to the operator, so P^-1 r estimates the
    # forward error; refine until it is at round-off level or stagnates
    for _ in range(8):
        r = b - op.apply(U).ravel()
        res = float(np.linalg.norm(r))
        est = float(np.linalg.norm(precond(r.reshape(shape)))) / (float(np.linalg.norm(U)) or 1.0)
        if est < best[2]:
            stalled = est > 0.5 * best[2]
            best = (res, U, est)
        else:
            stalled = True
        if est <= tol or stalled:
            break
        count = [0]

        def cb(_):
            count[0] += 1

        y, info = gmres(
            A, r, x0=r.copy(), rtol=1e-13, atol=0.0, restart=60,
            maxiter=2, callback=cb, callback_type="pr_norm",
        )
        iters += count[0]
        U = U + precond(y.reshape(shape))
    res, U, est = best
    backward = res / (bnorm + lnorm * float(np.linalg.norm(U)))
    diag = {
        "method": "gmres", "iterations": iters, "residual": res / bnorm,
        "backward_error": backward, "correction_estimate": est,
    }
    if not np.all(np.isfinite(U)) or est > 1e-8:
        U, diag = _solve_dense(op, rhs, diag)
    return U, diag


def _dense_matrix(op: _Operator) -> np.ndarray:
    n, M = op.n, op.M
    N = n * (M + 1)
    I_r, I_t = np.eye(n), np.eye(M + 1)
    L = (
        op.c_ss.ravel()[:, None] * np.kron(op.D2, I_t)
        + op.c_s.ravel()[:, None] * np.kron(op.D, I_t)
        + op.c_st.ravel()[:, None] * np.kron(op.D, op.T1)
        + op.c_tt.ravel()[:, None] * np.kron(I_r, op.T2)
    )
    rows_out = slice(N - (M + 1), N)
    L[rows_out] = np.kron(I_r[-1:], I_t)
    if op.robin is None:
        L[: M + 1] = np.kron(I_r[:1], I_t)
    else:
        L[: M + 1] = np.kron(op.D[:1], I_t) / op.w[:, None] - op.robin_ratio * np.kron(
            I_r[:1], op.dtn
        )
    return L


def _solve_dense(op: _Operator, rhs: np.ndarray, diag: dict) -> tuple[np.ndarray, dict]:
    L = _dense_matrix(op)
    try:
        lu = sla.lu_factor(L, check_finite=True)
        U = sla.lu_solve(lu, rhs.ravel()).reshape(rhs.shape)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SolverError(f"dense fallback failed: {exc}", diag) from exc
    rcond = float(1.0 / np.linalg.cond(L, 1))
    res = float(np.linalg.norm(rhs.ravel() - L @ U.ravel()) / (np.linalg.norm(rhs) or 1.0))
    diag = dict(diag, method="dense", residual=res, rcond=rcond, gmres_residual=diag["residual"])
    if not np.all(np.isfinite(U)) or res > 1e-8:
        raise SolverError(
            f"linear solve failed (relative residual {res:.3g}, reciprocal condition {rcond:.3g})",
            diag,
        )
    return U, diag


# --- solutions -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralSolution:
    """Solved stream function on a flattened perturbed annulus.

    ``outer_trace`` and ``inner_trace`` are signed normal derivatives with
    respect to the outward normal of the fluid ring, sampled on the half grid.
    In the two-phase case ``inner_trace`` is the ring-side flux through the
    interface and ``interface_modes`` holds the cosine coefficients of the
    interface trace used to rebuild the core field.
    """

    map: FlatteningMap
    values: np.ndarray
    kind: str
    gamma: float | tuple[float, float]
    outer_trace: np.ndarray
    inner_trace: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def geometry(self) -> AnnulusGeometry:
        return self.map.geometry

    @property
    def theta(self) -> np.ndarray:
        return self.map.theta

    @property
    def ring_gamma(self) -> float:
        return self.gamma[1] if self.kind == TWO_PHASE else self.gamma

    def interior_residual(self) -> float:
        op = _Operator(self.map)
        lap = op.laplacian(self.values)[1:-1]
        return float(np.max(np.abs(lap - self.ring_gamma)))

    def radial_derivative(self) -> np.ndarray:
        _, D = chebyshev(self.map.n_radial)
        return (D @ self.values) / (self.map.outer[0] - self.map.inner[0])

    def core_values(self, r) -> np.ndarray:
        """Core-disk field at radii ``r`` (< lam) on the solution's theta grid."""
        if self.kind != TWO_PHASE:
            raise ConfigError("only two-phase solutions carry a core field")
        lam = self.geometry.lam
        g1 = self.gamma[0]
        rr = np.asarray(r, dtype=float)[:, None]
        c = half_grid_modes(self.values[0])
        m = np.arange(c.size)
        C, _ = dct_matrices(self.map.M)
        harmonic = ((rr / lam) ** m * c) @ C.T
        return g1 * (rr * rr - lam * lam) / 4.0 + harmonic

    def to_dict(self) -> dict:
        g = self.geometry
        return {
            "kind": self.kind,
            "gamma": self.gamma,
            "lambda": g.lam,
            "eta": list(g.eta.coeffs),
            "xi": list(g.xi.coeffs),
            "n_radial": self.map.n_radial,
            "n_angular": self.map.n_angular,
            "s": self.map.s.tolist(),
            "theta": self.map.theta.tolist(),
            "values": self.values.tolist(),
            "outer_trace": self.outer_trace.tolist(),
            "inner_trace": self.inner_trace.tolist(),
            "diagnostics": self.diagnostics,
        }


def _traces(fmap: FlatteningMap, U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    _, D = chebyshev(fmap.n_radial)
    a, da, _ = fmap.inner
    b, db, _ = fmap.outer
    w = b - a
    Ur = (D @ U) / w
    # constant boundary values: the tangential derivative vanishes, so the
    # normal derivative is psi_r times |X'| / radius
    outer = Ur[-1] * np.sqrt(b * b + db * db) / b
    inner = -Ur[0] * np.sqrt(a * a + da * da) / a
    return outer, inner


def solve_dirichlet(
    geometry: AnnulusGeometry,
    gamma: float,
    n_radial: int = DEFAULT_N_RADIAL,
    n_angular: int = DEFAULT_N_THETA,
    tol: float = DEFAULT_SOLVER_TOL,
) -> SpectralSolution:
    """Delta psi = gamma in the ring, psi = 0 outside, psi = 1 inside."""
    if not math.isfinite(gamma):
        raise ConfigError("gamma must be finite")
    fmap = flatten(geometry, n_radial, n_angular)
    op = _Operator(fmap)
    rhs = np.full(fmap.shape, float(gamma))
    rhs[-1] = 0.0
    rhs[0] = 1.0
    U, diag = _solve(op, rhs, tol)
    outer, inner = _traces(fmap, U)
    return SpectralSolution(fmap, U, SINGLE, float(gamma), outer, inner, diag)


def solve_transmission(
    geometry: AnnulusGeometry,
    gamma1: float,
    gamma2: float,
    n_radial: int = DEFAULT_N_RADIAL,
    n_angular: int = DEFAULT_N_THETA,
    tol: float = DEFAULT_SOLVER_TOL,
) -> SpectralSolution:
    """Two-phase problem with the interface fixed at r = lam."""
    if not geometry.xi.is_zero():
        raise GeometryError("the two-phase interface is the fixed circle r = lambda")
    if gamma1 == 0.0 or gamma2 == 0.0:
        raise DegenerateParameterError("transmission weights 1/gamma need nonzero vorticities")
    fmap = flatten(geometry, n_radial, n_angular)
    lam = geometry.lam
    op = _Operator(fmap, robin=(gamma2 / gamma1, lam))
    rhs = np.full(fmap.shape, float(gamma2))
    rhs[-1] = 0.0
    rhs[0] = gamma2 * lam / 2.0
    U, diag = _solve(op, rhs, tol)
    outer, inner = _traces(fmap, U)
    return SpectralSolution(fmap, U, TWO_PHASE, (float(gamma1), float(gamma2)), outer, inner, diag)


def closed_form_error(sol: SpectralSolution) -> float:
    """Sup-norm distance to the radial closed form (circular annuli only)."""
    g = sol.geometry
    if not g.is_circular:
        raise GeometryError("closed forms exist only for the circular annulus")
    r = sol.map.r
    if sol.kind == TWO_PHASE:
        prof = RadialProfile.two_phase(g.lam, *sol.gamma)
        ring = np.max(np.abs(sol.values - trivial_stream(prof, r)))
        rc = np.linspace(0.0, g.lam, 33)[:-1]
        core = np.max(np.abs(sol.core_values(rc) - trivial_stream(prof, rc)[:, None]))
        return float(max(ring, core))
    prof = RadialProfile.single_phase(g.lam, sol.gamma)
    return float(np.max(np.abs(sol.values - trivial_stream(prof, r))))


# --- residual traces -------------------------------------------------------------


@dataclass(frozen=True)
class ResidualTrace:
    """Boundary residual split into its mean and its cosine modes 1..M."""

    mean: float
    modes: CosineSeries
    sup_norm: float
    theta: np.ndarray = field(repr=False, compare=False, default=None)
    values: np.ndarray = field(repr=False, compare=False, default=None)

    @classmethod
    def from_samples(cls, values: np.ndarray, theta: np.ndarray) -> "ResidualTrace":
        c = half_grid_modes(values)
        return cls(float(c[0]), CosineSeries(c[1:]), float(np.max(np.abs(values))), theta, values)

    def coefficient(self, k: int) -> float:
        return self.mean if k == 0 else self.modes.coeffs[k - 1]

    def reconstruct(self) -> np.ndarray:
        return self.mean + self.modes(self.theta)

    def odd_content(self) -> float:
        """Largest sine coefficient of the even extension of the samples."""
        full = np.concatenate([self.values, self.values[-2:0:-1]])
        return float(np.max(np.abs(np.fft.rfft(full).imag)) / full.size * 2)


def _series_on(series: CosineSeries | None, theta: np.ndarray) -> np.ndarray:
    return 0.0 if series is None else series(theta)


def residual_G(
    lam: float,
    gamma: float,
    eta: CosineSeries,
    Q: float | None = None,
    rho: CosineSeries | None = None,
    n_radial: int = DEFAULT_N_RADIAL,
    n_angular: int = DEFAULT_N_THETA,
) -> ResidualTrace:
    """Squared outer trace minus the Bernoulli constant (minus rho) on r = 1 + eta."""
    sol = solve_dirichlet(AnnulusGeometry(lam, eta), gamma, n_radial, n_angular)
    Q = bernoulli_Q(lam, gamma) if Q is None else Q
    vals = sol.outer_trace**2 - Q - _series_on(rho, sol.theta)
    return ResidualTrace.from_samples(vals, sol.theta)


def residual_H(
    lam: float,
    gamma1: float,
    gamma2: float,
    eta: CosineSeries,
    Q: float | None = None,
    rho: CosineSeries | None = None,
    n_radial: int = DEFAULT_N_RADIAL,
    n_angular: int = DEFAULT_N_THETA,
) -> ResidualTrace:
    sol = solve_transmission(AnnulusGeometry(lam, eta), gamma1, gamma2, n_radial, n_angular)
    Q = bernoulli_Q_two_phase(gamma2) if Q is None else Q
    vals = sol.outer_trace**2 - Q - _series_on(rho, sol.theta)
    return ResidualTrace.from_samples(vals, sol.theta)


def residual_calG(
    lam: float,
    gamma: float,
    eta: CosineSeries,
    xi: CosineSeries,
    q: tuple[float, float] | None = None,
    rho_out: CosineSeries | None = None,
    rho_in: CosineSeries | None = None,
    n_radial: int = DEFAULT_N_RADIAL,
    n_angular: int = DEFAULT_N_THETA,
) -> tuple[ResidualTrace, ResidualTrace]:
    """Signed traces minus (q_out, q_in) on both free boundaries."""
    sol = solve_dirichlet(AnnulusGeometry(lam, eta, xi), gamma, n_radial, n_angular)
    q_out, q_in = neumann_constants(lam, gamma) if q is None else q
    out = sol.outer_trace - q_out - _series_on(rho_out, sol.theta)
    inn = sol.inner_trace - q_in - _series_on(rho_in, sol.theta)
    return (ResidualTrace.from_samples(out, sol.theta), ResidualTrace.from_samples(inn, sol.theta))


# --- shape derivatives -------------------------------------------------------------


@dataclass(frozen=True)
class ClosedShapeDerivative:
    """Mode-k shape derivative (c_minus r^-k + c_plus r^k) cos(k theta) on the ring.

    For the two-phase problem ``core`` is the coefficient of r^k cos(k theta)
    inside the disk.
    """

    kind: str
    k: int
    lam: float
    c_minus: float
    c_plus: float
    core: float | None = None

    def radial(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ring = self.c_minus * r ** (-self.k) + self.c_plus * r**self.k
        if self.core is None:
            return ring
        return np.where(r < self.lam, self.core * r**self.k, ring)

    def __call__(self, r, theta) -> np.ndarray:
        return self.radial(r) * np.cos(self.k * np.asarray(theta))


def shape_derivative_closed(
    kind: str, k: int, lam: float, gamma, direction: str = "outer"
) -> ClosedShapeDerivative:
    """Closed-form shape derivative for a unit displacement cos(k theta) along +r.

    ``gamma`` is a float, or (gamma_1, gamma_2) for the two-phase problem.
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown problem kind {kind!r}")
    if direction not in ("outer", "inner"):
        raise ConfigError("direction must be 'outer' or 'inner'")
    if kind == TWO_PHASE:
        if direction != "outer":
            raise ConfigError("the two-phase interface does not move")
        D, E, F = disp.harmonic_coeffs_two_phase(k, lam, *gamma)
        return ClosedShapeDerivative(kind, k, lam, E, F, D)
    if direction == "outer":
        A, B = disp.harmonic_coeffs_single(k, lam, gamma)
        return ClosedShapeDerivative(kind, k, lam, A, B)
    if kind != PAIR:
        raise ConfigError("the single-phase inner circle does not move")
    # the printed coefficients belong to a displacement along -r
    _, _, Cc, Dc = disp.pair_harmonic_coeffs(k, lam, gamma)
    return ClosedShapeDerivative(kind, k, lam, -Cc, -Dc)


def _solve_kind(kind: str, geometry: AnnulusGeometry, gamma, n_radial: int, n_angular: int):
    if kind == TWO_PHASE:
        return solve_transmission(geometry, gamma[0], gamma[1], n_radial, n_angular)
    return solve_dirichlet(geometry, gamma, n_radial, n_angular)


@dataclass(frozen=True)
class FDShapeDerivative:
    s: np.ndarray
    theta: np.ndarray
    r: np.ndarray
    ring: np.ndarray
    core_r: np.ndarray | None = None
    core: np.ndarray | None = None

    def sup_distance(self, closed: ClosedShapeDerivative) -> float:
        err = np.max(np.abs(self.ring - closed(self.r, self.theta[None, :])))
        if self.core is not None:
            ref = closed(self.core_r[:, None], self.theta[None, :])
            err = max(err, np.max(np.abs(self.core - ref)))
        return float(err)


def shape_derivative_fd(
    kind: str,
    lam: float,
    gamma,
    eta: CosineSeries | None = None,
    xi: CosineSeries | None = None,
    t: float = 1e-5,
    n_radial: int = DEFAULT_N_RADIAL,
    n_angular: int = DEFAULT_N_THETA,
) -> FDShapeDerivative:
    """Forward-difference shape derivative (psi_t o (Id + t h) - psi_0) / t - grad psi_0 . h.

    The perturbed solve uses the same computational grid, so its grid values
    already sit at the displaced points; h is the radial field
    xi (1 - s) + eta s of the flattening.
    """
    eta = eta if eta is not None else CosineSeries.zeros(1)
    xi = xi if xi is not None else CosineSeries.zeros(1)
    base = AnnulusGeometry(lam)
    try:
        moved = AnnulusGeometry(lam, eta.scaled(t), xi.scaled(t))
    except GeometryError as exc:
        raise GeometryError(f"step t={t} leaves the admissible geometries: {exc}") from exc
    s0 = _solve_kind(kind, base, gamma, n_radial, n_angular)
    s1 = _solve_kind(kind, moved, gamma, n_radial, n_angular)
    fmap = s0.map
    th = fmap.theta
    S = fmap.s[:, None]
    h = xi(th) * (1.0 - S) + eta(th) * S
    ring = (s1.values - s0.values) / t - s0.radial_derivative() * h
    core_r = core = None
    if kind == TWO_PHASE:
        core_r = np.linspace(0.0, lam, 17)[:-1]
        core = (s1.core_values(core_r) - s0.core_values(core_r)) / t
    return FDShapeDerivative(fmap.s, th, fmap.r, ring, core_r, core)


# --- curvature identity ------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureReport:
    theta: np.ndarray
    curvature: np.ndarray
    psi_nn: np.ndarray
    psi_nn_direct: np.ndarray
    tangential_laplacian: np.ndarray
    identity_residual: float

    @property
    def psi_nn_variation(self) -> float:
        return float(np.max(self.psi_nn) - np.min(self.psi_nn))


def curvature_decomposition(sol: SpectralSolution, boundary: str = "outer") -> CurvatureReport:
    """Split Delta psi = psi_nn + H psi_n + Delta_tau psi on the outer boundary.

    H is the signed curvature (unit circle: 1).  psi_nn is recovered from the
    identity and, independently, from the Hessian in polar coordinates.
    """
    if boundary != "outer":
        raise ConfigError("only the outer boundary is supported")
    fmap = sol.map
    op = _Operator(fmap)
    b, db, ddb = fmap.outer
    N = np.sqrt(b * b + db * db)
    curvature = (b * b + 2 * db * db - b * ddb) / N**3
    # tangential Laplacian of the boundary trace along arclength
    g = sol.values[-1]
    dg = op.T1 @ g
    lap_tau = _odd_derivative(dg / N, fmap.M) / N
    psi_n = sol.outer_trace
    gamma = sol.ring_gamma
    psi_nn = gamma - curvature * psi_n - lap_tau

    Us, Uss, Ut, Utt, Ust = op.derivatives(sol.values)
    w = op.w
    beta, beta_s, beta_t = op.beta, op.beta_s, op.beta_t
    psi_r = Us / w
    psi_rr = Uss / (w * w)
    psi_t = Ut + beta * Us
    psi_rt = (Ust + beta_s * Us + beta * Uss) / w
    psi_tt = Utt + 2 * beta * Ust + beta * beta * Uss + (beta_t + beta * beta_s) * Us
    r = b
    nr, nt = b / N, -db / N
    direct = (
        nr * nr * psi_rr[-1]
        + 2 * nr * nt * (psi_rt[-1] / r - psi_t[-1] / (r * r))
        + nt * nt * (psi_tt[-1] / (r * r) + psi_r[-1] / r)
    )
    resid = float(np.max(np.abs(psi_nn - direct)))
    return CurvatureReport(fmap.theta, curvature, psi_nn, direct, lap_tau, resid)


def _odd_derivative(f_odd: np.ndarray, M: int) -> np.ndarray:
    """d/dtheta of odd samples on the half grid, returned as even samples."""
    theta = np.pi * np.arange(M + 1) / M
    m = np.arange(1, M)
    S = np.sin(np.outer(theta[1:-1], m))
    coeffs = (2.0 / M) * (S.T @ f_odd[1:-1])  # DST-I analysis
    return np.cos(np.outer(theta, m)) @ (coeffs * m)
