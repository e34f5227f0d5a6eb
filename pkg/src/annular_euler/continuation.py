"""Newton solves, bifurcation detection and branch tracing.

All three problems are written as square systems in cosine-mode space.  The
unknowns are the boundary coefficients plus the Bernoulli constant(s); the
equations are the mean and the represented modes of the boundary residual.
A branch corrector pins the bifurcating mode of ``eta`` to the branch
parameter s and frees the vorticity instead.

Jacobians come from forward differences of the nonlinear residual; the closed
forms in :mod:`dispersion` are used only for up-front degeneracy checks and
for first-order predictions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import reduce

import numpy as np
from scipy.optimize import brentq

from . import dispersion as disp
from .elliptic import (
    PAIR,
    SINGLE,
    TWO_PHASE,
    KINDS,
    solve_dirichlet,
    solve_transmission,
)
from .errors import (
    ConfigError,
    DegeneracyError,
    DivergenceError,
    GeometryError,
    NotFoundError,
    SolverError,
)
from .geometry import (
    DEFAULT_N_RADIAL,
    DEFAULT_N_THETA,
    AnnulusGeometry,
    CosineSeries,
    half_grid_modes,
)
from .radial import bernoulli_Q, bernoulli_Q_two_phase, neumann_constants

DEFAULT_TOL = 1e-9
DEFAULT_BRANCH_MODES = 16
DEFAULT_STABILITY_MODES = 16
DEGENERACY_GAP = 1e-2
FD_STEP = 1e-6
MAX_MODES = 64


# --- residual system ---------------------------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    """A problem kind with its fixed data.

    ``gamma`` is the vorticity (single phase, pair) or gamma_2 (two phase);
    ``gamma1`` is the core vorticity of the two-phase problem.
    """

    kind: str
    lam: float
    gamma: float
    gamma1: float | None = None
    n_radial: int = DEFAULT_N_RADIAL
    n_angular: int = DEFAULT_N_THETA

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown problem kind {self.kind!r}")
        if not 0.0 < self.lam < 1.0:
            raise ConfigError(f"lambda must lie in (0, 1), got {self.lam}")
        if self.kind == TWO_PHASE and not self.gamma1:
            raise ConfigError("two-phase problems need a nonzero gamma_1")

    @property
    def n_boundaries(self) -> int:
        return 2 if self.kind == PAIR else 1

    def with_gamma(self, gamma: float) -> "ProblemSpec":
        return replace(self, gamma=float(gamma))

    def constants(self, gamma: float) -> np.ndarray:
        """Reference Bernoulli constant(s) of the trivial state at this vorticity."""
        if self.kind == SINGLE:
            return np.array([bernoulli_Q(self.lam, gamma)])
        if self.kind == TWO_PHASE:
            return np.array([bernoulli_Q_two_phase(gamma)])
        return np.array(neumann_constants(self.lam, gamma))

    def traces(self, gamma: float, eta: CosineSeries, xi: CosineSeries):
        """Boundary quantities compared against the constants (squared or signed)."""
        if self.kind == SINGLE:
            sol = solve_dirichlet(AnnulusGeometry(self.lam, eta), gamma, self.n_radial, self.n_angular)
            return [sol.outer_trace**2], sol
        if self.kind == TWO_PHASE:
            sol = solve_transmission(
                AnnulusGeometry(self.lam, eta), self.gamma1, gamma, self.n_radial, self.n_angular
            )
            return [sol.outer_trace**2], sol
        sol = solve_dirichlet(AnnulusGeometry(self.lam, eta, xi), gamma, self.n_radial, self.n_angular)
        return [sol.outer_trace, sol.inner_trace], sol


def _series(coeffs: np.ndarray, modes: list[int], K: int) -> CosineSeries:
    c = np.zeros(max(K, 1))
    for m, v in zip(modes, coeffs):
        c[m - 1] = v
    return CosineSeries(c)


@dataclass
class _System:
    """Unknown layout: eta modes, xi modes (pair), constant corrections, [gamma]."""

    spec: ProblemSpec
    modes: list[int]
    K: int
    rho: tuple[CosineSeries | None, ...] = (None, None)
    pinned: int | None = None  # eta mode held at the branch parameter
    s: float = 0.0
    free_gamma: bool = False

    def __post_init__(self):
        self.eta_modes = [m for m in self.modes if m != self.pinned]
        self.xi_modes = list(self.modes) if self.spec.kind == PAIR else []
        self.nb = self.spec.n_boundaries

    @property
    def size(self) -> int:
        return len(self.eta_modes) + len(self.xi_modes) + self.nb + int(self.free_gamma)

    def unpack(self, x: np.ndarray):
        i = len(self.eta_modes)
        j = i + len(self.xi_modes)
        eta_c, xi_c = x[:i], x[i:j]
        dconst = x[j : j + self.nb]
        gamma = x[j + self.nb] if self.free_gamma else self.spec.gamma
        eta = _series(eta_c, self.eta_modes, self.K)
        if self.pinned is not None:
            c = np.array(eta.coeffs)
            c[self.pinned - 1] = self.s
            eta = CosineSeries(c)
        xi = _series(xi_c, self.xi_modes, self.K)
        return eta, xi, dconst, float(gamma)

    def pack(self, eta: CosineSeries, xi: CosineSeries, dconst, gamma: float) -> np.ndarray:
        e = eta.truncated(self.K).array
        z = xi.truncated(self.K).array
        parts = [e[[m - 1 for m in self.eta_modes]], z[[m - 1 for m in self.xi_modes]], np.asarray(dconst, float)]
        if self.free_gamma:
            parts.append([gamma])
        return np.concatenate(parts)

    def evaluate(self, x: np.ndarray):
        """Projected residual vector, full-grid sup norm and the solution."""
        eta, xi, dconst, gamma = self.unpack(x)
        try:
            traces, sol = self.spec.traces(gamma, eta, xi)
        except GeometryError:
            return None, math.inf, None
        consts = self.spec.constants(gamma) + dconst
        theta = sol.theta
        eqs, sup = [], 0.0
        for b, tr in enumerate(traces):
            rho = self.rho[b] if b < len(self.rho) else None
            vals = tr - consts[b] - (0.0 if rho is None else rho(theta))
            sup = max(sup, float(np.max(np.abs(vals))))
            c = half_grid_modes(vals)
            eqs.append(c[[0] + list(self.modes)])
        return np.concatenate(eqs), sup, sol

    def jacobian(self, x: np.ndarray, f0: np.ndarray) -> np.ndarray:
        J = np.empty((f0.size, x.size))
        for i in range(x.size):
            h = FD_STEP * max(1.0, abs(x[i]))
            xp = x.copy()
            xp[i] += h
            fp, _, _ = self.evaluate(xp)
            if fp is None:
                xp[i] -= 2 * h
                fp, _, _ = self.evaluate(xp)
                if fp is None:
                    raise GeometryError("finite-difference step left the admissible geometries")
                h = -h
            J[:, i] = (fp - f0) / h
        return J


@dataclass
class NewtonReport:
    x: np.ndarray
    residual_sup: float
    projected: float
    iterations: int
    jacobians: int
    rank: int
    history: list[float] = field(default_factory=list)
    solution: object = None


def _lstsq(J: np.ndarray, r: np.ndarray, rcond: float) -> tuple[np.ndarray, int]:
    U, sv, Vt = np.linalg.svd(J, full_matrices=False)
    keep = sv > rcond * sv[0]
    step = Vt[keep].T @ ((U[:, keep].T @ r) / sv[keep])
    return step, int(keep.sum())


def _newton(
    system: _System,
    x0: np.ndarray,
    tol: float,
    max_iter: int = 20,
    J: np.ndarray | None = None,
    rcond: float = 1e-9,
    projected_tol: float | None = None,
) -> NewtonReport:
    """Damped chord-Newton iteration with SVD-truncated steps.

    The Jacobian is reused while the residual contracts by at least a factor
    of 4 and rebuilt otherwise.  A step is accepted only if it lowers the
    projected residual, after at most two halvings.
    """
    projected_tol = tol / 10 if projected_tol is None else projected_tol
    x = np.array(x0, dtype=float)
    f, sup, sol = system.evaluate(x)
    if f is None:
        raise GeometryError("initial guess is not an admissible geometry")
    norm = float(np.max(np.abs(f)))
    history = [norm]
    n_jac = 0
    rank = x.size
    fresh = False
    for it in range(1, max_iter + 1):
        if norm <= projected_tol and sup <= tol:
            return NewtonReport(x, sup, norm, it - 1, n_jac, rank, history, sol)
        if J is None:
            J = system.jacobian(x, f)
            n_jac += 1
            fresh = True
        step, rank = _lstsq(J, -f, rcond)
        accepted = False
        for damp in (1.0, 0.5, 0.25):
            xt = x + damp * step
            ft, supt, solt = system.evaluate(xt)
            if ft is not None and float(np.max(np.abs(ft))) < norm:
                accepted = True
                break
        if not accepted:
            if fresh:
                # the floor of the discretization has been reached
                if sup <= tol:
                    return NewtonReport(x, sup, norm, it - 1, n_jac, rank, history, sol)
                raise DivergenceError(
                    f"Newton stalled at projected residual {norm:.3e} (sup {sup:.3e})"
                )
            J = None
            continue
        new = float(np.max(np.abs(ft)))
        if new > norm / 4:
            J = None
        fresh = False
        x, f, sup, sol, norm = xt, ft, supt, solt, new
        history.append(norm)
    if norm <= projected_tol * 10 and sup <= tol:
        return NewtonReport(x, sup, norm, max_iter, n_jac, rank, history, sol)
    raise DivergenceError(f"Newton did not converge in {max_iter} iterations (residual {norm:.3e})")


# --- stability solves ----------------------------------------------------------------


@dataclass(frozen=True)
class StabilityResult:
    """Solution of a perturbed overdetermined problem near the trivial annulus.

    ``predicted`` is the first-order response obtained from the linearization
    (mode by mode: rho_k divided by the linearized symbol);
    ``predicted_printed`` is the printed first-order formula, kept for
    comparison.
    """

    rho: CosineSeries
    eta: CosineSeries
    predicted: CosineSeries
    newton_iters: int
    residual_sup: float
    xi: CosineSeries | None = None
    predicted_xi: CosineSeries | None = None
    predicted_printed: CosineSeries | None = None
    predicted_printed_xi: CosineSeries | None = None
    bernoulli_correction: tuple[float, ...] = ()
    modes: tuple[int, ...] = ()


def _fundamental(*series: CosineSeries | None) -> int | None:
    idx = [i + 1 for s in series if s is not None for i, c in enumerate(s.coeffs) if c != 0.0]
    return reduce(math.gcd, idx) if idx else None


def represented_modes(K: int, *rho: CosineSeries | None) -> list[int]:
    """Multiples of the fundamental of the data up to K (all modes if the data vanish).

    The solution inherits the rotational symmetry of the data, so modes that
    are not multiples of the fundamental stay zero; leaving them out also
    removes the translation mode whenever the data do not excite it.
    """
    f = _fundamental(*rho) or 1
    return list(range(f, K + 1, f))


def check_degeneracy(spec: ProblemSpec, modes: list[int], gap: float = DEGENERACY_GAP) -> None:
    """Raise DegeneracyError if the linearization is (nearly) singular in a represented mode."""
    lam, g = spec.lam, spec.gamma
    for k in modes:
        if spec.kind == SINGLE:
            gs = disp.gamma_star_single(k, lam)
            bad = abs(g - gs) < gap * max(1.0, abs(gs))
            what = f"gamma={g} is within {gap:g} (relative) of the mode-{k} root {gs:.10g}"
        elif spec.kind == TWO_PHASE:
            gs = disp.gamma2_star(k, lam, spec.gamma1)
            bad = abs(g - gs) < gap * max(1.0, abs(spec.gamma1))
            what = f"gamma_2={g} is within {gap:g} of the mode-{k} root {gs:.10g}"
        else:
            M = disp.matrix_Mk_bvp(k, lam, g)
            scale = float(np.abs(M.matrix).max()) ** 2
            bad = abs(M.det) < gap * scale
            what = f"det of the mode-{k} matrix is {M.det:.3e} (scale {scale:.3e})"
            if k == 1:
                what += "; mode 1 is the rigid translation of both circles"
        if bad:
            raise DegeneracyError(f"linearization degenerate in mode {k}: {what}", mode=k)
    if spec.kind == SINGLE and abs(neumann_constants(lam, g)[0]) < 1e-8:
        raise DegeneracyError("outer velocity of the trivial state vanishes", mode=0)


def _first_order(spec: ProblemSpec, rho, modes, K):
    """(consistent, printed) first-order boundary responses."""
    lam, g = spec.lam, spec.gamma
    if spec.kind in (SINGLE, TWO_PHASE):
        tau = rho[0].truncated(K).array if rho[0] is not None else np.zeros(K)
        cons, printed = np.zeros(K), np.zeros(K)
        for k in modes:
            if spec.kind == SINGLE:
                sym = disp.sigma_k(k, lam, g)
                factor = disp.linearization_factor_single(lam, g)
            else:
                sym = disp.Sigma_k(k, lam, spec.gamma1, g)
                factor = g
            cons[k - 1] = tau[k - 1] / (factor * sym)
            printed[k - 1] = tau[k - 1] / sym
        return (CosineSeries(cons), None), (CosineSeries(printed), None)
    to = rho[0].truncated(K).array if rho[0] is not None else np.zeros(K)
    ti = rho[1].truncated(K).array if rho[1] is not None else np.zeros(K)
    ce, cx, pe, px = (np.zeros(K) for _ in range(4))
    for k in modes:
        y = np.array([to[k - 1], ti[k - 1]])
        ce[k - 1], cx[k - 1] = np.linalg.solve(disp.matrix_Mk_bvp(k, lam, g).matrix, y)
        pe[k - 1], px[k - 1] = np.linalg.solve(disp.matrix_Mk(k, lam, g).matrix, y)
        # the printed inner column measures displacement along -r
        px[k - 1] = -px[k - 1]
    return (CosineSeries(ce), CosineSeries(cx)), (CosineSeries(pe), CosineSeries(px))


def _newton_solve(
    spec: ProblemSpec,
    rho: tuple[CosineSeries | None, ...],
    K: int,
    tol: float,
    eta0: CosineSeries | None = None,
    xi0: CosineSeries | None = None,
    max_iter: int = 20,
    gap: float = DEGENERACY_GAP,
) -> StabilityResult:
    if K < 1 or K > MAX_MODES:
        raise ConfigError(f"mode count must lie in 1..{MAX_MODES}")
    if tol <= 0:
        raise ConfigError("tolerance must be positive")
    modes = represented_modes(K, *rho)
    rho_s = rho[0] if rho[0] is not None else CosineSeries.zeros(K)
    if _fundamental(*rho) is None and eta0 is None and xi0 is None:
        # zero data: the unperturbed annulus solves the problem in every mode
        system = _System(spec, modes, K, rho)
        f, sup, _ = system.evaluate(np.zeros(system.size))
        z = CosineSeries.zeros(K)
        zx = z if spec.kind == PAIR else None
        return StabilityResult(
            rho_s, z, z, 0, sup, zx, zx, z, zx, tuple(0.0 for _ in range(spec.n_boundaries)), tuple(modes),
        )
    check_degeneracy(spec, modes, gap)
    (ce, cx), (pe, px) = _first_order(spec, rho, modes, K)
    system = _System(spec, modes, K, rho)
    eta_init = eta0 if eta0 is not None else ce
    xi_init = xi0 if xi0 is not None else (cx if cx is not None else CosineSeries.zeros(K))
    x0 = system.pack(eta_init, xi_init, np.zeros(spec.n_boundaries), spec.gamma)
    rep = _newton(system, x0, tol, max_iter=max_iter, rcond=1e-12)
    if rep.rank < system.size:
        raise DegeneracyError(f"Jacobian rank {rep.rank} < {system.size}")
    eta, xi, dconst, _ = system.unpack(rep.x)
    return StabilityResult(
        rho_s, eta, ce, rep.iterations, rep.residual_sup,
        xi if spec.kind == PAIR else None, cx, pe, px, tuple(float(c) for c in dconst), tuple(modes),
    )


def newton_solve_G(
    lam: float,
    gamma: float,
    rho: CosineSeries | None,
    eta0: CosineSeries | None = None,
    K: int = DEFAULT_STABILITY_MODES,
    tol: float = DEFAULT_TOL,
    **grid,
) -> StabilityResult:
    """Outer boundary with |grad psi|^2 = Q + rho at fixed gamma (Q floats)."""
    spec = ProblemSpec(SINGLE, lam, gamma, **grid)
    return _newton_solve(spec, (rho,), K, tol, eta0)


def newton_solve_H(
    lam: float,
    gamma1: float,
    gamma2: float,
    rho: CosineSeries | None,
    eta0: CosineSeries | None = None,
    K: int = DEFAULT_STABILITY_MODES,
    tol: float = DEFAULT_TOL,
    **grid,
) -> StabilityResult:
    spec = ProblemSpec(TWO_PHASE, lam, gamma2, gamma1, **grid)
    return _newton_solve(spec, (rho,), K, tol, eta0)


def newton_solve_calG(
    lam: float,
    gamma: float,
    rho_out: CosineSeries | None,
    rho_in: CosineSeries | None,
    eta0: CosineSeries | None = None,
    xi0: CosineSeries | None = None,
    K: int = DEFAULT_STABILITY_MODES,
    tol: float = DEFAULT_TOL,
    **grid,
) -> StabilityResult:
    """Both boundaries free with signed traces q_out + rho_out and q_in + rho_in."""
    spec = ProblemSpec(PAIR, lam, gamma, **grid)
    return _newton_solve(spec, (rho_out, rho_in), K, tol, eta0, xi0)


# --- bifurcation detection ----------------------------------------------------------


def dispersion_function(kind: str, k: int, lam: float, gamma1: float | None = None, matrix: str = "printed"):
    """Scalar function of the vorticity whose zeros are the mode-k bifurcation points."""
    if kind == SINGLE:
        return lambda g: disp.sigma_k(k, lam, g)
    if kind == TWO_PHASE:
        if not gamma1:
            raise ConfigError("two-phase detection needs a nonzero gamma_1")
        return lambda g: disp.Sigma_k(k, lam, gamma1, g)
    build = disp.matrix_Mk if matrix == "printed" else disp.matrix_Mk_bvp
    return lambda g: build(k, lam, g).det


def detect_bifurcation(
    kind: str,
    k: int,
    lam: float,
    interval: tuple[float, float] | None = None,
    gamma1: float | None = None,
    matrix: str = "printed",
    samples: int = 2001,
) -> list[float]:
    """Bifurcation vorticities for mode k.

    Without an interval the closed forms are used.  With an interval every
    sign change on a uniform sample is refined by Brent's method.
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown problem kind {kind!r}")
    if matrix not in ("printed", "bvp"):
        raise ConfigError("matrix must be 'printed' or 'bvp'")
    if interval is None:
        if kind == SINGLE:
            return [disp.gamma_star_single(k, lam)]
        if kind == TWO_PHASE:
            return [disp.gamma2_star(k, lam, gamma1)]
        build = disp.matrix_Mk if matrix == "printed" else disp.matrix_Mk_bvp
        a2, J, a0 = build(k, lam, 0.0).quadratic()
        scale = max(abs(a2), abs(J), abs(a0))
        if max(abs(a2), abs(J), abs(a0)) <= 1e-10 * max(1.0, scale) or (
            abs(a2) < 1e-9 * scale and abs(J) < 1e-9 * scale and abs(a0) < 1e-9 * scale
        ):
            raise NotFoundError(f"mode-{k} determinant vanishes for every gamma")
        roots = disp.gamma_star_pair(k, lam, build)
        if not roots.real:
            raise NotFoundError(
                f"no real bifurcation for k={k}, lambda={lam}: discriminant {roots.discriminant:.6g}"
            )
        return [float(roots.gamma_star), float(roots.gamma_star2)]
    lo, hi = map(float, interval)
    if not lo < hi:
        raise ConfigError("interval must satisfy lo < hi")
    f = dispersion_function(kind, k, lam, gamma1, matrix)
    grid = np.linspace(lo, hi, samples)
    vals = []
    for g in grid:
        try:
            vals.append(f(g))
        except Exception:
            vals.append(np.nan)
    vals = np.array(vals)
    roots = []
    for i in range(samples - 1):
        a, b = vals[i], vals[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0.0:
            roots.append(float(brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15, maxiter=200)))
    if not roots:
        raise NotFoundError(f"no sign change of the mode-{k} dispersion function on [{lo}, {hi}]")
    return roots


# --- branches -----------------------------------------------------------------------


@dataclass(frozen=True)
class BranchPoint:
    s: float
    gamma: float
    eta: CosineSeries
    xi: CosineSeries | None
    bernoulli: tuple[float, ...]
    residual_sup: float
    newton_iters: int = 0
    modes: int = 0


@dataclass
class Branch:
    kind: str
    k0: int
    lam: float
    gamma0: float
    gamma1: float | None
    points: list[BranchPoint]
    K: int
    tol: float
    termination: str = "completed"
    log: list[str] = field(default_factory=list)

    def ratio_xi_eta(self) -> list[float]:
        """beta_1 / alpha_1 along the branch (pair problem)."""
        return [p.xi.coeffs[self.k0 - 1] / p.s for p in self.points if p.s != 0.0 and p.xi is not None]


def _top_quartile_energy(*series: CosineSeries | None, K: int) -> float:
    lo = K - max(1, K // 4)
    e = 0.0
    for s in series:
        if s is not None:
            c = s.truncated(K).array
            e += float(np.sum(c[lo:] ** 2))
    return e


def trace_branch(
    kind: str,
    k0: int,
    lam: float,
    gamma0: float | None = None,
    ds: float = 0.002,
    n_steps: int = 20,
    gamma1: float | None = None,
    K: int = DEFAULT_BRANCH_MODES,
    tol: float = DEFAULT_TOL,
    min_step: float = 1e-5,
    n_radial: int = DEFAULT_N_RADIAL,
    n_angular: int = DEFAULT_N_THETA,
) -> Branch:
    """Follow the branch bifurcating from the trivial state in mode k0.

    s is the cos(k0 theta) coefficient of eta.  Each step predicts by secant
    extrapolation (the kernel direction on the first step) and corrects with
    s pinned and gamma free.  On divergence the step is halved; below
    ``min_step`` the branch is reported as terminated.
    """
    if n_steps < 0 or ds == 0.0:
        raise ConfigError("need n_steps >= 0 and ds != 0")
    if k0 < 1 or k0 > K:
        raise ConfigError(f"k0 must lie in 1..{K}")
    if gamma0 is None:
        gamma0 = detect_bifurcation(kind, k0, lam, gamma1=gamma1)[0]
    spec = ProblemSpec(kind, lam, float(gamma0), gamma1, n_radial, n_angular)
    modes = list(range(1, K + 1))
    sys0 = _System(spec, modes, K)
    f0, sup0, _ = sys0.evaluate(np.zeros(sys0.size))
    pair = kind == PAIR
    zero = CosineSeries.zeros(K)
    points = [BranchPoint(0.0, float(gamma0), zero, zero if pair else None, tuple([0.0] * spec.n_boundaries), sup0, 0, K)]
    log = [f"trivial state residual {sup0:.3e}"]
    branch = Branch(kind, k0, lam, float(gamma0), gamma1, points, K, tol, log=log)

    prev_x: list[tuple[float, np.ndarray]] = []
    s = 0.0
    step = ds
    J = None
    while len(points) <= n_steps:
        s_new = s + step
        system = _System(spec, modes, K, pinned=k0, s=s_new, free_gamma=True)
        if len(prev_x) >= 2:
            (s1, x1), (s2, x2) = prev_x[-2], prev_x[-1]
            guess = x2 + (x2 - x1) * (s_new - s2) / (s2 - s1)
        elif len(prev_x) == 1:
            s2, x2 = prev_x[-1]
            guess = x2 * (s_new / s2)
            guess[-1] = gamma0 + (x2[-1] - gamma0) * (s_new / s2)
        else:
            guess = np.zeros(system.size)
            guess[-1] = gamma0
        try:
            rep = _newton(system, guess, tol, J=J, rcond=1e-8)
        except (DivergenceError, GeometryError, SolverError) as exc:
            J = None
            step /= 2
            log.append(f"s={s_new:.6g}: {exc}; halving step to {step:.3g}")
            if abs(step) < min_step:
                branch.termination = f"step below {min_step:g} at s={s:.6g}"
                break
            continue
        eta, xi, dconst, gamma = system.unpack(rep.x)
        if _top_quartile_energy(eta, xi if pair else None, K=K) > 1e-8 and 2 * K <= MAX_MODES:
            log.append(f"s={s_new:.6g}: top-quartile energy too large, doubling K to {2 * K}")
            K *= 2
            modes = list(range(1, K + 1))
            prev_x = [(sp, _resize(spec, xp, k0, K // 2, K)) for sp, xp in prev_x]
            J = None
            branch.K = K
            continue
        points.append(
            BranchPoint(float(s_new), gamma, eta, xi if pair else None,
                        tuple(float(c) for c in dconst), rep.residual_sup, rep.iterations, K)
        )
        prev_x.append((s_new, rep.x))
        s = s_new
        if rep.rank < system.size:
            log.append(f"s={s_new:.6g}: corrector Jacobian rank {rep.rank} of {system.size}")
    return branch


def _resize(spec: ProblemSpec, x: np.ndarray, k0: int, K_old: int, K_new: int) -> np.ndarray:
    old = _System(spec, list(range(1, K_old + 1)), K_old, pinned=k0, free_gamma=True)
    new = _System(spec, list(range(1, K_new + 1)), K_new, pinned=k0, free_gamma=True)
    eta, xi, dconst, gamma = old.unpack(x)
    return new.pack(eta, xi, dconst, gamma)


def verify_branch_nontriviality(branch: Branch, alpha: float = 1.0) -> dict:
    """Checks that branch domains are genuinely perturbed and led by mode k0."""
    rows = []
    ok = True
    for p in branch.points:
        if p.s == 0.0:
            rows.append({"s": 0.0, "trivial": p.eta.is_zero(), "residual_sup": p.residual_sup})
            continue
        sup = p.eta.sup_norm()
        c = np.abs(p.eta.array)
        lead = int(np.argmax(c)) + 1
        xi_sup = p.xi.sup_norm() if p.xi is not None else None
        good = sup > 0 and lead == branch.k0 and sup >= 0.9 * abs(p.s) * abs(alpha) and p.residual_sup < branch.tol
        ok &= good
        rows.append({"s": p.s, "eta_sup": sup, "xi_sup": xi_sup, "leading_mode": lead,
                     "residual_sup": p.residual_sup, "ok": good})
    return {"ok": bool(ok), "points": rows, "halving": off_mode_halving(branch)}


def off_mode_norm(p: BranchPoint, k0: int) -> float:
    c = list(p.eta.array)
    c[k0 - 1] = 0.0
    tot = float(np.sum(np.square(c)))
    if p.xi is not None:
        z = list(p.xi.array)
        z[k0 - 1] = 0.0
        tot += float(np.sum(np.square(z)))
    return math.sqrt(tot)


def off_mode_halving(branch: Branch) -> dict:
    """Ratio of the off-k0 coefficient norm between the last point and the one at half its s."""
    pts = [p for p in branch.points if p.s != 0.0]
    if len(pts) < 2:
        return {"ratio": None}
    last = pts[-1]
    half = min(pts, key=lambda p: abs(p.s - last.s / 2))
    a, b = off_mode_norm(last, branch.k0), off_mode_norm(half, branch.k0)
    ratio = a / b if b > 0 else math.inf
    return {"s": last.s, "s_half": half.s, "norm": a, "norm_half": b, "ratio": ratio}
