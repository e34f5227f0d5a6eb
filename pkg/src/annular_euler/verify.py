"""Acceptance checks shared by the test suite and ``annular-euler verify``.

Each ``criterion_N`` function returns a :class:`CriterionResult` made of
named sub-checks.  A criterion passes only when every gating sub-check
passes; informational values are recorded next to them.  Disagreements
between printed closed forms and recomputed values go to the discrepancy
log instead of silently replacing one another.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import continuation as cont
from . import dispersion as disp
from . import elliptic as ell
from .errors import DegenerateParameterError
from .geometry import CosineSeries

LAMBDA_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
K_DIAGRAM = (1, 2, 3, 5, 10, 20, 100)


@dataclass
class Check:
    name: str
    passed: bool
    value: float | str | None = None
    threshold: float | str | None = None
    gating: bool = True
    note: str = ""


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)
    discrepancies: list[dict] = field(default_factory=list)
    table: dict | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.gating)

    def add(self, name, passed, value=None, threshold=None, gating=True, note=""):
        self.checks.append(Check(name, bool(passed), _plain(value), _plain(threshold), gating, note))

    def summary(self) -> str:
        failed = [c.name for c in self.checks if c.gating and not c.passed]
        status = "PASS" if self.passed else "FAIL"
        tail = "" if not failed else " (failed: " + "; ".join(failed) + ")"
        return f"[{status}] criterion {self.number}: {self.title}{tail}"

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
            "discrepancies": self.discrepancies,
        }


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return str(v)
    return v


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# --- 1: single-phase roots ------------------------------------------------------------


def criterion_1(lams=LAMBDA_GRID, ks=K_DIAGRAM) -> CriterionResult:
    res = CriterionResult(1, "single-phase dispersion roots")
    worst, k1_max, kpos_min = 0.0, -math.inf, math.inf
    rows = []
    for lam in lams:
        for k in ks:
            g = disp.gamma_star_single(k, lam)
            worst = max(worst, abs(disp.sigma_k(k, lam, g)))
            if k == 1:
                k1_max = max(k1_max, g)
            else:
                kpos_min = min(kpos_min, g)
            rows.append((k, lam, g))
    res.add("max |sigma_k(gamma_k*)|", worst < 1e-9, worst, 1e-9)
    res.add("max gamma_1* over the grid < -4", k1_max < -4.0, k1_max, -4.0)
    res.add("min gamma_k* (k >= 2) > 0", kpos_min > 0.0, kpos_min, 0.0)
    res.table = {"header": ["k", "lambda", "gamma_root"], "rows": rows}
    return res


# --- 2: positivity at zero vorticity ---------------------------------------------------


def criterion_2(lams=LAMBDA_GRID, kmax: int = 100) -> CriterionResult:
    res = CriterionResult(2, "zero-vorticity positivity")
    worst_rel, min_val = 0.0, math.inf
    for lam in lams:
        L = math.log(lam)
        for k in range(1, kmax + 1):
            t = lam ** (2 * k)
            ref = ((1 - k) * t - k - 1) / (L * (1 - t))
            val = disp.sigma_k(k, lam, 0.0)
            worst_rel = max(worst_rel, _rel(val, ref))
            min_val = min(min_val, val)
    res.add("relative error vs closed form", worst_rel < 1e-12, worst_rel, 1e-12)
    res.add("min sigma_k(0)", min_val > 0.0, min_val, 0.0)
    return res


# --- 3: two-phase roots ----------------------------------------------------------------


def criterion_3(lams=LAMBDA_GRID, gamma1s=(-2.0, 1.0, 3.0), kmax: int = 100) -> CriterionResult:
    res = CriterionResult(3, "two-phase dispersion roots")
    worst_k1, worst_exact = 0.0, 0.0
    n_double, n_cells = 0, 0
    rows = []
    for g1 in gamma1s:
        for lam in lams:
            worst_k1 = max(worst_k1, _rel(disp.gamma2_star(1, lam, g1), g1))
            for k in range(1, kmax + 1):
                g2 = disp.gamma2_star(k, lam, g1)
                exact, _ = disp.two_phase_root_residual_exact(k, lam, g1)
                worst_exact = max(worst_exact, exact)
                n_cells += 1
                try:
                    n_double += abs(disp.Sigma_k(k, lam, g1, g2)) < 1e-9
                except DegenerateParameterError:
                    pass
                if k in K_DIAGRAM:
                    rows.append((g1, k, lam, g2, g2 / g1))
    res.add("gamma_21* = gamma_1 (relative)", worst_k1 < 1e-12, worst_k1, 1e-12)
    res.add("max |Sigma_k(gamma_2k*)|, exact arithmetic", worst_exact < 1e-9, worst_exact, 1e-9)
    res.add("cells with |Sigma_k(gamma_2k*)| < 1e-9 in double precision", n_double == n_cells,
            f"{n_double}/{n_cells}", None, gating=False,
            note="for small lam^(2k) the root lies within rounding distance of a pole of Sigma_k")
    res.table = {"header": ["gamma1", "k", "lambda", "gamma2_root", "normalized"], "rows": rows}
    return res


# --- 4: pair matrix --------------------------------------------------------------------


def criterion_4(lams=LAMBDA_GRID, kmax: int = 20) -> CriterionResult:
    res = CriterionResult(4, "pair-problem matrix")
    min_printed, min_oracle, min_oracle2, worst_disp, worst_root = math.inf, math.inf, math.inf, 0.0, 0.0
    n_complex = 0
    rows = []
    for lam in lams:
        for k in range(1, kmax + 1):
            lit = disp.matrix_Mk(k, lam, 0.0)
            ora = disp.matrix_Mk_bvp(k, lam, 0.0)
            min_printed = min(min_printed, lit.det)
            min_oracle = min(min_oracle, ora.det)
            if k >= 2:
                min_oracle2 = min(min_oracle2, ora.det)
            shown = disp.det_Mk0_display(k, lam)
            rel = _rel(shown, lit.det)
            worst_disp = max(worst_disp, rel)
            if rel > 1e-8:
                res.discrepancies.append({
                    "quantity": "det(M_k,0) display vs entries", "k": k, "lambda": lam,
                    "printed": shown, "recomputed": lit.det, "oracle": ora.det, "rel_diff": rel,
                })
            roots = disp.gamma_star_pair(k, lam)
            if roots.real:
                for g in roots:
                    worst_root = max(worst_root, abs(lit.at(g).det))
                rows.append((k, lam, roots.gamma_star, roots.gamma_star2))
            else:
                n_complex += 1
                rows.append((k, lam, float("nan"), float("nan")))
    res.add("min det(M_k,0), printed entries", min_printed > 0.0, min_printed, 0.0, gating=False)
    res.add("min det(M_k,0), recomputed matrix", min_oracle > 0.0, min_oracle, 0.0,
            note="authoritative; mode 1 vanishes identically (rigid translation)")
    res.add("min det(M_k,0), recomputed matrix, k >= 2", min_oracle2 > 0.0, min_oracle2, 0.0, gating=False)
    res.add("display matches det of the entries", worst_disp < 1e-8, worst_disp, 1e-8)
    res.add("max |det| at the real roots", worst_root < 1e-8, worst_root, 1e-8,
            note=f"{n_complex} (k, lambda) cells have complex roots")
    worst_k1 = 0.0
    for lam in lams:
        r = sorted(disp.gamma_star_pair(1, lam))
        shown = sorted(disp.gamma_pair_k1_display(lam))
        worst_k1 = max(worst_k1, max(_rel(a, b) for a, b in zip(r, shown)))
    res.add("k=1 roots match the closed form (as a set)", worst_k1 < 1e-10, worst_k1, 1e-10)
    res.table = {"header": ["k", "lambda", "gamma_root", "gamma_root_2"], "rows": rows}
    return res


# --- 5: solver fidelity ----------------------------------------------------------------


def criterion_5(lam: float = 0.5) -> CriterionResult:
    res = CriterionResult(5, "solver fidelity on circular annuli")
    from .geometry import AnnulusGeometry

    geo = AnnulusGeometry(lam)
    for g in (0.0, -6.0, disp.gamma_star_single(1, lam)):
        err = ell.closed_form_error(ell.solve_dirichlet(geo, g))
        res.add(f"single phase gamma={g:.6g}", err < 1e-10, err, 1e-10)
    for g1, g2 in ((1.0, 1.0), (1.0, 3.0)):
        err = ell.closed_form_error(ell.solve_transmission(geo, g1, g2))
        res.add(f"two phase gammas=({g1:g},{g2:g})", err < 1e-10, err, 1e-10)
    return res


# --- 6: linearization oracles ------------------------------------------------------------


def _richardson(f, eps: float) -> np.ndarray:
    """Central difference refined by one Richardson pass."""
    d1 = (f(eps) - f(-eps)) / (2 * eps)
    d2 = (f(eps / 2) - f(-eps / 2)) / eps
    return (4 * d2 - d1) / 3


def linearization_fd(kind: str, k: int, lam: float, gamma, eps: float = 1e-2, **grid) -> np.ndarray:
    """FD mode-k derivative of the residual map(s) at the trivial state.

    Returns a scalar for G and H, and a 2x2 matrix for the pair map whose
    columns are outer and inner displacements along +r.
    """
    K = k

    def unit(a):
        return CosineSeries.mode(k, a, K)

    zero = CosineSeries.zeros(K)
    if kind == ell.SINGLE:
        return _richardson(lambda a: ell.residual_G(lam, gamma, unit(a), **grid).coefficient(k), eps)
    if kind == ell.TWO_PHASE:
        g1, g2 = gamma
        return _richardson(lambda a: ell.residual_H(lam, g1, g2, unit(a), **grid).coefficient(k), eps)
    cols = []
    for which in ("eta", "xi"):
        def f(a, which=which):
            eta, xi = (unit(a), zero) if which == "eta" else (zero, unit(a))
            o, i = ell.residual_calG(lam, gamma, eta, xi, **grid)
            return np.array([o.coefficient(k), i.coefficient(k)])
        cols.append(_richardson(f, eps))
    return np.column_stack(cols)


def criterion_6(lams=(0.3, 0.5, 0.7), ks=(1, 2, 3), gamma: float = -3.0, gammas2=(1.0, 3.0)) -> CriterionResult:
    res = CriterionResult(6, "linearization oracles")
    w_single = w_two = w_pair = w_printed = 0.0
    for lam in lams:
        for k in ks:
            fd = float(linearization_fd(ell.SINGLE, k, lam, gamma))
            ref = disp.linearization_factor_single(lam, gamma) * disp.sigma_k(k, lam, gamma)
            w_single = max(w_single, _rel(fd, ref))
            fd = float(linearization_fd(ell.TWO_PHASE, k, lam, gammas2))
            ref = gammas2[1] * disp.Sigma_k(k, lam, *gammas2)
            w_two = max(w_two, _rel(fd, ref))
            fd = linearization_fd(ell.PAIR, k, lam, gamma)
            ora = disp.matrix_Mk_bvp(k, lam, gamma).matrix
            scale = np.abs(ora).max()
            w_pair = max(w_pair, float(np.abs(fd - ora).max() / scale))
            # printed matrix, with the inner column mapped to a displacement along -r
            lit = disp.matrix_Mk(k, lam, gamma).matrix
            mapped = fd * np.array([1.0, -1.0])
            rel = float(np.abs(mapped - lit).max() / scale)
            w_printed = max(w_printed, rel)
            if rel > 1e-8:
                res.discrepancies.append({
                    "quantity": "pair matrix, printed entries vs finite differences",
                    "k": k, "lambda": lam, "gamma": gamma,
                    "printed": lit.ravel().tolist(), "recomputed": mapped.ravel().tolist(), "rel_diff": rel,
                })
    res.add("G: FD vs 2 q_out sigma_k", w_single <= 1e-5, w_single, 1e-5)
    res.add("H: FD vs gamma_2 Sigma_k", w_two <= 1e-5, w_two, 1e-5)
    res.add("pair: FD vs recomputed matrix", w_pair <= 1e-5, w_pair, 1e-5)
    res.add("pair: FD vs printed matrix", w_printed <= 1e-5, w_printed, 1e-5, gating=False,
            note="recomputed matrix is authoritative; see discrepancy log")
    return res


# --- 7: shape derivatives ---------------------------------------------------------------


def criterion_7(lam: float = 0.5, ks=(1, 2, 3), gamma: float = -3.0, gammas2=(1.0, 3.0),
                t: float = 1e-5) -> CriterionResult:
    res = CriterionResult(7, "shape-derivative convergence")
    cases = []
    for k in ks:
        cases.append(("single outer", ell.SINGLE, k, gamma, "outer"))
        cases.append(("two-phase outer", ell.TWO_PHASE, k, gammas2, "outer"))
        cases.append(("pair outer", ell.PAIR, k, gamma, "outer"))
        cases.append(("pair inner", ell.PAIR, k, gamma, "inner"))
    worst_final, ratios = 0.0, []
    for label, kind, k, g, direction in cases:
        closed = ell.shape_derivative_closed(kind, k, lam, g, direction)
        h = CosineSeries.mode(k, 1.0, k)
        eta, xi = (h, None) if direction == "outer" else (None, h)
        errs = [ell.shape_derivative_fd(kind, lam, g, eta, xi, tt).sup_distance(closed) for tt in (2 * t, t)]
        ratio = errs[0] / errs[1]
        ratios.append(ratio)
        worst_final = max(worst_final, errs[1])
        res.add(f"{label} k={k}: error ratio", 1.8 <= ratio <= 2.2, ratio, "[1.8, 2.2]")
    res.add("max final error at t", worst_final < 1e-3, worst_final, 1e-3)
    return res


# --- 8: transversality ------------------------------------------------------------------


def mixed_derivative_fd(kind: str, lam: float, gamma, h: float = 0.05) -> float:
    """d/dgamma of the mode-1 linearization at the trivial state (Richardson in gamma)."""
    if kind == ell.TWO_PHASE:
        g1, g2 = gamma

        def lin(x):
            return float(linearization_fd(ell.TWO_PHASE, 1, lam, (g1, g2 + x)))
    else:
        def lin(x):
            return float(linearization_fd(ell.SINGLE, 1, lam, gamma + x))
    return float(_richardson(lin, h))


def criterion_8(lam: float = 0.5, gamma1: float = 1.0) -> CriterionResult:
    res = CriterionResult(8, "transversality")
    fd = mixed_derivative_fd(ell.TWO_PHASE, lam, (gamma1, gamma1))
    ref = disp.transversality_two_phase(lam, gamma1)
    rel = _rel(fd, ref)
    res.add("two-phase mixed derivative vs -gamma_1 lam^2 / 2", rel < 1e-4, rel, 1e-4,
            note=f"FD {fd:.10g}, closed form {ref:.10g}")
    gs = disp.gamma_star_single(1, lam)
    fd = mixed_derivative_fd(ell.SINGLE, lam, gs)
    printed = disp.transversality_single(lam)
    direct = disp.transversality_single_direct(lam)
    res.add("single-phase mixed derivative nonzero", abs(fd) > 1e-6, fd, "!= 0")
    res.add("single-phase sign agrees with the printed expression", np.sign(fd) == np.sign(printed),
            fd, f"sign of {printed:.6g}")
    res.add("single-phase FD vs recomputed closed form", _rel(fd, direct) < 1e-4, _rel(fd, direct), 1e-4,
            gating=False, note=f"recomputed {direct:.10g}")
    if _rel(printed, direct) > 1e-8:
        res.discrepancies.append({
            "quantity": "single-phase transversality", "lambda": lam, "gamma": gs,
            "printed": printed, "recomputed": direct, "finite_difference": fd,
            "rel_diff": _rel(printed, direct),
        })
    return res


# --- 9: branches -------------------------------------------------------------------------


def _gamma_at_zero(branch: cont.Branch) -> float:
    pts = [p for p in branch.points if p.s != 0.0][:5]
    s = np.array([p.s for p in pts])
    g = np.array([p.gamma for p in pts])
    return float(np.polyval(np.polyfit(s, g, 2), 0.0))


def criterion_9(lam: float = 0.5, ds: float = 0.002, n_steps: int = 20, gamma1: float = 1.0,
                branches: dict | None = None) -> CriterionResult:
    res = CriterionResult(9, "branch tracing, k0 = 1")
    branches = branches if branches is not None else trace_reference_branches(lam, ds, n_steps, gamma1)
    for kind, br in branches.items():
        detected = cont.detect_bifurcation(kind, 1, lam, gamma1=gamma1 if kind == ell.TWO_PHASE else None)[0]
        worst = max(p.residual_sup for p in br.points)
        res.add(f"{kind}: {len(br.points)} points, max residual", worst < 1e-9 and len(br.points) == n_steps + 1,
                worst, 1e-9)
        g0 = _gamma_at_zero(br)
        res.add(f"{kind}: extrapolated gamma(0) vs detected", abs(g0 - detected) < 1e-6,
                abs(g0 - detected), 1e-6, note=f"detected {detected:.12g}")
        halving = cont.off_mode_halving(br)
        ratio = halving["ratio"]
        res.add(f"{kind}: off-mode norm halving ratio", ratio is not None and 3.5 <= ratio <= 4.5,
                ratio, "[3.5, 4.5]")
        nt = cont.verify_branch_nontriviality(br)
        res.add(f"{kind}: nontrivial, led by mode 1", nt["ok"], None, None)
        if kind == ell.PAIR:
            ratios = br.ratio_xi_eta()
            traced = ratios[0]
            null = disp.matrix_Mk_bvp(1, lam, br.gamma0).null_vector()
            ref = float(null[1] / null[0])
            rel = _rel(traced, ref)
            res.add("pair: traced xi/eta kernel ratio vs null vector", rel < 1e-3, traced, ref,
                    note=f"relative difference {rel:.3g}")
            lit = disp.matrix_Mk(1, lam, br.gamma0).null_vector()
            # printed inner column measures displacement along -r
            lit_ratio = float(-lit[1] / lit[0])
            res.add("pair: null vector of the printed matrix (mapped)", _rel(lit_ratio, ref) < 1e-3,
                    lit_ratio, ref, gating=False)
    return res


def trace_reference_branches(lam: float = 0.5, ds: float = 0.002, n_steps: int = 20, gamma1: float = 1.0) -> dict:
    return {
        ell.SINGLE: cont.trace_branch(ell.SINGLE, 1, lam, ds=ds, n_steps=n_steps),
        ell.TWO_PHASE: cont.trace_branch(ell.TWO_PHASE, 1, lam, gamma1=gamma1, ds=ds, n_steps=n_steps),
        ell.PAIR: cont.trace_branch(ell.PAIR, 1, lam, ds=ds, n_steps=n_steps),
    }


# --- 10: stability ----------------------------------------------------------------------


def _defect(r: cont.StabilityResult, printed: bool = False) -> float:
    pred = r.predicted_printed if printed else r.predicted
    d = np.linalg.norm((r.eta - pred).array)
    if r.xi is not None:
        pxi = r.predicted_printed_xi if printed else r.predicted_xi
        d = math.hypot(d, np.linalg.norm((r.xi - pxi).array))
    return float(d)


def criterion_10(lam: float = 0.5, amp: float = 1e-3, k: int = 2, K: int = 16) -> CriterionResult:
    res = CriterionResult(10, "stability under Neumann perturbations")

    def rho(a):
        return CosineSeries.mode(k, a, K)

    # single phase at gamma = 0
    runs = [cont.newton_solve_G(lam, 0.0, rho(a), K=K) for a in (amp, amp / 2)]
    lit = _defect(runs[0], printed=True) / amp
    cons = _defect(runs[0]) / amp
    res.add("single: |eta - (tau/sigma) cos| / |rho|", lit <= 1e-5, lit, 1e-5,
            note="printed first-order formula")
    res.add("single: |eta - (tau/(2 q_out sigma)) cos| / |rho|", cons <= 1e-5, cons, 1e-5, gating=False,
            note="first-order formula with the linearization factor")
    ratio = _defect(runs[0]) / _defect(runs[1])
    res.add("single: defect halving ratio", 3.5 <= ratio <= 4.5, ratio, "[3.5, 4.5]")
    # two phase, gamma_1 = gamma_2 = 1
    runs = [cont.newton_solve_H(lam, 1.0, 1.0, rho(a), K=K) for a in (amp, amp / 2)]
    rel = _defect(runs[0], printed=True) / amp
    res.add("two-phase: |eta - (tau/Sigma) cos| / |rho|", rel <= 1e-5, rel, 1e-5,
            note="gamma_2 = 1, so the linearization factor is 1")
    mode_only = abs(runs[0].eta.coeffs[k - 1] - runs[0].predicted_printed.coeffs[k - 1]) / amp
    res.add(f"two-phase: mode-{k} coefficient only", mode_only <= 1e-5, mode_only, 1e-5, gating=False,
            note=f"the larger part of the defect sits in modes 0 and {2 * k}")
    ratio = _defect(runs[0]) / _defect(runs[1])
    res.add("two-phase: defect halving ratio", 3.5 <= ratio <= 4.5, ratio, "[3.5, 4.5]")
    # pair problem at gamma = 0
    runs = [cont.newton_solve_calG(lam, 0.0, rho(a), None, K=K) for a in (amp, amp / 2)]
    Minv = np.linalg.inv(disp.matrix_Mk_bvp(k, lam, 0.0).matrix)
    ref = Minv @ np.array([1.0, 0.0])

    def coeffs(r):
        return np.array([r.eta.coeffs[k - 1], r.xi.coeffs[k - 1]])

    # second-order corrections land in modes 0 and 2k, so the mode-k pair is first order
    got = coeffs(runs[0]) / amp
    rel = float(np.abs(got - ref).max() / np.abs(ref).max())
    full = _defect(runs[0]) / float(np.linalg.norm(ref) * amp)
    res.add(f"pair: mode-{k} (eta, xi) vs inverse matrix", rel <= 1e-4, rel, 1e-4,
            note=f"full defect including other modes {full:.3g} relative")
    lit = np.linalg.inv(disp.matrix_Mk(k, lam, 0.0).matrix) @ np.array([1.0, 0.0])
    lit_mapped = lit * np.array([1.0, -1.0])
    rel_lit = float(np.abs(lit_mapped - ref).max() / np.abs(ref).max())
    res.add("pair: printed inverse matrix (mapped)", rel_lit <= 1e-4, rel_lit, 1e-4, gating=False)
    if rel_lit > 1e-8:
        res.discrepancies.append({
            "quantity": "pair first-order response, printed vs recomputed matrix", "k": k, "lambda": lam,
            "printed": lit_mapped.tolist(), "recomputed": ref.tolist(), "rel_diff": rel_lit,
        })
    ratio = _defect(runs[0]) / _defect(runs[1])
    res.add("pair: defect halving ratio", 3.5 <= ratio <= 4.5, ratio, "[3.5, 4.5]")
    return res


# --- 11: rigidity ------------------------------------------------------------------------


def criterion_11(lam: float = 0.5, gamma1: float = 1.0, k0: int = 2, s_end: float = 0.05,
                 n_steps: int = 10) -> CriterionResult:
    res = CriterionResult(11, "curvature decomposition and rigidity")
    from .geometry import AnnulusGeometry

    sol = ell.solve_transmission(AnnulusGeometry(lam), gamma1, 3.0)
    rep = ell.curvature_decomposition(sol)
    dev = float(np.max(np.abs(rep.curvature - 1.0)))
    res.add("trivial state: curvature = 1", dev < 1e-8, dev, 1e-8)
    res.add("trivial state: psi_nn constant", rep.psi_nn_variation < 1e-8, rep.psi_nn_variation, 1e-8)
    br = cont.trace_branch(ell.TWO_PHASE, k0, lam, gamma1=gamma1, ds=s_end / n_steps, n_steps=n_steps)
    p = br.points[-1]
    res.add(f"branch (k0={k0}) reached s={s_end:g}", abs(p.s - s_end) < 1e-12 and p.residual_sup < 1e-9,
            p.residual_sup, 1e-9)
    sol = ell.solve_transmission(AnnulusGeometry(lam, p.eta), gamma1, p.gamma)
    rep = ell.curvature_decomposition(sol)
    res.add("branch point: psi_nn variation", rep.psi_nn_variation > 1e-4, rep.psi_nn_variation, 1e-4)
    res.add("branch point: two psi_nn evaluations agree", rep.identity_residual < 1e-6,
            rep.identity_residual, 1e-6, gating=False)
    return res


CRITERIA = (
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
    criterion_7, criterion_8, criterion_9, criterion_10, criterion_11,
)


def run_all(selected=None) -> list[CriterionResult]:
    out = []
    for i, fn in enumerate(CRITERIA, start=1):
        if selected and i not in selected:
            continue
        out.append(fn())
    return out


def report(results: list[CriterionResult]) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "criteria": [r.to_dict() for r in results],
        "discrepancies": [dict(d, criterion=r.number) for r in results for d in r.discrepancies],
    }
