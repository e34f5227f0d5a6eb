"""Command-line front end.

    annular-euler dispersion --problem single --lambda 0.1:0.9:0.1 --k 1,2,3
    annular-euler diagram --problem pair --out figs --format csv,svg
    annular-euler branch --problem single --lambda 0.5 --k 1 --steps 20 --ds 0.002
    annular-euler stability --problem pair --lambda 0.5 --gamma 0 --rho 2:1e-3
    annular-euler verify --out report

Exit codes: 0 success, 2 configuration error, 3 solver error, 4 failed verification.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from . import continuation as cont
from . import dispersion as disp
from . import verify as ver
from .elliptic import PAIR, SINGLE, TWO_PHASE
from .errors import AnnularEulerError, ConfigError, DegenerateParameterError, DomainError
from .geometry import DEFAULT_N_RADIAL, DEFAULT_N_THETA, CosineSeries
from .output import ensure_dir, line_chart, write_csv, write_json, write_svg

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4
PROBLEMS = {"single": SINGLE, "two_phase": TWO_PHASE, "pair": PAIR}
FORMATS = ("csv", "json", "svg")
THREADS_ENV = "ANNULAR_EULER_THREADS"

log = logging.getLogger("annular_euler")


@dataclass
class RunConfig:
    command: str
    problem: str = "single"
    lambdas: list[float] = field(default_factory=lambda: list(ver.LAMBDA_GRID))
    ks: list[int] = field(default_factory=lambda: list(ver.K_DIAGRAM))
    gamma: float | None = None
    gamma1: float | None = None
    modes: int = cont.DEFAULT_BRANCH_MODES
    n_radial: int = DEFAULT_N_RADIAL
    n_angular: int = DEFAULT_N_THETA
    tol: float = cont.DEFAULT_TOL
    out: str = "."
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])
    matrix: str = "printed"
    ds: float = 0.002
    steps: int = 20
    rho: dict[int, float] = field(default_factory=dict)
    rho_in: dict[int, float] = field(default_factory=dict)
    criteria: list[int] = field(default_factory=list)

    def validate(self) -> "RunConfig":
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if not self.lambdas or any(not 0.0 < lam < 1.0 for lam in self.lambdas):
            raise ConfigError("lambda values must lie in (0, 1)")
        if not self.ks or any(k < 1 for k in self.ks):
            raise ConfigError("k values must be >= 1")
        if max(self.ks) > disp.K_MAX:
            raise ConfigError(f"k values must be <= {disp.K_MAX}")
        if not self.tol > 0.0:
            raise ConfigError("tolerance must be positive")
        if self.modes < 1 or self.modes > cont.MAX_MODES:
            raise ConfigError(f"--modes must lie in 1..{cont.MAX_MODES}")
        if self.n_radial < 8 or self.n_angular < 8 or self.n_angular % 2:
            raise ConfigError("--nr must be >= 8 and --ntheta an even integer >= 8")
        if 2 * self.modes + 1 > self.n_angular:
            raise ConfigError("--ntheta too small for the requested --modes")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"unknown output format(s) {bad}; choose from {FORMATS}")
        for g in (self.gamma, self.gamma1):
            if g is not None and not math.isfinite(g):
                raise ConfigError("vorticities must be finite")
        if self.problem == "two_phase" and self.command != "verify":
            if self.gamma1 is None or self.gamma1 == 0.0:
                raise ConfigError("two-phase runs need a nonzero --gamma1")
        if self.steps < 0 or self.ds == 0.0 or not math.isfinite(self.ds):
            raise ConfigError("need --steps >= 0 and a finite nonzero --ds")
        if any(k < 1 or k > self.modes for k in list(self.rho) + list(self.rho_in)):
            raise ConfigError("rho modes must lie in 1..--modes")
        return self

    @property
    def kind(self) -> str:
        return PROBLEMS[self.problem]


# --- parsing ------------------------------------------------------------------------


def parse_floats(text: str) -> list[float]:
    """Comma list or start:stop:step (stop included)."""
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            start, stop, step = parts
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(max(n, 0))]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None


def parse_ints(text: str) -> list[int]:
    try:
        if ":" in text:
            a, b = (int(p) for p in text.split(":"))
            return list(range(a, b + 1))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse integer list {text!r}") from None


def parse_modes(text: str | None) -> dict[int, float]:
    """'2:1e-3,4:5e-4' -> {2: 1e-3, 4: 5e-4}."""
    if not text:
        return {}
    out = {}
    try:
        for item in text.split(","):
            k, a = item.split(":")
            out[int(k)] = float(a)
    except ValueError:
        raise ConfigError(f"cannot parse mode list {text!r}; expected k:amplitude,...") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="annular-euler", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, lam_default=None, k_default=None):
        sp.add_argument("--problem", choices=sorted(PROBLEMS), default="single")
        sp.add_argument("--lambda", dest="lam", default=lam_default,
                        help="comma list or start:stop:step")
        sp.add_argument("--k", default=k_default, help="comma list or a:b")
        sp.add_argument("--gamma", type=float, default=None)
        sp.add_argument("--gamma1", type=float, default=None)
        sp.add_argument("--modes", type=int, default=cont.DEFAULT_BRANCH_MODES)
        sp.add_argument("--nr", type=int, default=DEFAULT_N_RADIAL)
        sp.add_argument("--ntheta", type=int, default=DEFAULT_N_THETA)
        sp.add_argument("--tol", type=float, default=cont.DEFAULT_TOL)
        sp.add_argument("--out", default=".")
        sp.add_argument("--format", default="csv,json", help="comma list of csv, json, svg")
        sp.add_argument("-v", "--verbose", action="store_true")

    sp = sub.add_parser("dispersion", help="dispersion values and roots on a grid")
    common(sp, "0.1:0.9:0.1", "1,2,3,5,10,20,100")
    sp.add_argument("--matrix", choices=("printed", "bvp"), default="printed")
    sp = sub.add_parser("diagram", help="bifurcation vorticity against lambda")
    common(sp, "0.05:0.95:0.05", "1,2,3,5,10,20,100")
    sp.add_argument("--matrix", choices=("printed", "bvp"), default="printed")
    sp = sub.add_parser("branch", help="trace a bifurcating branch")
    common(sp, "0.5", "1")
    sp.add_argument("--ds", type=float, default=0.002)
    sp.add_argument("--steps", type=int, default=20)
    sp = sub.add_parser("stability", help="solve under perturbed Neumann data")
    common(sp, "0.5", "1")
    sp.add_argument("--rho", default="2:1e-3", help="outer perturbation, k:amplitude list")
    sp.add_argument("--rho-in", default="", help="inner perturbation (pair problem)")
    sp = sub.add_parser("verify", help="run the acceptance checks")
    common(sp, "0.5", "1")
    sp.add_argument("--criteria", default="", help="subset, e.g. 1,2,5")
    return p


def config_from_args(args) -> RunConfig:
    fmt = [f.strip() for f in args.format.split(",") if f.strip()]
    cfg = RunConfig(
        command=args.command,
        problem=args.problem,
        lambdas=parse_floats(args.lam),
        ks=parse_ints(args.k),
        gamma=args.gamma,
        gamma1=args.gamma1,
        modes=args.modes,
        n_radial=args.nr,
        n_angular=args.ntheta,
        tol=args.tol,
        out=args.out,
        formats=fmt,
    )
    cfg.matrix = getattr(args, "matrix", "printed")
    cfg.ds = getattr(args, "ds", cfg.ds)
    cfg.steps = getattr(args, "steps", cfg.steps)
    cfg.rho = parse_modes(getattr(args, "rho", ""))
    cfg.rho_in = parse_modes(getattr(args, "rho_in", ""))
    crit = getattr(args, "criteria", "")
    cfg.criteria = parse_ints(crit) if crit else []
    if any(c < 1 or c > len(ver.CRITERIA) for c in cfg.criteria):
        raise ConfigError(f"criteria must lie in 1..{len(ver.CRITERIA)}")
    return cfg.validate()


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _pool_map(fn, items):
    items = list(items)
    n = min(worker_count(), max(len(items), 1))
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _manifest(cfg: RunConfig, files: list[str], extra: dict | None = None) -> dict:
    m = {
        "tool": "annular-euler",
        "version": __version__,
        "config": asdict(cfg),
        "tolerances": {"newton": cfg.tol, "degeneracy_gap": cont.DEGENERACY_GAP, "fd_step": cont.FD_STEP},
        "resolution": {"n_radial": cfg.n_radial, "n_angular": cfg.n_angular, "modes": cfg.modes},
        "files": sorted(files),
        "discrepancies": [],
    }
    if extra:
        m.update(extra)
    return m


def _finish(cfg: RunConfig, stem: str, header, rows, extra=None, chart=None) -> list[str]:
    out = ensure_dir(cfg.out)
    files = []
    if "csv" in cfg.formats:
        write_csv(out / f"{stem}.csv", header, rows)
        files.append(f"{stem}.csv")
    if "svg" in cfg.formats and chart is not None:
        write_svg(out / f"{stem}.svg", chart)
        files.append(f"{stem}.svg")
    if "json" in cfg.formats:
        write_json(out / f"{stem}.json", _manifest(cfg, files + [f"{stem}.json"], extra))
        files.append(f"{stem}.json")
    return files


# --- commands -----------------------------------------------------------------------


def _safe(fn, *a):
    try:
        return fn(*a)
    except (DegenerateParameterError, DomainError, ZeroDivisionError):
        return float("nan")


def cmd_dispersion(cfg: RunConfig) -> int:
    cells = [(k, lam) for k in cfg.ks for lam in cfg.lambdas]
    build = disp.matrix_Mk if cfg.matrix == "printed" else disp.matrix_Mk_bvp
    g = 0.0 if cfg.gamma is None else cfg.gamma
    discrepancies = []
    if cfg.kind == SINGLE:
        header = ["k", "lambda", "gamma", "sigma_k", "dsigma_dgamma", "gamma_root"]

        def row(c):
            k, lam = c
            return (k, lam, g, disp.sigma_k(k, lam, g), disp.sigma_k_slope(k, lam), disp.gamma_star_single(k, lam))
    elif cfg.kind == TWO_PHASE:
        header = ["k", "lambda", "gamma1", "gamma2", "Sigma_k", "gamma2_root", "normalized_root"]
        g2 = cfg.gamma1 if cfg.gamma is None else cfg.gamma

        def row(c):
            k, lam = c
            r = disp.gamma2_star(k, lam, cfg.gamma1)
            return (k, lam, cfg.gamma1, g2, _safe(disp.Sigma_k, k, lam, cfg.gamma1, g2), r, r / cfg.gamma1)
    else:
        header = ["k", "lambda", "gamma", "det", "det_recomputed", "gamma_root", "gamma_root_2", "discriminant"]

        def row(c):
            k, lam = c
            roots = disp.gamma_star_pair(k, lam, build)
            a, b = (roots.gamma_star, roots.gamma_star2) if roots.real else (math.nan, math.nan)
            return (k, lam, g, build(k, lam, g).det, disp.matrix_Mk_bvp(k, lam, g).det, a, b, roots.discriminant)

        for k, lam in cells:
            d = disp.pair_matrix_discrepancy(k, lam, g)
            if d["max_rel_diff"] > 1e-8:
                discrepancies.append(d)
    rows = _pool_map(row, cells)
    _finish(cfg, "dispersion", header, rows, {"discrepancies": discrepancies})
    print(f"dispersion: {len(rows)} rows written to {cfg.out}")
    return EXIT_OK


def diagram_rows(cfg: RunConfig) -> tuple[list[str], list[tuple]]:
    cells = [(k, lam) for k in cfg.ks for lam in cfg.lambdas]
    build = disp.matrix_Mk if cfg.matrix == "printed" else disp.matrix_Mk_bvp
    if cfg.kind == SINGLE:
        return ["k", "lambda", "gamma_root"], _pool_map(
            lambda c: (c[0], c[1], disp.gamma_star_single(*c)), cells
        )
    if cfg.kind == TWO_PHASE:
        def row(c):
            r = disp.gamma2_star(c[0], c[1], cfg.gamma1)
            return (c[0], c[1], r, r / cfg.gamma1)

        return ["k", "lambda", "gamma_root", "normalized_root"], _pool_map(row, cells)

    def row(c):
        try:
            roots = disp.gamma_star_pair(c[0], c[1], build)
        except DegenerateParameterError:
            return (c[0], c[1], math.nan, math.nan)
        if not roots.real:
            return (c[0], c[1], math.nan, math.nan)
        return (c[0], c[1], roots.gamma_star, roots.gamma_star2)

    return ["k", "lambda", "gamma_root", "gamma_root_2"], _pool_map(row, cells)


def cmd_diagram(cfg: RunConfig) -> int:
    header, rows = diagram_rows(cfg)
    col = 3 if cfg.kind == TWO_PHASE else 2
    series = {}
    for k in cfg.ks:
        sel = [r for r in rows if r[0] == k]
        series[f"k={k}"] = ([r[1] for r in sel], [r[col] for r in sel])
        if cfg.kind == PAIR:
            series[f"k={k} (2nd)"] = ([r[1] for r in sel], [r[3] for r in sel])
    ylabel = "gamma_2 root / gamma_1" if cfg.kind == TWO_PHASE else "bifurcation gamma"
    ylim = (-3.0, 3.0) if cfg.kind == TWO_PHASE else (-60.0, 60.0)
    chart = line_chart(series, f"{cfg.problem} bifurcation diagram", "lambda", ylabel, ylim=ylim)
    _finish(cfg, "diagram", header, rows, chart=chart)
    print(f"diagram: {len(rows)} rows written to {cfg.out}")
    return EXIT_OK


def cmd_branch(cfg: RunConfig) -> int:
    lam, k0 = cfg.lambdas[0], cfg.ks[0]
    if len(cfg.lambdas) > 1 or len(cfg.ks) > 1:
        raise ConfigError("branch takes a single --lambda and a single --k")
    br = cont.trace_branch(
        cfg.kind, k0, lam, gamma0=cfg.gamma, ds=cfg.ds, n_steps=cfg.steps, gamma1=cfg.gamma1,
        K=cfg.modes, tol=cfg.tol, n_radial=cfg.n_radial, n_angular=cfg.n_angular,
    )
    K = br.K
    pair = cfg.kind == PAIR
    header = ["step", "s", "gamma", "residual_sup"] + [f"eta_{i}" for i in range(1, K + 1)]
    if pair:
        header += [f"xi_{i}" for i in range(1, K + 1)]
    rows = []
    for i, p in enumerate(br.points):
        row = [i, p.s, p.gamma, p.residual_sup] + list(p.eta.truncated(K).coeffs)
        if pair:
            row += list(p.xi.truncated(K).coeffs)
        rows.append(row)
    report = cont.verify_branch_nontriviality(br)
    extra = {
        "branch": {"k0": k0, "lambda": lam, "gamma0": br.gamma0, "termination": br.termination,
                   "modes": K, "log": br.log, "halving": report["halving"]},
    }
    if pair:
        extra["branch"]["xi_eta_ratio"] = br.ratio_xi_eta()[:1]
    chart = line_chart({"gamma(s)": ([p.s for p in br.points], [p.gamma for p in br.points])},
                       f"{cfg.problem} branch from mode {k0}", "s", "gamma")
    _finish(cfg, "branch", header, rows, extra, chart)
    worst = max(p.residual_sup for p in br.points)
    print(f"branch: {len(rows)} points, max residual {worst:.3e}, {br.termination}")
    if worst > cfg.tol or br.termination != "completed":
        return EXIT_SOLVER
    return EXIT_OK


def cmd_stability(cfg: RunConfig) -> int:
    lam = cfg.lambdas[0]
    K = cfg.modes
    g = 0.0 if cfg.gamma is None else cfg.gamma

    def series(d):
        if not d:
            return None
        c = np.zeros(K)
        for k, a in d.items():
            c[k - 1] = a
        return CosineSeries(c)

    rho, rho_in = series(cfg.rho), series(cfg.rho_in)
    grid = {"n_radial": cfg.n_radial, "n_angular": cfg.n_angular}
    if cfg.kind == SINGLE:
        r = cont.newton_solve_G(lam, g, rho, K=K, tol=cfg.tol, **grid)
    elif cfg.kind == TWO_PHASE:
        r = cont.newton_solve_H(lam, cfg.gamma1, cfg.gamma1 if cfg.gamma is None else g, rho, K=K,
                                tol=cfg.tol, **grid)
    else:
        r = cont.newton_solve_calG(lam, g, rho, rho_in, K=K, tol=cfg.tol, **grid)
    header = ["mode", "rho", "eta", "predicted", "predicted_printed"]
    if r.xi is not None:
        header += ["rho_in", "xi", "predicted_xi", "predicted_printed_xi"]
    rows = []
    z = CosineSeries.zeros(K)
    for k in range(1, K + 1):
        row = [k, r.rho.truncated(K).coeffs[k - 1], r.eta.truncated(K).coeffs[k - 1],
               r.predicted.truncated(K).coeffs[k - 1], r.predicted_printed.truncated(K).coeffs[k - 1]]
        if r.xi is not None:
            row += [(rho_in or z).truncated(K).coeffs[k - 1], r.xi.truncated(K).coeffs[k - 1],
                    r.predicted_xi.truncated(K).coeffs[k - 1], r.predicted_printed_xi.truncated(K).coeffs[k - 1]]
        rows.append(row)
    extra = {"stability": {"newton_iters": r.newton_iters, "residual_sup": r.residual_sup,
                           "bernoulli_correction": list(r.bernoulli_correction), "modes": list(r.modes)}}
    _finish(cfg, "stability", header, rows, extra)
    print(f"stability: {r.newton_iters} Newton iterations, residual {r.residual_sup:.3e}")
    return EXIT_OK if r.residual_sup <= cfg.tol else EXIT_SOLVER


def cmd_verify(cfg: RunConfig) -> int:
    results = ver.run_all(set(cfg.criteria) or None)
    for r in results:
        print(r.summary())
    rep = ver.report(results)
    out = ensure_dir(cfg.out)
    files = []
    if "csv" in cfg.formats:
        for r in results:
            if r.table:
                name = f"criterion_{r.number}.csv"
                write_csv(out / name, r.table["header"], r.table["rows"])
                files.append(name)
    if "json" in cfg.formats:
        write_json(out / "verify.json", _manifest(cfg, files + ["verify.json"], {
            "report": rep["criteria"], "passed": rep["passed"], "discrepancies": rep["discrepancies"],
        }))
    return EXIT_OK if rep["passed"] else EXIT_VERIFY


COMMANDS = {
    "dispersion": cmd_dispersion,
    "diagram": cmd_diagram,
    "branch": cmd_branch,
    "stability": cmd_stability,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        worker_count()
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AnnularEulerError, RuntimeError, LookupError, ValueError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
