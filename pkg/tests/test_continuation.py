from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import brentq

from annular_euler import continuation as cont
from annular_euler import dispersion as disp
from annular_euler.errors import ConfigError, DegeneracyError, NotFoundError
from annular_euler.geometry import CosineSeries

K = 8


def rho2(a, k=2):
    return CosineSeries.mode(k, a, K)


def test_zero_data_gives_trivial_solution():
    r = cont.newton_solve_G(0.5, -3.0, None, K=K)
    assert r.eta.is_zero() and r.newton_iters == 0 and r.residual_sup < 1e-9
    p = cont.newton_solve_calG(0.5, 0.0, None, None, K=K)
    assert p.eta.is_zero() and p.xi.is_zero()
    assert p.bernoulli_correction == (0.0, 0.0)


def test_single_phase_stability_at_zero_vorticity():
    r = cont.newton_solve_G(0.5, 0.0, rho2(1e-3), K=K)
    assert r.residual_sup < 1e-9
    assert r.modes == (2, 4, 6, 8)
    # consistent first order: tau / (2 q_out sigma)
    assert np.linalg.norm((r.eta - r.predicted).array) <= 1e-5 * 1e-3


def test_stability_halving_protocol():
    runs = [cont.newton_solve_G(0.5, 0.0, rho2(a), K=K) for a in (1e-3, 5e-4)]
    size = runs[0].eta.sup_norm() / runs[1].eta.sup_norm()
    defect = [np.linalg.norm((r.eta - r.predicted).array) for r in runs]
    assert 1.9 <= size <= 2.1
    assert 3.5 <= defect[0] / defect[1] <= 4.5


def test_two_phase_stability():
    runs = [cont.newton_solve_H(0.5, 1.0, 3.0, rho2(a), K=K) for a in (1e-3, 5e-4)]
    defect = [np.linalg.norm((r.eta - r.predicted).array) for r in runs]
    assert all(r.residual_sup < 1e-9 for r in runs)
    assert 3.5 <= defect[0] / defect[1] <= 4.5


def test_pair_stability_matches_inverse_matrix():
    r = cont.newton_solve_calG(0.5, 0.0, rho2(1e-4), None, K=K)
    ref = np.linalg.solve(disp.matrix_Mk_bvp(2, 0.5, 0.0).matrix, [1e-4, 0.0])
    got = np.array([r.eta.coeffs[1], r.xi.coeffs[1]])
    np.testing.assert_allclose(got, ref, rtol=1e-4)
    full = np.hypot(np.linalg.norm((r.eta - r.predicted).array), np.linalg.norm((r.xi - r.predicted_xi).array))
    assert full <= 1e-4 * np.linalg.norm(ref)


def test_degeneracy_near_root_names_the_mode():
    g = disp.gamma_star_single(2, 0.5) + 1e-3
    with pytest.raises(DegeneracyError) as info:
        cont.newton_solve_G(0.5, g, rho2(1e-4), K=K)
    assert info.value.mode == 2


def test_pair_translation_mode_is_degenerate():
    with pytest.raises(DegeneracyError) as info:
        cont.newton_solve_calG(0.5, 0.0, CosineSeries.mode(1, 1e-4, K), None, K=K)
    assert info.value.mode == 1


def test_config_errors():
    with pytest.raises(ConfigError):
        cont.newton_solve_G(0.5, 0.0, rho2(1e-4), K=0)
    with pytest.raises(ConfigError):
        cont.newton_solve_G(0.5, 0.0, rho2(1e-4), K=K, tol=0.0)
    with pytest.raises(ConfigError):
        cont.ProblemSpec("two_phase", 0.5, 1.0)
    with pytest.raises(ConfigError):
        cont.trace_branch("single_phase", 0, 0.5)


def test_represented_modes_follow_the_data():
    assert cont.represented_modes(8, rho2(1.0, 3)) == [3, 6]
    assert cont.represented_modes(6, None) == [1, 2, 3, 4, 5, 6]
    assert cont.represented_modes(8, rho2(1.0, 2), rho2(1.0, 3)) == list(range(1, 9))


def test_detect_single_by_bisection():
    lam = 0.5
    found = cont.detect_bifurcation("single_phase", 1, lam, (-20.0, -5.0))
    assert found[0] == pytest.approx(disp.gamma_star_single(1, lam), abs=1e-10)
    assert cont.detect_bifurcation("single_phase", 1, lam) == [disp.gamma_star_single(1, lam)]


def test_detect_two_phase_k1_is_gamma1():
    assert cont.detect_bifurcation("two_phase", 1, 0.5, gamma1=1.7)[0] == pytest.approx(1.7, rel=1e-14)
    root = cont.detect_bifurcation("two_phase", 2, 0.5, (-0.9, -0.5), gamma1=1.0)[0]
    assert root == pytest.approx(disp.gamma2_star(2, 0.5, 1.0), abs=1e-10)


def test_detect_pair_k1_gives_both_roots():
    roots = sorted(cont.detect_bifurcation("pair", 1, 0.5))
    np.testing.assert_allclose(roots, sorted(disp.gamma_pair_k1_display(0.5)), rtol=1e-10)
    scan = sorted(cont.detect_bifurcation("pair", 1, 0.5, (-20.0, 0.0)))
    np.testing.assert_allclose(scan, roots, atol=1e-10)


def test_detect_reports_missing_roots():
    with pytest.raises(NotFoundError):
        cont.detect_bifurcation("single_phase", 1, 0.5, (0.0, 1.0))
    with pytest.raises(NotFoundError):
        cont.detect_bifurcation("pair", 1, 0.5, matrix="bvp")
    with pytest.raises(NotFoundError):
        cont.detect_bifurcation("pair", 2, 0.7, matrix="bvp")


@pytest.fixture(scope="module")
def short_branch():
    return cont.trace_branch("single_phase", 2, 0.5, ds=0.005, n_steps=4, K=K)


def test_branch_root_and_parameterization(short_branch):
    br = short_branch
    p0 = br.points[0]
    assert p0.s == 0.0 and p0.eta.is_zero()
    assert p0.gamma == pytest.approx(disp.gamma_star_single(2, 0.5), rel=1e-14)
    s = [p.s for p in br.points]
    assert all(b > a for a, b in zip(s, s[1:]))
    for p in br.points[1:]:
        assert p.eta.coeffs[1] == p.s
        assert p.residual_sup < 1e-9


def test_branch_nontriviality_report(short_branch):
    rep = cont.verify_branch_nontriviality(short_branch)
    assert rep["ok"]
    assert rep["points"][0]["trivial"]
    assert all(row["leading_mode"] == 2 for row in rep["points"][1:])


def test_gamma_varies_continuously(short_branch):
    g = np.array([p.gamma for p in short_branch.points])
    assert np.max(np.abs(np.diff(g))) < 0.1
