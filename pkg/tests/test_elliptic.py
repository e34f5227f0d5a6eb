from __future__ import annotations

import numpy as np
import pytest

from annular_euler import dispersion as disp
from annular_euler import elliptic as ell
from annular_euler.errors import ConfigError, DegenerateParameterError, GeometryError
from annular_euler.geometry import AnnulusGeometry, CosineSeries, half_grid_modes
from annular_euler.radial import neumann_constants


@pytest.mark.parametrize("gamma", [0.0, -6.0, 4.0])
@pytest.mark.parametrize("lam", [0.3, 0.5, 0.8])
def test_circular_dirichlet_matches_closed_form(lam, gamma):
    sol = ell.solve_dirichlet(AnnulusGeometry(lam), gamma)
    assert ell.closed_form_error(sol) < 1e-10
    q_out, q_in = neumann_constants(lam, gamma)
    np.testing.assert_allclose(sol.outer_trace, q_out, atol=1e-10)
    np.testing.assert_allclose(sol.inner_trace, q_in, atol=1e-9)


@pytest.mark.parametrize("gammas", [(1.0, 1.0), (1.0, 3.0), (-2.0, 0.5)])
def test_circular_transmission_matches_closed_form(gammas):
    sol = ell.solve_transmission(AnnulusGeometry(0.5), *gammas)
    assert ell.closed_form_error(sol) < 1e-10


def test_trivial_residuals_vanish():
    lam = 0.5
    z = CosineSeries.zeros(4)
    assert ell.residual_G(lam, -3.0, z).sup_norm < 1e-10
    assert ell.residual_H(lam, 1.0, 3.0, z).sup_norm < 1e-10
    out, inn = ell.residual_calG(lam, -3.0, z, z)
    assert max(out.sup_norm, inn.sup_norm) < 1e-9


def test_residual_trace_decomposition():
    r = ell.residual_G(0.5, -3.0, CosineSeries([0.0, 0.01]))
    np.testing.assert_allclose(r.reconstruct(), r.values, atol=1e-12)
    assert r.odd_content() < 1e-12
    # an even perturbation of mode 2 excites only even modes
    assert max(abs(r.coefficient(k)) for k in (1, 3, 5)) < 1e-12


def test_solution_is_resolution_independent():
    g = AnnulusGeometry(0.5, CosineSeries([0.05, 0.01]), CosineSeries([0.02, -0.01]))
    a = ell.solve_dirichlet(g, -6.0)
    b = ell.solve_dirichlet(g, -6.0, n_radial=64, n_angular=256)
    for ta, tb in ((a.outer_trace, b.outer_trace), (a.inner_trace, b.inner_trace)):
        np.testing.assert_allclose(half_grid_modes(ta, 20), half_grid_modes(tb, 20), atol=1e-9)
    assert a.interior_residual() < 1e-6


def test_perturbed_solve_is_deterministic_and_accurate():
    g = AnnulusGeometry(0.4, CosineSeries([0.0, 0.03]))
    a = ell.solve_dirichlet(g, 2.0)
    b = ell.solve_dirichlet(g, 2.0)
    assert np.array_equal(a.values, b.values)
    assert a.diagnostics["correction_estimate"] < 1e-12


@pytest.mark.parametrize("kind,gamma,direction", [
    (ell.SINGLE, -3.0, "outer"),
    (ell.TWO_PHASE, (1.0, 3.0), "outer"),
    (ell.PAIR, -3.0, "outer"),
    (ell.PAIR, -3.0, "inner"),
])
def test_shape_derivative_first_order(kind, gamma, direction):
    k = 2
    closed = ell.shape_derivative_closed(kind, k, 0.5, gamma, direction)
    h = CosineSeries.mode(k, 1.0, k)
    eta, xi = (h, None) if direction == "outer" else (None, h)
    e1 = ell.shape_derivative_fd(kind, 0.5, gamma, eta, xi, 2e-5).sup_distance(closed)
    e2 = ell.shape_derivative_fd(kind, 0.5, gamma, eta, xi, 1e-5).sup_distance(closed)
    assert 1.8 <= e1 / e2 <= 2.2
    assert e2 < 1e-3


def test_shape_derivative_argument_checks():
    with pytest.raises(ConfigError):
        ell.shape_derivative_closed(ell.SINGLE, 1, 0.5, 1.0, "inner")
    with pytest.raises(ConfigError):
        ell.shape_derivative_closed(ell.TWO_PHASE, 1, 0.5, (1.0, 1.0), "inner")
    with pytest.raises(ConfigError):
        ell.shape_derivative_closed("vortex", 1, 0.5, 1.0)


def test_transmission_restrictions():
    with pytest.raises(GeometryError):
        ell.solve_transmission(AnnulusGeometry(0.5, xi=CosineSeries([0.01])), 1.0, 1.0)
    with pytest.raises(DegenerateParameterError):
        ell.solve_transmission(AnnulusGeometry(0.5), 0.0, 1.0)
    with pytest.raises(GeometryError):
        ell.closed_form_error(ell.solve_dirichlet(AnnulusGeometry(0.5, CosineSeries([0.01])), 1.0))


def test_linearization_matches_dispersion():
    from annular_euler.verify import linearization_fd

    lam, g = 0.5, -3.0
    fd = linearization_fd(ell.SINGLE, 2, lam, g)
    assert fd == pytest.approx(disp.linearization_factor_single(lam, g) * disp.sigma_k(2, lam, g), rel=1e-5)
    M = linearization_fd(ell.PAIR, 2, lam, g)
    np.testing.assert_allclose(M, disp.matrix_Mk_bvp(2, lam, g).matrix, rtol=1e-5, atol=1e-5)


def test_curvature_decomposition_on_circle():
    sol = ell.solve_dirichlet(AnnulusGeometry(0.5), -2.0)
    rep = ell.curvature_decomposition(sol)
    np.testing.assert_allclose(rep.curvature, 1.0, atol=1e-12)
    assert rep.psi_nn_variation < 1e-9
    assert rep.identity_residual < 1e-8


def test_curvature_of_perturbed_boundary():
    eps = 0.02
    sol = ell.solve_dirichlet(AnnulusGeometry(0.5, CosineSeries([0.0, eps])), -2.0)
    rep = ell.curvature_decomposition(sol)
    # parametric curve (b cos theta, b sin theta)
    th = rep.theta
    b, db, ddb = 1 + eps * np.cos(2 * th), -2 * eps * np.sin(2 * th), -4 * eps * np.cos(2 * th)
    xp, yp = db * np.cos(th) - b * np.sin(th), db * np.sin(th) + b * np.cos(th)
    xpp = ddb * np.cos(th) - 2 * db * np.sin(th) - b * np.cos(th)
    ypp = ddb * np.sin(th) + 2 * db * np.cos(th) - b * np.sin(th)
    kappa = (xp * ypp - yp * xpp) / (xp**2 + yp**2) ** 1.5
    np.testing.assert_allclose(rep.curvature, kappa, atol=1e-12)
    assert rep.identity_residual < 1e-6
    assert rep.psi_nn_variation > 1e-3
