from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annular_euler.errors import ConfigError, GeometryError
from annular_euler.geometry import (
    AnnulusGeometry,
    CosineSeries,
    angular_grid,
    chebyshev,
    dct_matrices,
    flatten,
    half_grid,
    half_grid_modes,
    project_to_cosines,
    theta_derivative_matrices,
)

coeff_lists = st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=1, max_size=12)


def test_series_evaluation_and_derivatives():
    f = CosineSeries([0.3, -0.2, 0.05])
    th = np.linspace(0.0, 2 * np.pi, 41)
    ref = 0.3 * np.cos(th) - 0.2 * np.cos(2 * th) + 0.05 * np.cos(3 * th)
    np.testing.assert_allclose(f(th), ref, atol=1e-15)
    d1 = -0.3 * np.sin(th) + 0.4 * np.sin(2 * th) - 0.15 * np.sin(3 * th)
    np.testing.assert_allclose(f(th, 1), d1, atol=1e-14)
    d2 = -0.3 * np.cos(th) + 0.8 * np.cos(2 * th) - 0.45 * np.cos(3 * th)
    np.testing.assert_allclose(f(th, 2), d2, atol=1e-14)


def test_series_arithmetic_pads_to_longest():
    a = CosineSeries([1.0])
    b = CosineSeries([0.0, 2.0])
    assert (a + b).coeffs == (1.0, 2.0)
    assert (b - a).coeffs == (-1.0, 2.0)
    assert a.scaled(3.0).coeffs == (3.0,)
    assert b.truncated(1).coeffs == (0.0,)
    assert CosineSeries.zeros(3).is_zero()
    assert CosineSeries.mode(2, 0.5, 3).coeffs == (0.0, 0.5, 0.0)


def test_series_rejects_bad_input():
    with pytest.raises(ConfigError):
        CosineSeries([])
    with pytest.raises(ConfigError):
        CosineSeries([float("nan")])
    with pytest.raises(ConfigError):
        CosineSeries.mode(4, 1.0, 3)
    with pytest.raises(ConfigError):
        CosineSeries.from_json('{"a": 1}')


@given(coeff_lists)
def test_json_round_trip(coeffs):
    f = CosineSeries(coeffs)
    assert CosineSeries.from_json(f.to_json()) == f


@given(coeff_lists)
@settings(max_examples=50)
def test_projection_round_trip(coeffs):
    f = CosineSeries(coeffs)
    n = 2 * f.K + 8
    g, mean = project_to_cosines(f(angular_grid(n)), f.K)
    assert abs(mean) < 1e-13
    np.testing.assert_allclose(g.array, f.array, atol=1e-13)


def test_projection_needs_enough_samples():
    with pytest.raises(ConfigError):
        project_to_cosines(np.zeros(6), 3)


def test_half_grid_transform_round_trip():
    M = 16
    C, Cinv = dct_matrices(M)
    np.testing.assert_allclose(Cinv @ C, np.eye(M + 1), atol=1e-13)
    f = CosineSeries([0.1, 0.0, -0.3])
    c = half_grid_modes(2.0 + f(half_grid(M)))
    np.testing.assert_allclose(c[:4], [2.0, 0.1, 0.0, -0.3], atol=1e-14)


def test_theta_derivative_matrices():
    M = 16
    th = half_grid(M)
    f = CosineSeries([0.2, 0.0, 0.4])
    T1, T2 = theta_derivative_matrices(M)
    np.testing.assert_allclose(T1 @ f(th), f(th, 1), atol=1e-13)
    np.testing.assert_allclose(T2 @ f(th), f(th, 2), atol=1e-12)


def test_chebyshev_differentiates_polynomials_exactly():
    s, D = chebyshev(12)
    assert s[0] == 0.0 and s[-1] == 1.0
    np.testing.assert_allclose(D @ s**5, 5 * s**4, atol=1e-11)


def test_geometry_validation():
    AnnulusGeometry(0.5, CosineSeries([0.1]), CosineSeries([0.1]))
    with pytest.raises(ConfigError):
        AnnulusGeometry(1.2)
    with pytest.raises(GeometryError):
        AnnulusGeometry(0.5, CosineSeries([-0.3]), CosineSeries([0.3]))
    with pytest.raises(GeometryError):
        AnnulusGeometry(0.2, xi=CosineSeries([0.3]))


def test_flattening_map_hits_both_boundaries():
    g = AnnulusGeometry(0.4, CosineSeries([0.0, 0.05]), CosineSeries([0.02]))
    fm = flatten(g, 10, 32)
    th = fm.theta
    np.testing.assert_allclose(fm.r[0], 0.4 + 0.02 * np.cos(th), atol=1e-15)
    np.testing.assert_allclose(fm.r[-1], 1.0 + 0.05 * np.cos(2 * th), atol=1e-15)
    assert fm.shape == (10, 17)
    assert np.all(fm.r_s > 0)


def test_flattening_rejects_unresolvable_grid():
    g = AnnulusGeometry(0.4, CosineSeries(np.full(10, 1e-3)))
    with pytest.raises(ConfigError):
        flatten(g, 10, 16)
    with pytest.raises(ConfigError):
        flatten(AnnulusGeometry(0.4), 10, 15)
