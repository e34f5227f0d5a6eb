from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from annular_euler.errors import ConfigError, DomainError
from annular_euler.radial import (
    RadialProfile,
    bernoulli_Q,
    bernoulli_Q_two_phase,
    degenerate_bernoulli_gamma,
    neumann_constants,
    trivial_stream,
)

lams = st.floats(0.05, 0.95)
gammas = st.floats(-50.0, 50.0)


@given(lams, gammas)
def test_single_phase_solves_the_bvp(lam, gamma):
    p = RadialProfile.single_phase(lam, gamma)
    assert trivial_stream(p, lam) == pytest.approx(1.0, abs=1e-12)
    assert trivial_stream(p, 1.0) == pytest.approx(0.0, abs=1e-12)
    r = np.linspace(lam, 1.0, 7)
    lap = trivial_stream(p, r, 2) + trivial_stream(p, r, 1) / r
    np.testing.assert_allclose(lap, gamma, atol=1e-10 * max(1.0, abs(gamma)) / lam**2)


@given(lams, gammas)
def test_neumann_constants_are_the_traces(lam, gamma):
    p = RadialProfile.single_phase(lam, gamma)
    q_out, q_in = neumann_constants(lam, gamma)
    assert q_out == pytest.approx(trivial_stream(p, 1.0, 1), abs=1e-12)
    assert q_in == pytest.approx(-trivial_stream(p, lam, 1), abs=1e-10)
    assert bernoulli_Q(lam, gamma) == pytest.approx(q_out**2, rel=1e-12, abs=1e-15)


@given(lams, st.floats(-5, 5), st.floats(-5, 5))
def test_two_phase_matching_conditions(lam, g1, g2):
    p = RadialProfile.two_phase(lam, g1, g2)
    eps = 1e-12
    assert trivial_stream(p, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert trivial_stream(p, lam - eps) == pytest.approx(trivial_stream(p, lam + eps), abs=1e-10)
    # the flux weighted by the inverse vorticity is continuous
    assert g2 * trivial_stream(p, lam - eps, 1) == pytest.approx(
        g1 * trivial_stream(p, lam + eps, 1), abs=1e-9)
    assert bernoulli_Q_two_phase(g2) == pytest.approx(trivial_stream(p, 1.0, 1) ** 2)


def test_degenerate_vorticity_kills_the_outer_velocity():
    for lam in (0.2, 0.5, 0.8):
        g = degenerate_bernoulli_gamma(lam)
        assert abs(neumann_constants(lam, g)[0]) < 1e-12


def test_domain_and_config_errors():
    p = RadialProfile.single_phase(0.5, 1.0)
    with pytest.raises(DomainError):
        trivial_stream(p, 0.4)
    with pytest.raises(DomainError):
        trivial_stream(p, 1.1)
    with pytest.raises(ConfigError):
        trivial_stream(p, 0.6, order=4)
    with pytest.raises(ConfigError):
        RadialProfile.single_phase(1.0, 1.0)
    with pytest.raises(ConfigError):
        RadialProfile("three_phase", 0.5, 1.0)
    assert RadialProfile.two_phase(0.5, 1, 2).r_min == 0.0
    assert math.isclose(trivial_stream(RadialProfile.two_phase(0.5, 1, 1), 0.0), -0.25)
