import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagwave.contact_wave import (
    ContactWaveSpec,
    ShootingDiverged,
    contact_profile,
    contact_residuals,
    diffusion_coefficient,
    gaussian_envelope_rate,
    ode_residual,
    profile_norms,
    solve_selfsimilar,
)
from lagwave.euler_riemann import GasParams

P = GasParams()


@pytest.fixture(scope="module")
def standard():
    spec = ContactWaveSpec.from_states(1.0, 1.1, 1.0, 0.0, P)
    return spec, solve_selfsimilar(spec)


def test_diffusion_coefficient_formula():
    p = GasParams(R=2.0, gamma=1.5, kappa=3.0)
    assert diffusion_coefficient(p, 4.0) == pytest.approx(3.0 * 4.0 * 0.5 / (1.5 * 4.0), rel=1e-15)


def test_invalid_spec_rejected():
    with pytest.raises(ValueError):
        ContactWaveSpec(1.0, -1.0, 1.0, 0.0, 0.4)


def test_zero_strength_is_exactly_constant():
    spec = ContactWaveSpec.from_states(1.0, 1.0, 1.0, 0.3, P)
    prof = solve_selfsimilar(spec)
    assert prof.constant
    x = np.linspace(-50, 50, 101)
    s = contact_profile(x, 3.0, prof, spec, P)
    np.testing.assert_array_equal(s.theta, 1.0)
    np.testing.assert_array_equal(s.u, 0.3)
    np.testing.assert_array_equal(s.v, P.R * 1.0 / 1.0)
    for f in (s.v_x, s.u_x, s.theta_x, s.theta_xx, s.u_xx, s.v_t, s.u_t, s.theta_t):
        np.testing.assert_array_equal(f, 0.0)


def test_boundary_values_and_ode_residual(standard):
    spec, prof = standard
    assert abs(prof.theta[0] - 1.0) <= 1e-10 and abs(prof.theta[-1] - 1.1) <= 1e-10
    assert ode_residual(prof) <= 1e-10
    # monotone up to the integrator noise floor in the far tails
    assert np.all(np.diff(prof.theta) >= -1e-14)
    assert np.all(prof.dtheta >= -1e-12)


def test_non_convergence_raises():
    spec = ContactWaveSpec.from_states(1.0, 2.0, 1.0, 0.0, P)
    with pytest.raises(ShootingDiverged):
        solve_selfsimilar(spec, max_iter=0)


def test_pde_evolution_oracle(standard):
    """Independent explicit finite-volume solve of theta_t = a (theta_x / theta)_x from step data."""
    spec, prof = standard
    a = spec.a
    h = 0.05
    x = np.arange(-60.0, 60.0 + h / 2, h)
    th = np.where(x < 0, 1.0, 1.1)
    th[np.abs(x) < h / 2] = 1.05
    T = 20.0
    dt = 0.4 * h * h / a
    n = int(math.ceil(T / dt))
    dt = T / n
    for _ in range(n):
        flux = a * (th[1:] - th[:-1]) / (h * 0.5 * (th[1:] + th[:-1]))
        th[1:-1] += dt / h * (flux[1:] - flux[:-1])
    # the step started at time zero corresponds to profile time t with 1 + t = T
    exact, _ = prof.evaluate(x / math.sqrt(T))
    assert np.max(np.abs(th - exact)) <= 1e-4


def test_field_compatibility_v_t_equals_u_x(standard):
    spec, prof = standard
    x = np.linspace(-40, 40, 801)
    for t in (0.0, 3.0, 50.0):
        s = contact_profile(x, t, prof, spec, P)
        np.testing.assert_allclose(s.v_t, s.u_x, rtol=0, atol=1e-13)
        np.testing.assert_allclose(P.R * s.theta / s.v, spec.p_plus, rtol=1e-14)


def test_derivatives_match_finite_differences(standard):
    spec, prof = standard
    x = np.linspace(-10, 10, 41)
    t, h, k = 2.0, 1e-4, 1e-4
    s = contact_profile(x, t, prof, spec, P)
    sp, sm = contact_profile(x + h, t, prof, spec, P), contact_profile(x - h, t, prof, spec, P)
    tp, tm = contact_profile(x, t + k, prof, spec, P), contact_profile(x, t - k, prof, spec, P)
    np.testing.assert_allclose(s.theta_x, (sp.theta - sm.theta) / (2 * h), atol=1e-8)
    np.testing.assert_allclose(s.v_x, (sp.v - sm.v) / (2 * h), atol=1e-8)
    np.testing.assert_allclose(s.u_x, (sp.u - sm.u) / (2 * h), atol=1e-8)
    np.testing.assert_allclose(s.theta_xx, (sp.theta_x - sm.theta_x) / (2 * h), atol=1e-7)
    np.testing.assert_allclose(s.u_xx, (sp.u_x - sm.u_x) / (2 * h), atol=1e-7)
    np.testing.assert_allclose(s.theta_t, (tp.theta - tm.theta) / (2 * k), atol=1e-8)
    np.testing.assert_allclose(s.u_t, (tp.u - tm.u) / (2 * k), atol=1e-8)


def test_residuals_match_finite_difference_substitution(standard):
    spec, prof = standard
    x = np.linspace(-10, 10, 21)
    t, h, k = 1.0, 1e-3, 1e-4
    r1, r2 = contact_residuals(x, t, prof, spec, P)

    def S(xx, tt):
        return contact_profile(xx, tt, prof, spec, P)

    s = S(x, t)
    u_t = (S(x, t + k).u - S(x, t - k).u) / (2 * k)
    th_t = (S(x, t + k).theta - S(x, t - k).theta) / (2 * k)
    xp, xm = x + h / 2, x - h / 2
    flux_u = lambda xx: S(xx, t).u_x / S(xx, t).v  # noqa: E731
    flux_t = lambda xx: S(xx, t).theta_x / S(xx, t).v  # noqa: E731
    press = lambda xx: P.R * S(xx, t).theta / S(xx, t).v  # noqa: E731
    fd1 = u_t + (press(xp) - press(xm)) / h - P.mu * (flux_u(xp) - flux_u(xm)) / h
    fd2 = (P.R / (P.gamma - 1) * th_t + press(x) * s.u_x - P.kappa * (flux_t(xp) - flux_t(xm)) / h
           - P.mu * s.u_x**2 / s.v)
    np.testing.assert_allclose(r1, fd1, atol=1e-6)
    np.testing.assert_allclose(r2, fd2, atol=1e-6)


def test_norms_scale_self_similarly(standard):
    spec, prof = standard
    n0, n1 = profile_norms(prof, spec, P, 0.0), profile_norms(prof, spec, P, 99.0)
    # ||d^k f / dx^k|| scales like (1+t)^(1/4 - k/2) for f = theta(x / sqrt(1+t))
    assert n1["theta_x"] == pytest.approx(n0["theta_x"] * 100.0 ** -0.25, rel=1e-10)
    assert n1["theta_xx"] == pytest.approx(n0["theta_xx"] * 100.0 ** -0.75, rel=1e-10)


def test_gaussian_envelope(standard):
    spec, prof = standard
    c_hat = gaussian_envelope_rate(prof)
    # linearised profile has rate theta / (4 a); the nonlinear one is close
    assert 0.8 * 1.0 / (4 * spec.a) < c_hat < 1.2 * 1.1 / (4 * spec.a)
    xi, d = prof.xi_grid, np.abs(prof.dtheta)
    m = d > 1e-10 * d.max()
    c1 = np.max(d[m] / (spec.delta * np.exp(-c_hat * xi[m] ** 2)))
    assert c1 < 1.0


@settings(max_examples=8)
@given(st.floats(0.5, 2.0), st.floats(0.5, 2.0))
def test_swapping_end_states_mirrors_profile(tm, tp):
    s1 = ContactWaveSpec.from_states(tm, tp, 1.0, 0.0, P)
    s2 = ContactWaveSpec.from_states(tp, tm, 1.0, 0.0, P)
    p1, p2 = solve_selfsimilar(s1), solve_selfsimilar(s2)
    xi = np.linspace(-8, 8, 33)
    np.testing.assert_allclose(p1.evaluate(xi)[0], p2.evaluate(-xi)[0], atol=1e-9)


@settings(max_examples=8)
@given(st.floats(0.5, 2.0), st.floats(0.5, 2.0))
def test_profile_between_end_states(tm, tp):
    spec = ContactWaveSpec.from_states(tm, tp, 1.0, 0.0, P)
    prof = solve_selfsimilar(spec)
    lo, hi = min(tm, tp), max(tm, tp)
    assert np.all(prof.theta >= lo - 1e-10) and np.all(prof.theta <= hi + 1e-10)
    assert ode_residual(prof) <= 1e-10
