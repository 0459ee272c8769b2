import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectralcd import analytic as an


def test_exact_1d_boundary_values_and_closed_form():
    assert abs(an.exact_1d(0.0, 3.0, 2.0)) < 1e-15
    assert abs(an.exact_1d(1.0, 3.0, 2.0) - 1) < 1e-14
    # steady: (e^{2Px} - 1)/(e^{2P} - 1)
    ref = math.expm1(2 * 0.5) / math.expm1(2)
    assert abs(an.exact_1d(0.5, 1.0, 0.0) - ref) < 1e-14


@pytest.mark.parametrize("P,W", [(1.0, 3.0), (-20.0, 10.0), (0.0, 5.0), (50.0, 1.0)])
def test_exact_1d_satisfies_ode(P, W):
    # i W^2 phi + 2P phi' = phi'' in x/L units, checked by central differences
    x = np.linspace(0.2, 0.8, 7)
    d = 1e-4
    f = lambda s: an.exact_1d(s, P, W)
    d1 = (f(x + d) - f(x - d)) / (2 * d)
    d2 = (f(x + d) - 2 * f(x) + f(x - d)) / d ** 2
    res = 1j * W ** 2 * f(x) + 2 * P * d1 - d2
    scale = np.abs(d2).max() + np.abs(W ** 2 * f(x)).max() + 1
    assert np.abs(res).max() / scale < 1e-5


def test_exact_1d_large_peclet_does_not_overflow():
    v = an.exact_1d(np.linspace(0, 1, 11), -1e5, 1e3)
    assert np.all(np.isfinite(v))


def test_exact_1d_degenerate_case_warns():
    with pytest.warns(an.DegenerateCaseWarning):
        assert an.exact_1d(0.25, 0.0, 0.0) == 0.25


def _tridiagonal_galerkin(N, alpha, beta):
    """Dense solve of the Galerkin nodal recurrence (row scaled by h/k)."""
    lo = -1 - alpha + 1j * beta
    di = 2 + 4j * beta
    up = -1 + alpha + 1j * beta
    A = np.zeros((N - 1, N - 1), complex)
    b = np.zeros(N - 1, complex)
    for i in range(N - 1):
        A[i, i] = di
        if i > 0:
            A[i, i - 1] = lo
        if i < N - 2:
            A[i, i + 1] = up
    b[-1] = -up
    return np.concatenate([[0], np.linalg.solve(A, b), [1]])


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 20), st.floats(0.0, 3.0), st.integers(2, 40))
def test_galerkin_nodal_matches_tridiagonal_solve(alpha, beta, N):
    if abs(1 - alpha) < 1e-3 and beta < 1e-3:
        return
    ref = _tridiagonal_galerkin(N, alpha, beta)
    got = an.galerkin_nodal_1d(np.arange(N + 1), N, alpha, beta)
    assert np.allclose(got, ref, rtol=1e-8, atol=1e-10)


def test_galerkin_nodal_index_checks():
    with pytest.raises(ValueError):
        an.galerkin_nodal_1d(11, 10, 1.0, 0.1)


def test_singular_recurrence_detected():
    # beta = i g turns the recurrence into a discrete Helmholtz problem whose
    # roots are exp(+-i theta) with cos(theta) = (1 - 2g)/(1 + g); theta = pi/N
    # is a Dirichlet eigenvalue and the nodal solution is not unique
    N = 4
    c = math.cos(math.pi / N)
    g = (1 - c) / (2 + c)
    with pytest.raises(an.SingularRecurrenceError):
        an.galerkin_nodal_1d(1, N, 0.0, 1j * g)
    # slightly off the eigenvalue the solution exists
    assert np.isfinite(an.galerkin_nodal_1d(1, N, 0.0, 1j * g * 1.01))


def test_tau_exact_steady_limits():
    h, a = 0.1, 2.0
    # diffusive limit -> h^2 / (12 k), with k = a h / (2 alpha)
    alpha = 1e-3
    assert math.isclose(an.tau_exact_1d(alpha, h, a), h * alpha / (6 * a), rel_tol=1e-6)
    # convective limit -> h / (2|a|)
    assert math.isclose(an.tau_exact_1d(1e4, h, a), h / (2 * a), rel_tol=1e-3)
    # the series branch joins continuously
    t = an.SERIES_THRESHOLD
    lo = an.tau_exact_1d(t * 0.999, h, a)
    hi = an.tau_exact_1d(t * 1.001, h, a)
    assert abs(hi - lo) / hi < 3e-3
    assert math.isclose(an.tau_exact_1d(1.0, 1.0, 1.0), 0.5 * (1 / math.tanh(1) - 1), rel_tol=1e-14)
    with pytest.raises(ZeroDivisionError):
        an.tau_exact_1d(1.0, 1.0, 0.0)


def test_tau_approx_and_limits():
    assert an.tau_approx(2.0, 0.0) == 0.5
    assert math.isclose(an.tau_1d(2.0, 1.0, 0.1), 1 / math.sqrt(40 ** 2 + 1200 ** 2))
    with pytest.raises(ValueError):
        an.tau_approx(0.0, 0.0)
    assert an.tau_max(0.0, 1.0) == math.inf
    assert math.isclose(an.tau_max(2.0, 0.5), 1 / (2 * math.pi))


def test_hat_groups_reduce_to_steady_supg():
    ah, bh = an.asu_hat_groups(2.0, 0.0)
    assert cmath.isclose(ah, math.tanh(2.0), rel_tol=1e-14)
    assert abs(bh) < 1e-15


@pytest.mark.parametrize("alpha,beta", [(0.5, 0.1), (5.0, 1.0), (50.0, 3.0), (-3.0, 0.5)])
def test_hat_groups_make_galerkin_nodally_exact(alpha, beta):
    N = 12
    ah, bh = an.asu_hat_groups(alpha, beta)
    got = an.galerkin_nodal_1d(np.arange(N + 1), N, ah, bh)
    ref = an.exact_1d(np.arange(N + 1) / N, alpha * N, math.sqrt(6 * beta) * N)
    assert np.allclose(got, ref, atol=1e-10)


def test_omega_hat_exact_matches_direct_formula_and_limits():
    alpha, beta, omega = 1.3, 0.7, 2.0
    g = cmath.sqrt(alpha ** 2 + 6j * beta)
    direct = alpha / (1j * beta) * (cmath.cosh(g) - math.cosh(alpha)) / (3 * math.sinh(alpha)) * omega
    assert cmath.isclose(an.omega_hat_exact(alpha, beta, omega), direct, rel_tol=1e-12)
    assert an.omega_hat_exact(2.0, 0.0, 3.0) == 3.0
    assert np.isfinite(an.omega_hat_exact(1000.0, 5.0, 1.0))
    assert np.isfinite(an.omega_hat_exact(0.0, 0.5, 1.0))
    # small beta: approximate and exact agree to first order
    r = an.omega_hat_exact(1.0, 1e-4, 1.0)
    assert abs(r - 1) < 1e-3


def test_omega_hat_approx_and_limiter():
    assert cmath.isclose(an.omega_hat_approx(2.0, 0.25), 2 * cmath.exp(0.5j))
    assert cmath.isclose(an.omega_hat_approx(2.0, 0.25, 0.1), 2 * cmath.exp(0.2j))
    with pytest.raises(ValueError):
        an.omega_hat_approx(1.0, -1.0)


def test_kappa_asu_forms_agree_in_1d():
    h, k, wh = 0.1, 2.0, 3.0 + 0.5j
    tau_diff = h * h / (12 * k)
    G = np.array([[4 / h ** 2]])
    assert cmath.isclose(an.kappa_asu(wh, tau_diff, k), an.kappa_asu_metric(wh, G) , rel_tol=1e-13)
    with pytest.raises(ValueError):
        an.kappa_asu(wh, 0.0, k)


def test_series_2d_boundary_values():
    P, W = 100 / (8 * math.pi), 10 ** 1.5
    s = an.SeriesSolution2D(P, W, 200)
    y = np.linspace(0.05, 0.95, 19)
    assert np.abs(s(np.zeros_like(y), y) - 1).max() < 1e-3
    assert np.abs(s(np.ones_like(y), y)).max() < 1e-3
    assert np.abs(s(y, np.ones_like(y)) - 1).max() < 1e-3
    assert np.abs(s(y, np.zeros_like(y))).max() < 1e-12
    with pytest.raises(ValueError):
        an.SeriesSolution2D(1.0, 0.0)


def test_series_2d_acceleration_matches_long_plain_sum():
    P, W = 2.0, 10.0
    pts = np.random.default_rng(3).uniform(0.05, 0.95, (30, 2))
    fast = an.SeriesSolution2D(P, W, 100)(pts[:, 0], pts[:, 1])
    s = an.SeriesSolution2D(P, W, 20000)
    s_plain = type("Plain", (an.SeriesSolution2D,), {"ACCELERATION_MAX_P": -1.0})(P, W, 20000)
    assert np.abs(fast - s_plain(pts[:, 0], pts[:, 1])).max() < 1e-5
    assert np.abs(fast - s(pts[:, 0], pts[:, 1])).max() < 1e-12


def test_series_2d_residual_small():
    s = an.SeriesSolution2D(100 / (8 * math.pi), 10 ** 1.5, 200)
    pts = np.random.default_rng(0).uniform(0.01, 0.99, (100, 2))
    assert np.abs(s.residual(pts[:, 0], pts[:, 1])).max() < 1e-6
