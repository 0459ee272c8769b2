"""Closed-form reference solutions and stabilization-parameter formulas.

Everything here works on plain Python/numpy complex numbers; the large
argument branches are written in exponentially scaled form so that element
Peclet numbers in the thousands do not overflow.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

# below this |alpha| the removable singularities are evaluated by series
SERIES_THRESHOLD = 1e-6


class DegenerateCaseWarning(UserWarning):
    """Raised (as a warning) when a limit case replaces the general formula."""


class SingularRecurrenceError(ArithmeticError):
    pass


def _scalar_or_array(z, like):
    if np.ndim(like) == 0:
        return complex(z)
    return np.asarray(z, dtype=complex)


# --------------------------------------------------------------------------
# 1D exact and Galerkin nodal solutions
# --------------------------------------------------------------------------

def char_roots_1d(P, W):
    """Roots ``P +/- sqrt(P^2 + i W^2)`` ordered by decreasing real part."""
    s = cmath.sqrt(P * P + 1j * W * W)
    return P + s, P - s


def exact_1d(x, P, W, L=1.0):
    """Exact amplitude of ``i w phi + a phi' = k phi''`` with phi(0)=0, phi(L)=1.

    Parameters
    ----------
    x : float or array_like
        Positions in ``[0, L]``.
    P, W : float
        Domain Peclet and Womersley numbers.

    Returns
    -------
    complex or ndarray of complex
    """
    xi = np.asarray(x, dtype=float) / L
    if P == 0 and W == 0:
        warnings.warn("P = W = 0: returning the linear diffusion profile",
                      DegenerateCaseWarning, stacklevel=2)
        return _scalar_or_array(xi + 0j, x)
    r1, r2 = char_roots_1d(P, W)
    d = r2 - r1  # Re(d) <= 0
    # (e^{r1 x} - e^{r2 x}) / (e^{r1} - e^{r2}) scaled by e^{-r1}
    num = np.exp(r1 * (xi - 1.0)) * -np.expm1(d * xi)
    den = -np.expm1(d)
    return _scalar_or_array(num / den, x)


def galerkin_roots(alpha, beta):
    """The two roots of the Galerkin nodal recurrence."""
    den = 1.0 - alpha - 1j * beta
    if den == 0:
        raise ZeroDivisionError("1 - alpha - i beta vanishes")
    s = cmath.sqrt(alpha * alpha - 3.0 * beta * beta + 6j * beta)
    return (1 + 2j * beta + s) / den, (1 + 2j * beta - s) / den


def galerkin_nodal_1d(A, N, alpha, beta):
    """Galerkin nodal values on a uniform mesh of ``N`` linear elements.

    ``alpha`` and ``beta`` may be complex, which lets the same closed form
    evaluate any method expressed through modified coefficients.
    """
    A_arr = np.asarray(A)
    if np.any(A_arr < 0) or np.any(A_arr > N):
        raise ValueError("node index out of range")
    rho1, rho2 = galerkin_roots(alpha, beta)
    if abs(rho1) < abs(rho2):
        rho1, rho2 = rho2, rho1
    q = rho2 / rho1
    den = 1.0 - q ** N
    if abs(den) < 1e-14:
        raise SingularRecurrenceError("rho1**N == rho2**N, no unique nodal solution")
    Af = A_arr.astype(float)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.exp((Af - N) * cmath.log(rho1)) * (1.0 - q ** Af) / den
    vals = np.where(A_arr == 0, 0.0, vals)
    vals = np.where(A_arr == N, 1.0, vals)
    return _scalar_or_array(vals, A)


# --------------------------------------------------------------------------
# stabilization time scales
# --------------------------------------------------------------------------

def tau_exact_1d(alpha, h, a):
    """Steady nodally exact SUPG time scale ``h/(2a) (coth a - 1/a)``."""
    if a == 0:
        raise ZeroDivisionError("tau_exact_1d requires a nonzero velocity")
    t = abs(alpha)
    if t < SERIES_THRESHOLD:
        xi = t / 3.0 - t ** 3 / 45.0
    else:
        xi = 1.0 / math.tanh(t) - 1.0 / t
    return h / (2.0 * abs(a)) * xi


def tau_approx(tau_conv_inv, tau_diff_inv):
    """Blend ``(tau_conv^-2 + tau_diff^-2)^(-1/2)`` of the two inverse scales."""
    tc = np.asarray(tau_conv_inv, dtype=float)
    td = np.asarray(tau_diff_inv, dtype=float)
    s = tc * tc + td * td
    if np.any(s <= 0):
        raise ValueError("both inverse time scales vanish; tau is unbounded")
    out = 1.0 / np.sqrt(s)
    return float(out) if out.ndim == 0 else out


def tau_1d(a, kappa, h):
    """Approximate 1D tau from ``2|a|/h`` and ``12 kappa/h^2``."""
    return tau_approx(2.0 * abs(a) / h, 12.0 * kappa / h ** 2)


def tau_max(omega, tau_diff):
    """Upper bound ``1/(pi w^2 tau_diff)`` on the ASU phase angle; inf if w = 0."""
    w = np.asarray(omega, dtype=float)
    td = np.asarray(tau_diff, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(w == 0, np.inf, 1.0 / (math.pi * w * w * td))
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# ASU groups and modified frequency
# --------------------------------------------------------------------------

def _cosh_parts(t, beta):
    """Return gamma and exp-scaled ``cosh(g) - cosh(t)``, ``cosh(t)``, ``sinh(t)``.

    All three returned hyperbolic values are multiplied by ``2 exp(-t)``;
    the difference is formed as a product of sinh terms, free of cancellation.
    """
    gamma = cmath.sqrt(t * t + 6j * beta)
    u = 0.5 * (gamma + t)
    v = 3j * beta / (gamma + t) if (gamma + t) != 0 else 0.0
    # cosh(g) - cosh(t) = 2 sinh(u) sinh(v); scaled: 2 e^{u-t} (1 - e^{-2u}) sinh(v)
    diff = 2.0 * cmath.exp(u - t) * -np.expm1(-2.0 * u) * cmath.sinh(v)
    ch = 1.0 + math.exp(-2.0 * t)
    sh = -math.expm1(-2.0 * t)
    return gamma, diff, ch, sh


def asu_hat_groups(alpha, beta):
    """Modified element groups that make linear elements nodally exact.

    Returns
    -------
    alpha_hat, beta_hat : complex
        ``alpha_hat = 3 sinh a / (cosh g + 2 cosh a)`` and
        ``i beta_hat = (cosh g - cosh a) / (cosh g + 2 cosh a)``.
    """
    t = abs(alpha)
    _, diff, ch, sh = _cosh_parts(t, beta)
    cosh_g = diff + ch
    den = cosh_g + 2.0 * ch
    if abs(den) < 1e-14:
        raise ZeroDivisionError("cosh(gamma) + 2 cosh(alpha) vanishes")
    alpha_hat = math.copysign(1.0, alpha) * 3.0 * sh / den if alpha != 0 else 0j
    i_beta_hat = diff / den
    return complex(alpha_hat), complex(-1j * i_beta_hat)


def omega_hat_ratio_exact(alpha, beta):
    """``omega_hat/omega`` from the nodally exact ASU design."""
    t = abs(alpha)
    if beta == 0:
        return 1.0 + 0j
    gamma = cmath.sqrt(t * t + 6j * beta)
    u = 0.5 * (gamma + t)
    v = 3j * beta / (gamma + t)
    sinhc_v = cmath.sinh(v) / v
    # alpha / sinh(alpha) * sinh(u), evaluated without overflow
    if t < SERIES_THRESHOLD:
        pref = (1.0 - t * t / 6.0) * cmath.sinh(u)
    else:
        pref = t * cmath.exp(u - t) * -np.expm1(-2.0 * u) / -math.expm1(-2.0 * t)
    return complex(2.0 * pref * sinhc_v / (gamma + t))


def omega_hat_exact(alpha, beta, omega):
    """Exact ASU frequency ``(a/(i b)) (cosh g - cosh a)/(3 sinh a) w``."""
    return omega * omega_hat_ratio_exact(alpha, beta)


def omega_hat_approx(omega, tau, tau_max=None):
    """``omega * exp(i omega min(tau, tau_max))``; no limit when tau_max is None."""
    w = np.asarray(omega, dtype=float)
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0):
        raise ValueError("tau must be nonnegative")
    if tau_max is not None:
        t = np.minimum(t, tau_max)
    out = w * np.exp(1j * w * t)
    return complex(out) if out.ndim == 0 else out


def kappa_asu(omega_hat, tau_diff, kappa):
    """ASU complex diffusivity ``2 i omega_hat tau_diff kappa``."""
    if np.any(np.asarray(tau_diff) <= 0):
        raise ValueError("tau_diff must be positive")
    return 2j * np.asarray(omega_hat) * tau_diff * kappa if np.ndim(omega_hat) else \
        complex(2j * omega_hat * tau_diff * kappa)


def kappa_asu_metric(omega_hat, G):
    """ASU diffusivity from the element metric: ``(2i/3) (G:G)^(-1/2) omega_hat``.

    ``G`` may be a single ``(d, d)`` tensor or a stack ``(..., d, d)``.
    """
    G = np.asarray(G, dtype=float)
    gg = np.einsum("...ij,...ij->...", G, G)
    out = (2j / 3.0) * np.asarray(omega_hat) / np.sqrt(gg)
    return complex(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# 2D series solution
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesSolution2D:
    """Truncated separation-of-variables solution on the square ``[0, L]^2``.

    Boundary data: phi = 1 on x = 0 and y = L, phi = 0 on y = 0 and x = L;
    flow along +x.
    """

    P: float
    W: float
    nterms: int = 200
    L: float = 1.0

    def __post_init__(self):
        if self.nterms < 1:
            raise ValueError("nterms must be >= 1")
        if not self.W > 0:
            raise ValueError("the series requires W > 0")

    def coefficients(self):
        n = np.arange(1, self.nterms + 1, dtype=float)
        npi = n * np.pi
        cos_npi = np.where(n % 2 == 0, 1.0, -1.0)
        a_n = 2.0 * (1.0 - cos_npi) / npi
        b_n = 2.0 * npi * cos_npi / (1j * self.W ** 2 + npi ** 2)
        s = np.sqrt(self.P ** 2 + 1j * self.W ** 2 + npi ** 2 + 0j)
        return npi, a_n, b_n, self.P + s, self.P - s

    def boundary_profile(self, eta):
        """``sinh(sqrt(i) W eta) / sinh(sqrt(i) W)`` in scaled form."""
        s = cmath.sqrt(1j) * self.W
        eta = np.asarray(eta, dtype=float)
        return np.exp(s * (eta - 1.0)) * -np.expm1(-2.0 * s * eta) / -np.expm1(-2.0 * s)

    # leading-order parts of the mode coefficients are summed in closed form
    # below this |P|; above it the asymptotic regime lies beyond any
    # practical truncation and the plain sum is used
    ACCELERATION_MAX_P = 50.0

    def _modes(self, xi, eta):
        """Mode sum and its termwise derivatives in the scaled variables."""
        npi, a_n, b_n, rp, rm = self.coefficients()
        c_n = a_n + b_n
        den = -np.expm1(rm - rp)
        A_n = (c_n - b_n * np.exp(-rp)) / den
        Bs_n = (b_n - c_n * np.exp(rm)) / den  # B_n exp(r+) in scaled form
        X = xi.reshape(-1, 1)
        em = A_n * np.exp(rm * X)
        ep = Bs_n * np.exp(rp * (X - 1.0))
        S = np.sin(npi * eta.reshape(-1, 1))
        return npi, em, ep, rm, rp, S

    def _closed_forms(self, xi, eta):
        """Closed-form sums of the leading 1/n parts of the coefficients."""
        P = self.P
        s1 = (2 / np.pi) * np.arctan2(np.sin(np.pi * eta), np.sinh(np.pi * xi))

        def s2(t):
            e = np.exp(-np.pi * t)
            return -(2 / np.pi) * np.arctan2(e * np.sin(np.pi * eta), 1 + e * np.cos(np.pi * eta))

        return np.exp(P * xi) * (s1 + s2(xi)) + np.exp(P * (xi - 1.0)) * s2(1.0 - xi)

    def __call__(self, x, y):
        xi = np.asarray(x, dtype=float) / self.L
        eta = np.asarray(y, dtype=float) / self.L
        xi, eta = np.broadcast_arrays(xi, eta)
        xi_f, eta_f = xi.ravel(), eta.ravel()
        npi, em, ep, rm, rp, S = self._modes(xi_f, eta_f)
        terms = em + ep
        out = self.boundary_profile(eta_f)
        if abs(self.P) <= self.ACCELERATION_MAX_P:
            n = np.arange(1, self.nterms + 1)
            a1 = 2.0 * (1.0 - np.where(n % 2 == 0, 1.0, -1.0)) / npi
            lead = 2.0 * np.where(n % 2 == 0, 1.0, -1.0) / npi
            X = xi_f.reshape(-1, 1)
            terms = (terms - (a1 + lead) * np.exp((self.P - npi) * X)
                     - lead * np.exp((self.P + npi) * (X - 1.0)))
            out = out + self._closed_forms(xi_f, eta_f)
        out = out + np.sum(terms * S, axis=1)
        out = out.reshape(xi.shape)
        return complex(out) if out.ndim == 0 else out

    def residual(self, x, y):
        """``i W^2 phi + 2 P phi_x - phi_xx - phi_yy`` (scaled units), termwise.

        Each retained mode is differentiated analytically, so the result
        measures how well the coded roots and profile satisfy the equation.
        """
        xi = np.atleast_1d(np.asarray(x, dtype=float)) / self.L
        eta = np.atleast_1d(np.asarray(y, dtype=float)) / self.L
        xi, eta = np.broadcast_arrays(xi, eta)
        npi, em, ep, rm, rp, S = self._modes(xi.ravel(), eta.ravel())
        s = cmath.sqrt(1j) * self.W
        V = self.boundary_profile(eta.ravel())
        iw2 = 1j * self.W ** 2
        res_v = iw2 * V - s * s * V
        op_m = iw2 + 2 * self.P * rm - rm ** 2 + npi ** 2
        op_p = iw2 + 2 * self.P * rp - rp ** 2 + npi ** 2
        res = res_v + np.sum((op_m * em + op_p * ep) * S, axis=1)
        return res.reshape(xi.shape)


def exact_2d(x, y, P, W, nterms=200, L=1.0):
    """Evaluate :class:`SeriesSolution2D` at points ``(x, y)``."""
    return SeriesSolution2D(P, W, nterms, L)(x, y)
