"""Restarted GMRES with diagonal preconditioning and tangent-matrix energy probes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fem import ProblemData, Variant, as_method, element_scales
from .mesh import Mesh, element_geometry


class PreconditionerError(ValueError):
    pass


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one iterative solve.

    ``iterations`` counts inner iterations summed over restarts and
    ``residual_history`` holds the relative residual after each of them.
    """

    iterations: int
    final_relative_residual: float
    converged: bool
    residual_history: tuple = field(default_factory=tuple)


def as_csr(A) -> sp.csr_matrix:
    A = sp.csr_matrix(A, dtype=float)
    A.sum_duplicates()
    A.sort_indices()
    return A


def gmres(A, b, tol=1e-4, restart=200, max_iters=1000, precond="jacobi", x0=None):
    """Restarted GMRES with right preconditioning.

    Right preconditioning keeps the monitored residual equal to the true
    residual ``||b - A x|| / ||b||``.

    Parameters
    ----------
    A : sparse or dense (n, n)
    b : ndarray (n,)
    tol : float
        Relative residual target.
    restart : int
        Krylov dimension per cycle.
    max_iters : int
        Cap on the total number of inner iterations.
    precond : {"jacobi", "none"}

    Returns
    -------
    x : ndarray
    report : SolveReport
    """
    A = as_csr(A)
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise ValueError("dimension mismatch between A and b")
    if precond == "jacobi":
        d = A.diagonal()
        if np.any(d == 0):
            raise PreconditionerError("zero diagonal entry; Jacobi is undefined")
        minv = 1.0 / d
    elif precond in ("none", None):
        minv = np.ones(n)
    else:
        raise ValueError(f"unknown preconditioner {precond!r}")
    restart = max(1, int(restart))

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros(n), SolveReport(0, 0.0, True, ())
    r = b - A @ x
    rel = np.linalg.norm(r) / bnorm
    history = []
    total = 0
    while rel > tol and total < max_iters:
        m = min(restart, max_iters - total)
        V = np.zeros((m + 1, n))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        beta = np.linalg.norm(r)
        V[0] = r / beta
        g = np.zeros(m + 1)
        g[0] = beta
        k = 0
        for j in range(m):
            w = A @ (minv * V[j])
            # classical Gram-Schmidt, applied twice
            h = V[:j + 1] @ w
            w -= V[:j + 1].T @ h
            h2 = V[:j + 1] @ w
            w -= V[:j + 1].T @ h2
            h += h2
            hn = np.linalg.norm(w)
            H[:j + 1, j] = h
            H[j + 1, j] = hn
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            den = np.hypot(H[j, j], H[j + 1, j])
            cs[j], sn[j] = (1.0, 0.0) if den == 0 else (H[j, j] / den, H[j + 1, j] / den)
            H[j, j] = den
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            k = j + 1
            total += 1
            history.append(abs(g[j + 1]) / bnorm)
            if history[-1] <= tol or hn <= 1e-14 * beta:
                break
            V[j + 1] = w / hn
        y = np.linalg.solve(np.triu(H[:k, :k]), g[:k]) if k else np.zeros(0)
        x = x + minv * (V[:k].T @ y)
        r = b - A @ x
        rel = np.linalg.norm(r) / bnorm
    return x, SolveReport(total, float(rel), bool(rel <= tol), tuple(history))


def quadratic_form(A, c) -> float:
    """``c^T A c``."""
    c = np.asarray(c, dtype=float)
    if A.shape[0] != c.size:
        raise ValueError("dimension mismatch")
    return float(c @ (A @ c))


def analytic_energy(method, w, mesh: Mesh, data: ProblemData) -> float:
    """Closed-form tangent energy of a complex nodal field by quadrature.

    The expressions assume ``w`` vanishes on Dirichlet boundaries, a
    divergence-free velocity and a piecewise-constant ``tau`` that is equal
    on all elements; under those assumptions they equal ``c^T K c`` of the
    assembled matrix.

    Galerkin   k|grad w|^2
    SUPG       k|grad w|^2 + tau|a.grad w|^2 + 2 tau w w_r a.grad w_i
    VMS_GLS    k|grad w|^2 + tau|w w_i - a.grad w_r|^2 + tau|w w_r + a.grad w_i|^2
    ASU        -Im(w_hat)|w|^2 + (k + Re k_asu)|grad w|^2 + tau|a.grad w|^2

    The sign of the ASU mass term follows the assembled form
    ``(w, i w_hat phi)``, whose real part is ``-Im(w_hat)``.
    """
    method = as_method(method)
    w = np.asarray(w, dtype=complex)
    geo = element_geometry(mesh)
    a = data.element_velocity(mesh)
    sc = element_scales(mesh, data, method, geo, a)
    kappa, omega = data.params.kappa, data.params.omega
    we = w[mesh.elements]                                   # (ne, k)
    val = np.einsum("qk,ek->eq", geo.N, we)
    grad = np.einsum("eqkd,ek->eqd", geo.dNdx, we)
    adw = np.einsum("ed,eqd->eq", a, grad)
    wr, wi = val.real, val.imag
    gr2 = np.sum(np.abs(grad) ** 2, axis=-1)
    tau = sc.tau
    v = method.variant
    if v is Variant.GALERKIN:
        dens = kappa * gr2
    elif v is Variant.SUPG:
        dens = kappa * gr2 + tau * np.abs(adw) ** 2 + 2 * tau * omega * wr * adw.imag
    elif v is Variant.VMS_GLS:
        dens = (kappa * gr2 + tau * (omega * wi - adw.real) ** 2
                + tau * (omega * wr + adw.imag) ** 2)
    elif v is Variant.ASU:
        dens = (-sc.omega_hat.imag * np.abs(val) ** 2 + (kappa + sc.kappa_asu.real) * gr2
                + tau * np.abs(adw) ** 2)
    else:
        raise ValueError(f"no closed-form energy for {v.value}")
    return float(np.sum(dens * geo.JxW))
