"""Time-marching reference for the 1D model problem.

Crank-Nicolson applied to the SUPG form of the time-dependent equation
``phi_t + a phi_x = k phi_xx`` with ``phi(0, t) = 0`` and
``phi(L, t) = cos(w t)``, starting from rest.  The Fourier amplitude is
extracted from the last simulated cycle.  Element matrices are written in
closed form so this module shares no code with the spectral assembly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class TemporalTrace:
    """Result of a time-marching run.

    x          nodal coordinates
    amplitude  complex Fourier amplitude of the last cycle (or the final
               state when ``omega == 0``)
    dt         time step
    steps      total number of steps taken
    """

    x: np.ndarray
    amplitude: np.ndarray
    dt: float
    steps: int


def _supg_matrices_1d(N, L, a, kappa, tau):
    h = L / N
    M_e = h / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
    # (tau a N_A', N_B)
    Mt_e = tau * a / 2.0 * np.array([[-1.0, -1.0], [1.0, 1.0]])
    # (N_A, a N_B')
    C_e = a / 2.0 * np.array([[-1.0, 1.0], [-1.0, 1.0]])
    D_e = (kappa + tau * a * a) / h * np.array([[1.0, -1.0], [-1.0, 1.0]])
    rows, cols, mv, kv = [], [], [], []
    for e in range(N):
        for i in range(2):
            for j in range(2):
                rows.append(e + i)
                cols.append(e + j)
                mv.append(M_e[i, j] + Mt_e[i, j])
                kv.append(C_e[i, j] + D_e[i, j])
    shape = (N + 1, N + 1)
    M = sp.csr_matrix((mv, (rows, cols)), shape=shape)
    K = sp.csr_matrix((kv, (rows, cols)), shape=shape)
    return M, K


def temporal_reference_1d(alpha, beta, N, steps_per_cycle=500, cycles=3,
                          L=1.0, kappa=1.0, tau=None, blowup=1e6):
    """Crank-Nicolson SUPG solution and its first-harmonic amplitude.

    Parameters
    ----------
    alpha, beta : float
        Element Peclet number (signed) and element Womersley group.
    N : int
        Number of elements.
    steps_per_cycle, cycles : int
        Time resolution and number of simulated periods.  With
        ``beta == 0`` the period is taken as ``L^2/kappa``.
    tau : float, optional
        Stabilization time; defaults to ``(4a^2/h^2 + 144k^2/h^4)^(-1/2)``.

    Raises
    ------
    DivergenceError
        If the field norm exceeds ``blowup``.
    """
    if N < 2 or steps_per_cycle < 2 or cycles < 1:
        raise ValueError("need N >= 2, steps_per_cycle >= 2, cycles >= 1")
    h = L / N
    a = 2.0 * kappa * alpha / h
    omega = 6.0 * kappa * beta / h ** 2
    if tau is None:
        tau = 1.0 / math.sqrt(4 * a * a / h ** 2 + 144 * kappa ** 2 / h ** 4)
    period = 2 * math.pi / omega if omega > 0 else L * L / kappa
    dt = period / steps_per_cycle
    M, K = _supg_matrices_1d(N, L, a, kappa, tau)
    lhs = (M / dt + 0.5 * K).tolil()
    rhs_op = (M / dt - 0.5 * K).tocsr()
    for node in (0, N):
        lhs.rows[node] = [node]
        lhs.data[node] = [1.0]
    solve = splu(lhs.tocsc()).solve

    phi = np.zeros(N + 1)
    total = steps_per_cycle * cycles
    acc = np.zeros(N + 1, dtype=complex)
    for n in range(1, total + 1):
        t = n * dt
        b = rhs_op @ phi
        b[0] = 0.0
        b[N] = math.cos(omega * t)
        phi = solve(b)
        if not np.all(np.isfinite(phi)) or np.linalg.norm(phi) > blowup:
            raise DivergenceError(f"time marching diverged at step {n}")
        if n > total - steps_per_cycle:
            acc += phi * np.exp(-1j * omega * t)
    amp = 2.0 * acc / steps_per_cycle if omega > 0 else phi.astype(complex)
    return TemporalTrace(x=np.linspace(0.0, L, N + 1), amplitude=amp, dt=dt, steps=total)
