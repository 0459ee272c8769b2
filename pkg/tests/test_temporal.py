import numpy as np
import pytest

from spectralcd.bench import problem_1d
from spectralcd.fem import assemble, solve_direct
from spectralcd.temporal import DivergenceError, temporal_reference_1d


def _spectral_supg(alpha, beta, N):
    mesh, data, _ = problem_1d(alpha, beta, N)
    return solve_direct(assemble(mesh, data, "SUPG"))


def test_periodic_state_matches_spectral_supg():
    # positive alpha here: the oscillating boundary is downstream of the flow
    alpha, beta, N = 2.0, 0.1, 16
    tr = temporal_reference_1d(-alpha, beta, N, steps_per_cycle=400, cycles=3)
    ref = _spectral_supg(-alpha, beta, N)
    assert np.linalg.norm(tr.amplitude - ref) / np.linalg.norm(ref) < 1e-3
    assert tr.steps == 1200 and np.isclose(tr.x[-1], 1.0)


def test_error_shrinks_with_time_step():
    ref = _spectral_supg(-1.0, 0.5, 10)
    errs = [np.linalg.norm(temporal_reference_1d(-1.0, 0.5, 10, s, 12).amplitude - ref)
            for s in (50, 100, 200)]  # enough cycles for the transient to decay
    assert errs[0] > errs[1] > errs[2]
    # second order in time
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_steady_limit_relaxes_to_steady_solution():
    tr = temporal_reference_1d(-3.0, 0.0, 12, steps_per_cycle=200, cycles=5)
    ref = _spectral_supg(-3.0, 0.0, 12)
    assert np.abs(tr.amplitude - ref).max() < 1e-6


def test_invalid_and_divergent_runs():
    with pytest.raises(ValueError):
        temporal_reference_1d(1.0, 1.0, 1)
    with pytest.raises(DivergenceError):
        temporal_reference_1d(-5.0, 0.1, 8, steps_per_cycle=20, cycles=1, blowup=1e-3)
