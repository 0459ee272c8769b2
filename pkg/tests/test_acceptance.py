"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Tolerances and runtime limits are the required ones; nothing here is relaxed
to make a criterion pass.  Run with ``pytest tests/test_acceptance.py -v -s``
or read the ``CRITERION`` lines in the normal output.
"""

import math
import time

import numpy as np
import pytest

from spectralcd import analytic
from spectralcd.bench import (MAIN_METHODS, P_2D, W_2D, ExperimentConfig, log_grid,
                              make_method, omega_hat_errors, probe_values, problem_1d,
                              problem_3d, run_experiment, stability_report)
from spectralcd.fem import StabilizationMethod, assemble, solve_direct
from spectralcd.solver import gmres
from spectralcd.temporal import temporal_reference_1d


@pytest.fixture
def verdict(capsys):
    """Print ``CRITERION n: PASS|FAIL detail`` and fail the test if needed."""
    def _verdict(n, ok, detail, t0, limit):
        elapsed = time.perf_counter() - t0
        ok_time = elapsed < limit
        line = (f"CRITERION {n}: {'PASS' if ok and ok_time else 'FAIL'} {detail} "
                f"[{elapsed:.1f}s, limit {limit:g}s]")
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
        assert ok_time, line
    return _verdict


def _nodal(alpha, beta, N, method):
    mesh, data, _ = problem_1d(alpha, beta, N)
    return mesh, solve_direct(assemble(mesh, data, method))


def test_criterion_01_galerkin_oracle(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    N = 16
    for alpha in (0.1, 1.0, 10.0):
        for beta in (0.01, 0.1, 1.0):
            _, phi = _nodal(-alpha, beta, N, "Galerkin")
            ref = analytic.galerkin_nodal_1d(np.arange(N + 1), N, -alpha, beta)
            worst = max(worst, np.abs(phi - ref).max() / np.abs(ref).max())
    verdict(1, worst <= 1e-10, f"max relative difference {worst:.2e} (<= 1e-10)", t0, 1)


def test_criterion_02_steady_supg_nodally_exact(verdict):
    t0 = time.perf_counter()
    N, worst = 16, 0.0
    method = StabilizationMethod("SUPG", tau_mode="exact_1d")
    for alpha in (0.5, 5.0, 50.0):
        mesh, phi = _nodal(-alpha, 0.0, N, method)
        ref = analytic.exact_1d(mesh.nodes[:, 0], -alpha * N, 0.0)
        worst = max(worst, np.abs(phi - ref).max())
    verdict(2, worst <= 1e-9, f"max nodal error {worst:.2e} (<= 1e-9)", t0, 1)


def test_criterion_03_asu_nodally_exact(verdict):
    t0 = time.perf_counter()
    N, worst = 16, 0.0
    method = StabilizationMethod("ASU", tau_mode="exact_1d", omega_hat_mode="exact_1d")
    for alpha in (0.5, 5.0, 50.0):
        for beta in (0.1, 1.0, 3.0):
            mesh, phi = _nodal(-alpha, beta, N, method)
            ref = analytic.exact_1d(mesh.nodes[:, 0], -alpha * N, math.sqrt(6 * beta) * N)
            worst = max(worst, np.abs(phi - ref).max())
    verdict(3, worst <= 1e-8, f"max nodal error {worst:.2e} (<= 1e-8)", t0, 1)


def test_criterion_04_omega_hat_quality(verdict):
    t0 = time.perf_counter()
    alphas = log_grid(-1, 2, 50)
    m = [float(omega_hat_errors(alphas, b).max()) for b in (1.0, 0.1, 0.01)]
    ok = m[0] <= 0.05 and m[0] > m[1] > m[2]
    verdict(4, ok, "max |dw|/w at beta=1,0.1,0.01: " + ", ".join(f"{v:.2e}" for v in m),
            t0, 1)


def _sweep(beta, methods):
    cfg = ExperimentConfig.default("sweep1d", second=(beta,), methods=methods)
    cells = run_experiment(cfg).cells
    err = {(c.method, c.alpha_or_P): c.rel_err_sq for c in cells}
    conv = all(c.converged for c in cells)
    return cfg.grid, err, conv


def test_criterion_05_1d_ordering(verdict):
    t0 = time.perf_counter()
    grid, e, conv = _sweep(0.01, MAIN_METHODS)
    bad = []
    for al in grid:
        if al <= 1:
            if not e["ASU", al] <= e["VMS_GLS", al] <= e["SUPG", al]:
                bad.append(f"a={al:g}: ASU {e['ASU', al]:.6e} VMS {e['VMS_GLS', al]:.6e} "
                           f"SUPG {e['SUPG', al]:.6e}")
        if al >= 100:
            st = [e[m, al] for m in ("SUPG", "VMS_GLS", "ASU")]
            if max(st) > 2 * min(st) or e["Galerkin", al] < 10 * max(st):
                bad.append(f"a={al:g}: stabilized {min(st):.3e}..{max(st):.3e} "
                           f"Galerkin {e['Galerkin', al]:.3e}")
    ok = conv and not bad
    verdict(5, ok, "all orderings hold" if ok else "violations: " + "; ".join(bad), t0, 30)


def test_criterion_06_reconstructed_variants(verdict):
    t0 = time.perf_counter()
    grid, e, conv = _sweep(1.0, ("SUPG", "VMS_GLS", "RD_SUPG", "RD_VMS"))
    bad = [f"a={al:g} {rd}<{base} ({e[rd, al]:.3e}<{e[base, al]:.3e})"
           for al in grid for rd, base in (("RD_SUPG", "SUPG"), ("RD_VMS", "VMS_GLS"))
           if e[rd, al] < e[base, al]]
    ok = conv and not bad
    verdict(6, ok, "RD errors >= baseline everywhere" if ok else
            f"{len(bad)} violations: " + "; ".join(bad), t0, 30)


def test_criterion_07_series_oracle(verdict):
    t0 = time.perf_counter()
    s = analytic.SeriesSolution2D(P_2D, W_2D, 200)
    pts = np.random.default_rng(0).uniform(0, 1, (100, 2))
    res = float(np.abs(s.residual(pts[:, 0], pts[:, 1])).max())
    t = np.linspace(0.02, 0.98, 49)
    z, o = np.zeros_like(t), np.ones_like(t)
    bnd = max(np.abs(s(z, t) - 1).max(), np.abs(s(t, o) - 1).max(),
              np.abs(s(o, t)).max(), np.abs(s(t, z)).max())
    ok = res <= 1e-6 and bnd <= 1e-3
    verdict(7, ok, f"max residual {res:.2e} (<= 1e-6), boundary error {bnd:.2e} (<= 1e-3)",
            t0, 5)


def test_criterion_08_2d_case(verdict):
    t0 = time.perf_counter()
    cfg = ExperimentConfig.default("case2d")
    cells = run_experiment(cfg).cells
    err = {c.method: c.rel_err for c in cells}
    sweep = ExperimentConfig.default("case2d", grid=log_grid(0, 3, 7), second=(100.0,))
    its = {}
    for c in run_experiment(sweep).cells:
        if c.converged:
            its.setdefault(c.method, []).append(c.iters)
    mean = {m: float(np.mean(v)) for m, v in its.items()}
    acc = err["ASU"] < err["SUPG"]
    order = mean["VMS_GLS"] <= min(mean["SUPG"], mean["ASU"]) <= mean["Galerkin"]
    detail = (f"L2 ASU {err['ASU']:.4f} vs SUPG {err['SUPG']:.4f} "
              f"({'ok' if acc else 'ASU not smaller'}); mean iterations at W=100 "
              + ", ".join(f"{m} {v:.1f}" for m, v in mean.items())
              + f" ({'ordered' if order else 'not ordered'})")
    verdict(8, acc and order, detail, t0, 60)


def test_criterion_09_stability_probes(verdict):
    t0 = time.perf_counter()
    cfg = ExperimentConfig.default("stability", grid=(0.5, 10.0, 100.0), second=(0.1, 100.0),
                                   n_probes=1000)
    rep = stability_report(cfg)
    pos = all(v["min"] > 0 for k, v in rep.items() if k.startswith(("Galerkin", "VMS_GLS")))
    supg_neg = rep["SUPG | 1d alpha=10 beta=100"]["negative"]
    gap = max(v["energy_gap"] for v in rep.values())
    ok = pos and supg_neg >= 1 and gap <= 1e-9
    verdict(9, ok, f"Galerkin/VMS positive in all regimes: {pos}; SUPG negative probes at "
            f"alpha=10, beta=100: {supg_neg}; max energy gap {gap:.1e}", t0, 30)


def test_criterion_10_3d_convergence(verdict):
    t0 = time.perf_counter()
    cfg = ExperimentConfig.default("convergence", mesh_n=(16, 24, 32, 48))
    rep = run_experiment(cfg)
    slopes = rep.extra["slopes"]
    bad = [f"{k}={v:.2f}" for k, v in slopes.items()
           if not abs(v - (-2.0 if "P=10," in k else -1.0)) <= 0.25]
    detail = "slopes " + ", ".join(f"{k}={v:.2f}" for k, v in slopes.items())
    verdict(10, not bad and rep.all_converged, detail + ("" if not bad else
            f"; outside target: {', '.join(bad)}"), t0, 900)


def test_criterion_11_temporal_crosscheck(verdict):
    t0 = time.perf_counter()
    alpha, beta, N = -5.0, 0.1, 32
    tr = temporal_reference_1d(alpha, beta, N, steps_per_cycle=500, cycles=3)
    _, phi = _nodal(alpha, beta, N, "SUPG")
    rel = float(np.linalg.norm(tr.amplitude - phi) / np.linalg.norm(phi))
    verdict(11, rel <= 1e-3, f"relative difference {rel:.2e} (<= 1e-3)", t0, 30)


def test_criterion_12_asu_limiter(verdict):
    t0 = time.perf_counter()
    mesh, data, _ = problem_3d(10.0, 100.0, 30)
    out = {}
    for on in (True, False):
        system = assemble(mesh, data, make_method("ASU", limiter=on))
        _, rep = gmres(system.matrix, system.rhs, tol=1e-4, max_iters=1000)
        vals = probe_values(system.interior_matrix(), 1000, np.random.default_rng(0))
        out[on] = (rep, float(vals.min()), int(np.sum(vals <= 0)))
    (r_on, min_on, neg_on), (r_off, min_off, _) = out[True], out[False]
    ok = r_on.converged and r_on.iterations <= 1000 and neg_on == 0 and min_off < min_on
    verdict(12, ok, f"limiter on: {r_on.iterations} iterations, converged={r_on.converged}, "
            f"min probe {min_on:.3g}; limiter off: {r_off.iterations} iterations, "
            f"min probe {min_off:.3g}", t0, 300)
