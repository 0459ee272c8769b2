"""Experiment runner: error sweeps, the 2D and 3D cases, mesh convergence,
the modified-frequency comparison and tangent-matrix stability probes."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import analytic
from .fem import (ProblemData, StabilizationMethod, Variant, assemble, solve_direct,
                  to_complex_vector)
from .mesh import Mesh, cylinder_tet_3d, element_geometry, structured_quad_2d, uniform_1d
from .numerics import PhysicalParams
from .solver import analytic_energy, gmres

EXPERIMENTS = ("omega-hat", "sweep1d", "case2d", "case3d", "convergence", "stability")
MAIN_METHODS = ("Galerkin", "SUPG", "VMS_GLS", "ASU")
CSV_FIELDS = ("experiment", "method", "alpha_or_P", "beta_or_W", "rel_err_sq",
              "rel_err", "iters", "converged", "wall_ms")
ERROR_ORDER = {"line2": 8, "quad4": 5, "tet4": 4}

P_2D = 100.0 / (8.0 * math.pi)
W_2D = 10.0 ** 1.5


def log_grid(lo_exp, hi_exp, n):
    return tuple(float(v) for v in np.logspace(lo_exp, hi_exp, n))


DEFAULTS = {
    "omega-hat": dict(grid=log_grid(-1, 2, 50), second=(1.0, 0.1, 0.01), methods=("ASU",)),
    "sweep1d": dict(grid=log_grid(0, 3, 13), second=(0.01, 0.1, 1.0), mesh_n=100, tol=1e-12),
    "case2d": dict(grid=(P_2D,), second=(W_2D,), mesh_n=10),
    "case3d": dict(grid=(10.0, 100.0, 1000.0), second=(100.0,), mesh_n=30),
    "convergence": dict(grid=(10.0, 1000.0), second=(10.0,), mesh_n=(16, 24, 32, 48, 64),
                        solver="direct", tol=1e-12),
    "stability": dict(grid=(10.0,), second=(100.0,), mesh_n=20),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep.

    ``grid`` holds element Peclet numbers for 1D experiments and domain
    Peclet numbers otherwise; ``second`` holds beta or W accordingly.
    ``mesh_n`` is the element count per direction (1D/2D), the number of
    axial layers (3D), or a sequence of those for ``convergence``.
    """

    experiment: str
    methods: tuple = MAIN_METHODS
    grid: tuple = ()
    second: tuple = ()
    mesh_n: object = None
    tol: float = 1e-4
    out: Optional[str] = None
    seed: int = 0
    deterministic: bool = True
    solver: str = "gmres"
    restart: int = 200
    max_iters: int = 1000
    limiter: Optional[bool] = None
    n_probes: int = 1000

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not 0 < self.tol < 1:
            raise ValueError("tolerance must lie in (0, 1)")
        if len(self.grid) == 0 or len(self.second) == 0 or len(self.methods) == 0:
            raise ValueError("grids and method list must be non-empty")
        if self.solver not in ("gmres", "direct"):
            raise ValueError("solver must be 'gmres' or 'direct'")

    @classmethod
    def default(cls, experiment, **overrides):
        if experiment not in DEFAULTS:
            raise ValueError(f"unknown experiment {experiment!r}")
        kw = dict(DEFAULTS[experiment])
        kw.update({k: v for k, v in overrides.items() if v is not None})
        for key in ("methods", "grid", "second"):
            if key in kw:
                kw[key] = tuple(kw[key])
        if isinstance(kw.get("mesh_n"), list):
            kw["mesh_n"] = tuple(kw["mesh_n"])
        return cls(experiment=experiment, **kw)


@dataclass
class Cell:
    experiment: str
    method: str
    alpha_or_P: float
    beta_or_W: float
    rel_err_sq: float
    rel_err: float
    iters: int
    converged: bool
    wall_ms: float

    def row(self):
        return {k: getattr(self, k) for k in CSV_FIELDS}


@dataclass
class ErrorReport:
    config: ExperimentConfig
    cells: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def all_converged(self):
        return all(c.converged for c in self.cells)

    def summary(self):
        """Config echo plus mean iterations per (method, second parameter)."""
        means = {}
        for c in self.cells:
            key = f"{c.method}@{c.beta_or_W:g}"
            entry = means.setdefault(key, {"iters": [], "diverged": 0})
            if c.converged:
                entry["iters"].append(c.iters)
            else:
                entry["diverged"] += 1
        agg = {k: {"mean_iters": float(np.mean(v["iters"])) if v["iters"] else None,
                   "diverged": v["diverged"]} for k, v in means.items()}
        cfg = asdict(self.config)
        return {"config": cfg, "mean_iterations": agg, "all_converged": self.all_converged,
                **self.extra}

    def write(self, out):
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        csv_path = out if out.suffix == ".csv" else out.with_suffix(".csv")
        with open(csv_path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
            w.writeheader()
            for c in self.cells:
                w.writerow(c.row())
        csv_path.with_suffix(".json").write_text(json.dumps(self.summary(), indent=2, default=str))
        return csv_path


# --------------------------------------------------------------------------
# error norm
# --------------------------------------------------------------------------

def interpolate(mesh: Mesh, field, order=None, chunk=20000):
    """Yield ``(xq, values, JxW)`` of a nodal field by element chunks."""
    field = np.asarray(field)
    order = ERROR_ORDER[mesh.kind] if order is None else order
    for start in range(0, mesh.n_elements, chunk):
        idx = np.arange(start, min(start + chunk, mesh.n_elements))
        geo = element_geometry(mesh, order, elements=idx)
        vals = np.einsum("qk,ek->eq", geo.N, field[mesh.elements[idx]])
        yield geo.xq, vals, geo.JxW


def l2_error(field, oracle, mesh: Mesh, order=None):
    """Relative L2 error of an interpolated nodal field against ``oracle``.

    Parameters
    ----------
    field : ndarray of complex, shape (n_nodes,)
    oracle : callable
        ``oracle(x)`` with ``x`` of shape ``(n, d)`` returns complex values.

    Returns
    -------
    rel_sq, rel : float
        ``||u_h - u||^2 / ||u||^2`` and its square root.
    """
    num = den = 0.0
    for xq, vals, jxw in interpolate(mesh, field, order):
        ex = np.asarray(oracle(xq.reshape(-1, mesh.dim)), dtype=complex).reshape(vals.shape)
        num += float(np.sum(np.abs(vals - ex) ** 2 * jxw))
        den += float(np.sum(np.abs(ex) ** 2 * jxw))
    if den == 0:
        raise ZeroDivisionError("oracle has zero L2 norm")
    return num / den, math.sqrt(num / den)


# --------------------------------------------------------------------------
# problem builders
# --------------------------------------------------------------------------

def make_method(name, limiter=None, **kw) -> StabilizationMethod:
    return StabilizationMethod(Variant.parse(name), limiter=limiter, **kw)


def problem_1d(alpha, beta, N, kappa=1.0, L=1.0):
    """Mesh, data and oracle of the 1D model problem at element groups ``(alpha, beta)``."""
    mesh = uniform_1d(N, L)
    h = L / N
    params = PhysicalParams.from_element_groups(alpha, beta, h, kappa, L)
    data = ProblemData(params, dirichlet={"left": 0.0, "right": 1.0})
    P, W = alpha * L / h, math.sqrt(6.0 * beta) * L / h
    return mesh, data, (lambda x: analytic.exact_1d(x[:, 0], P, W, L))


def dirichlet_2d(L=1.0):
    """Boundary data of the 2D case; the two discontinuous corners get 1/2."""
    def g(x):
        x0, y0 = x[:, 0], x[:, 1]
        tol = 1e-12 * L
        one = (np.abs(x0) < tol) | (np.abs(y0 - L) < tol)
        zero = (np.abs(y0) < tol) | (np.abs(x0 - L) < tol)
        return np.where(one & zero, 0.5, np.where(one, 1.0, 0.0)).astype(complex)
    return g


def problem_2d(P, W, n, kappa=1.0, L=1.0):
    mesh = structured_quad_2d(n, n, L)
    params = PhysicalParams.from_groups(P, W, kappa, L, direction=(1.0, 0.0))
    g = dirichlet_2d(L)
    data = ProblemData(params, dirichlet={s: g for s in ("left", "right", "bottom", "top")})
    series = analytic.SeriesSolution2D(P, W, 200, L)
    return mesh, data, (lambda x: series(x[:, 0], x[:, 1]))


def cylinder_for(n_axial, L=1.0):
    """Cylinder with L/D = 5 and roughly isotropic elements for ``n_axial`` layers."""
    n_radial = max(2, int(round(4 * n_axial / 30)))
    return cylinder_tet_3d(0.1 * L, L, n_axial, n_radial)


def problem_3d(P, W, n_axial=30, kappa=1.0, L=1.0, mesh=None):
    """Axial flow in the cylinder; the unit oscillation enters at the inlet.

    The exact field depends on z only: with ``x = L - z`` it is the 1D
    solution with the flow running towards ``x = 0``.
    """
    mesh = cylinder_for(n_axial, L) if mesh is None else mesh
    params = PhysicalParams.from_groups(P, W, kappa, L, direction=(0.0, 0.0, 1.0))
    data = ProblemData(params, dirichlet={"inlet": 1.0, "outlet": 0.0}, neumann={"wall": 0.0})
    return mesh, data, (lambda x: analytic.exact_1d(L - x[:, 2], -P, W, L))


def solve(system, cfg: ExperimentConfig):
    """Returns ``(complex field, iterations, converged)``; a direct solve counts as 1."""
    if cfg.solver == "direct":
        phi = solve_direct(system)
        return phi, 1, bool(np.all(np.isfinite(phi)))
    x, rep = gmres(system.matrix, system.rhs, tol=cfg.tol, restart=cfg.restart,
                   max_iters=cfg.max_iters, precond="jacobi")
    return to_complex_vector(x), rep.iterations, rep.converged


def _run_cell(cfg, name, mesh, data, oracle, a_or_p, b_or_w, experiment=None, method=None):
    t0 = time.perf_counter()
    method = make_method(name, cfg.limiter) if method is None else method
    phi, iters, ok = solve(assemble(mesh, data, method, cfg.deterministic), cfg)
    if ok:
        try:
            rel_sq, rel = l2_error(phi, oracle, mesh)
        except (ZeroDivisionError, FloatingPointError):
            rel_sq = rel = float("nan")
    else:
        rel_sq = rel = float("nan")
    ms = 1e3 * (time.perf_counter() - t0)
    return Cell(experiment or cfg.experiment, method.name, float(a_or_p), float(b_or_w),
                rel_sq, rel, int(iters), bool(ok), round(ms, 3))


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------

def omega_hat_errors(alphas, beta):
    """``|w_hat_approx - w_hat_exact| / w`` along an alpha grid at fixed beta (h = k = 1)."""
    out = []
    for al in alphas:
        a, omega = 2.0 * al, 6.0 * beta
        tau = analytic.tau_1d(a, 1.0, 1.0)
        approx = analytic.omega_hat_approx(omega, tau)
        exact = analytic.omega_hat_exact(al, beta, omega)
        out.append(abs(approx - exact) / omega)
    return np.array(out)


def run_experiment(cfg: ExperimentConfig) -> ErrorReport:
    report = ErrorReport(cfg)
    exp = cfg.experiment
    if exp == "omega-hat":
        for beta in cfg.second:
            for al, err in zip(cfg.grid, omega_hat_errors(cfg.grid, beta)):
                report.cells.append(Cell(exp, "ASU", al, beta, err * err, err, 0, True, 0.0))
    elif exp == "sweep1d":
        N = int(cfg.mesh_n or 100)
        for beta in cfg.second:
            for al in cfg.grid:
                mesh, data, oracle = problem_1d(-abs(al), beta, N)
                for name in cfg.methods:
                    report.cells.append(_run_cell(cfg, name, mesh, data, oracle, abs(al), beta))
    elif exp == "case2d":
        n = int(cfg.mesh_n or 10)
        for W in cfg.second:
            for P in cfg.grid:
                mesh, data, oracle = problem_2d(P, W, n)
                for name in cfg.methods:
                    report.cells.append(_run_cell(cfg, name, mesh, data, oracle, P, W))
    elif exp == "case3d":
        mesh = cylinder_for(int(cfg.mesh_n or 30))
        report.extra["mesh"] = {"nodes": mesh.n_nodes, "elements": mesh.n_elements}
        for W in cfg.second:
            for P in cfg.grid:
                _, data, oracle = problem_3d(P, W, mesh=mesh)
                for name in cfg.methods:
                    report.cells.append(_run_cell(cfg, name, mesh, data, oracle, P, W))
    elif exp == "convergence":
        levels = tuple(np.atleast_1d(cfg.mesh_n or DEFAULTS["convergence"]["mesh_n"]).astype(int))
        slopes = {}
        for n in levels:
            mesh = cylinder_for(int(n))
            for W in cfg.second:
                for P in cfg.grid:
                    _, data, oracle = problem_3d(P, W, mesh=mesh)
                    for name in cfg.methods:
                        report.cells.append(_run_cell(cfg, name, mesh, data, oracle, P, W,
                                                      experiment=f"convergence/n{n}"))
        for name in cfg.methods:
            for W in cfg.second:
                for P in cfg.grid:
                    errs = [c.rel_err for c in report.cells
                            if c.method == make_method(name).name and c.alpha_or_P == P
                            and c.beta_or_W == W]
                    slopes[f"{make_method(name).name}@P={P:g},W={W:g}"] = fit_slope(levels, errs)
        report.extra["levels"] = [int(n) for n in levels]
        report.extra["slopes"] = slopes
    elif exp == "stability":
        report.extra["stability"] = stability_report(cfg)
    return report


def fit_slope(levels, errors):
    """Least-squares slope of ``log(error)`` against ``log(L/h)``."""
    x = np.log(np.asarray(levels, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    if not np.all(np.isfinite(y)):
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])


# --------------------------------------------------------------------------
# stability
# --------------------------------------------------------------------------

def probe_values(A, n_probes, rng):
    """``c^T A c`` for ``n_probes`` standard normal vectors ``c``."""
    C = rng.standard_normal((A.shape[0], n_probes))
    return np.einsum("ij,ij->j", C, A @ C)


def energy_crosscheck(mesh, data, method, rng, n_fields=100):
    """Largest relative gap between the closed-form energy and ``c^T K c``."""
    system = assemble(mesh, data, method)
    A = system.interior_matrix()
    free = ~system.dirichlet_mask[0::2]
    worst = 0.0
    for _ in range(n_fields):
        c = rng.standard_normal(A.shape[0])
        w = np.zeros(mesh.n_nodes, dtype=complex)
        w[free] = to_complex_vector(c)
        q = float(c @ (A @ c))
        e = analytic_energy(method, w, mesh, data)
        worst = max(worst, abs(e - q) / max(abs(q), 1e-300))
    return worst


def stability_regimes(cfg: ExperimentConfig):
    """1D regimes from ``(grid, second)`` as ``(alpha, beta)`` pairs on ``mesh_n`` elements."""
    N = int(cfg.mesh_n or 20)
    for al in cfg.grid:
        for beta in cfg.second:
            mesh, data, _ = problem_1d(al, beta, N)
            yield f"1d alpha={al:g} beta={beta:g}", mesh, data


def stability_report(cfg: ExperimentConfig, regimes=None):
    """Min/median probe energies and the energy identity residual per method and regime."""
    rng = np.random.default_rng(cfg.seed)
    regimes = list(stability_regimes(cfg)) if regimes is None else regimes
    out = {}
    for label, mesh, data in regimes:
        for name in cfg.methods:
            method = make_method(name, cfg.limiter)
            A = assemble(mesh, data, method).interior_matrix()
            vals = probe_values(A, cfg.n_probes, rng)
            gap = (energy_crosscheck(mesh, data, method, rng)
                   if method.variant in (Variant.GALERKIN, Variant.SUPG,
                                         Variant.VMS_GLS, Variant.ASU) else None)
            out[f"{method.name} | {label}"] = {
                "min": float(vals.min()), "median": float(np.median(vals)),
                "negative": int(np.sum(vals < 0)), "energy_gap": gap,
            }
    return out
