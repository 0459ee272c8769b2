"""Estimator-style front end: configure a method, ``fit`` it to a mesh and
problem, then evaluate the finite element field anywhere in the mesh."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_complex_values, check_option, check_points, check_scalar
from .fem import StabilizationMethod, Variant, assemble, solve_direct, to_complex_vector
from .mesh import Mesh, shape_functions
from .solver import SolveReport, gmres


class SpectralCDSolver(BaseEstimator):
    """Time-spectral convection-diffusion solver with a fixed discretization.

    Parameters
    ----------
    method : str, default="ASU"
        One of Galerkin, SUPG, VMS_GLS, ASU, RD_SUPG, RD_VMS.
    tau_mode, omega_hat_mode : {"approx", "exact_1d"}
    limiter : bool or None
        ASU phase limiter; None picks the default for the mesh dimension.
    solver : {"gmres", "direct"}
    tol : float
        Relative residual target for GMRES.
    restart, max_iter : int
    precond : {"jacobi", "none"}

    Attributes
    ----------
    solution_ : ndarray of complex
        Nodal amplitudes.
    report_ : SolveReport
    system_ : AssembledSystem
    mesh_ : Mesh

    Examples
    --------
    >>> from spectralcd import uniform_1d, PhysicalParams, ProblemData
    >>> mesh = uniform_1d(16)
    >>> data = ProblemData(PhysicalParams(10.0, -5.0, 1.0),
    ...                    dirichlet={"left": 0.0, "right": 1.0})
    >>> est = SpectralCDSolver(method="VMS_GLS").fit(mesh, data)
    >>> est.predict([[1.0]]).round(12)
    array([1.+0.j])
    """

    def __init__(self, method="ASU", tau_mode="approx", omega_hat_mode="approx",
                 limiter=None, solver="gmres", tol=1e-10, restart=200, max_iter=1000,
                 precond="jacobi"):
        self.method = method
        self.tau_mode = tau_mode
        self.omega_hat_mode = omega_hat_mode
        self.limiter = limiter
        self.solver = solver
        self.tol = tol
        self.restart = restart
        self.max_iter = max_iter
        self.precond = precond

    def _method(self):
        return StabilizationMethod(Variant.parse(self.method), self.tau_mode,
                                   self.omega_hat_mode, self.limiter)

    def fit(self, mesh: Mesh, problem):
        """Assemble and solve; returns ``self``."""
        if not isinstance(mesh, Mesh):
            raise TypeError("mesh must be a Mesh")
        check_option(self.solver, "solver", ("gmres", "direct"))
        check_option(self.precond, "precond", ("jacobi", "none"))
        check_scalar(self.tol, "tol", 0.0, 1.0)
        check_scalar(self.restart, "restart", 0, integer=True)
        check_scalar(self.max_iter, "max_iter", 0, integer=True)
        system = assemble(mesh, problem, self._method())
        if self.solver == "direct":
            phi = solve_direct(system)
            res = np.linalg.norm(system.rhs - system.matrix @ _real(phi))
            rel = float(res / max(np.linalg.norm(system.rhs), 1e-300))
            report = SolveReport(1, rel, bool(np.isfinite(rel)), (rel,))
        else:
            x, report = gmres(system.matrix, system.rhs, self.tol, self.restart,
                              self.max_iter, self.precond)
            phi = to_complex_vector(x)
        self.mesh_ = mesh
        self.system_ = system
        self.solution_ = phi
        self.report_ = report
        self._locator = _Locator(mesh)
        return self

    def _check_fitted(self):
        if not hasattr(self, "solution_"):
            raise NotFittedError("call fit before predict")

    def predict(self, points):
        """Finite element field at ``points`` of shape ``(n, d)``.

        Raises
        ------
        ValueError
            If a point lies outside the mesh.
        """
        self._check_fitted()
        pts = check_points(points, self.mesh_.dim)
        elem, xi = self._locator.locate(pts)
        N, _ = shape_functions(self.mesh_.kind, xi)
        return np.einsum("nk,nk->n", N, self.solution_[self.mesh_.elements[elem]])

    def score(self, points, values):
        """``1 - ||pred - values||^2 / ||values||^2`` over the sample points."""
        pts = check_points(points, self.mesh_.dim) if hasattr(self, "mesh_") else points
        self._check_fitted()
        v = check_complex_values(values, len(pts))
        pred = self.predict(pts)
        den = np.sum(np.abs(v) ** 2)
        if den == 0:
            raise ZeroDivisionError("reference values are all zero")
        return float(1.0 - np.sum(np.abs(pred - v) ** 2) / den)


def _real(z):
    out = np.empty(2 * z.size)
    out[0::2], out[1::2] = z.real, z.imag
    return out


class _Locator:
    """Point-in-element search with parent-coordinate inversion."""

    def __init__(self, mesh: Mesh, k=16):
        self.mesh = mesh
        X = mesh.nodes[mesh.elements]
        self.X = X
        self.tree = cKDTree(X.mean(axis=1))
        self.k = min(k, mesh.n_elements)
        scale = np.ptp(mesh.nodes, axis=0).max()
        self.tol = 1e-10 * max(scale, 1.0)

    def _parent(self, e, x):
        kind = self.mesh.kind
        X = self.X[e]
        if kind == "line2":
            xi = np.array([(2 * x[0] - X[0, 0] - X[1, 0]) / (X[1, 0] - X[0, 0])])
            return xi, abs(xi[0]) <= 1 + 1e-10
        if kind == "tet4":
            T = (X[1:] - X[0]).T
            xi = np.linalg.solve(T, x - X[0])
            lam = np.append(xi, 1 - xi.sum())
            return xi, lam.min() >= -1e-10
        xi = np.zeros(2)
        for _ in range(20):
            N, dN = shape_functions("quad4", xi)
            r = N[0] @ X - x
            J = X.T @ dN[0]
            step = np.linalg.solve(J, r)
            xi = xi - step
            if np.linalg.norm(step) < 1e-14:
                break
        return xi, np.abs(xi).max() <= 1 + 1e-10

    def locate(self, pts):
        _, cand = self.tree.query(pts, k=self.k)
        cand = np.atleast_2d(cand).reshape(len(pts), -1)
        elems = np.empty(len(pts), dtype=np.int64)
        xis = np.empty((len(pts), self.mesh.dim))
        for i, x in enumerate(pts):
            for e in cand[i]:
                xi, inside = self._parent(e, x)
                if inside:
                    elems[i], xis[i] = e, xi
                    break
            else:
                raise ValueError(f"point {x.tolist()} lies outside the mesh")
        return elems, xis
