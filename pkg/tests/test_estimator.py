import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from spectralcd import PhysicalParams, ProblemData, SpectralCDSolver
from spectralcd.bench import problem_1d, problem_2d
from spectralcd.mesh import cylinder_tet_3d


def test_fit_predict_1d_and_params():
    mesh, data, oracle = problem_1d(-2.0, 0.1, 40)
    est = SpectralCDSolver(method="SUPG", solver="gmres", tol=1e-12).fit(mesh, data)
    assert est.report_.converged
    assert np.allclose(est.predict(mesh.nodes), est.solution_)
    x = np.linspace(0, 1, 17)[:, None]
    assert est.score(x, oracle(x)) > 0.999
    p = est.get_params()
    assert p["method"] == "SUPG" and clone(est).get_params() == p
    assert not hasattr(clone(est), "solution_")


def test_direct_and_gmres_agree():
    mesh, data, _ = problem_2d(5.0, 10.0, 6)
    a = SpectralCDSolver(method="ASU", solver="direct").fit(mesh, data)
    b = SpectralCDSolver(method="ASU", tol=1e-12).fit(mesh, data)
    assert a.report_.iterations == 1
    assert np.abs(a.solution_ - b.solution_).max() < 1e-9


def test_predict_inside_quad_and_tet_elements():
    mesh, data, _ = problem_2d(5.0, 10.0, 4)
    est = SpectralCDSolver(method="Galerkin", solver="direct").fit(mesh, data)
    pt = np.array([[0.375, 0.625]])
    near = np.flatnonzero(np.abs(mesh.nodes - pt).max(axis=1) < 0.126)
    corners = est.solution_[near]
    assert len(near) == 4
    assert np.isclose(est.predict(pt)[0], corners.mean())
    tet = cylinder_tet_3d(n_axial=4, n_radial=2)
    d3 = ProblemData(PhysicalParams(1.0, [0, 0, 1.0], 1.0),
                     dirichlet={"inlet": 1.0, "outlet": 0.0})
    e3 = SpectralCDSolver(method="VMS", solver="direct").fit(tet, d3)
    assert np.allclose(e3.predict(tet.nodes[:5]), e3.solution_[:5])
    with pytest.raises(ValueError):
        e3.predict([[1.0, 1.0, 0.5]])


def test_errors():
    mesh, data, _ = problem_1d(-1.0, 0.1, 8)
    with pytest.raises(NotFittedError):
        SpectralCDSolver().predict([[0.5]])
    with pytest.raises(ValueError):
        SpectralCDSolver(solver="lu").fit(mesh, data)
    with pytest.raises(ValueError):
        SpectralCDSolver(tol=-1).fit(mesh, data)
    with pytest.raises(TypeError):
        SpectralCDSolver().fit("mesh", data)
    est = SpectralCDSolver().fit(mesh, data)
    with pytest.raises(ValueError):
        est.predict([[0.5, 0.5]])
    with pytest.raises(ValueError):
        est.score([[0.5]], [1.0, 2.0])
