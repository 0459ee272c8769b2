"""Element and global assembly of the time-spectral discrete forms.

Every method is written as a complex element matrix ``Kc`` acting on the
nodal amplitudes and then mapped to the real 2x2 block form
``[[Re, -Im], [Im, Re]]`` with node-major dof ordering (``2A`` is the real
part of node ``A``, ``2A + 1`` its imaginary part).

Per quadrature point the complex integrand is a combination of five
products of test and trial functions::

    c_mm  N_A N_B          c_mc  N_A (a.grad N_B)
    c_cm  (a.grad N_A) N_B c_cc  (a.grad N_A)(a.grad N_B)
    c_kk  grad N_A . grad N_B

and the load uses ``d_m N_A q + d_c (a.grad N_A) q``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Union

import numpy as np
import scipy.sparse as sp

from . import analytic
from .mesh import Mesh, boundary_facets, element_geometry, facet_quadrature
from .numerics import Cx, PhysicalParams

Value = Union[complex, float, Callable]


class ConfigurationError(ValueError):
    pass


class AssemblyError(RuntimeError):
    pass


class Variant(str, enum.Enum):
    GALERKIN = "Galerkin"
    SUPG = "SUPG"
    VMS_GLS = "VMS_GLS"
    ASU = "ASU"
    RD_SUPG = "RD_SUPG"
    RD_VMS = "RD_VMS"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).replace("-", "_").replace("/", "_").upper()
        aliases = {"VMS": "VMS_GLS", "GLS": "VMS_GLS", "G": "GALERKIN"}
        key = aliases.get(key, key)
        for v in cls:
            if v.name == key:
                return v
        raise ConfigurationError(f"unknown method {name!r}")


@dataclass(frozen=True)
class StabilizationMethod:
    """A discrete form together with its parameter choices.

    Parameters
    ----------
    variant : Variant or str
    tau_mode : {"approx", "exact_1d"}
    omega_hat_mode : {"approx", "exact_1d"}
        Only used by ASU.
    limiter : bool or None
        Cap the ASU phase time at ``tau_max``.  ``None`` means on for 2D/3D
        meshes and off for 1D.
    """

    variant: Variant = Variant.GALERKIN
    tau_mode: str = "approx"
    omega_hat_mode: str = "approx"
    limiter: Optional[bool] = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        for name in ("tau_mode", "omega_hat_mode"):
            if getattr(self, name) not in ("approx", "exact_1d"):
                raise ConfigurationError(f"{name} must be 'approx' or 'exact_1d'")

    @property
    def name(self):
        return self.variant.value

    def check_mesh(self, mesh: Mesh):
        if mesh.kind != "line2":
            if self.variant in (Variant.RD_SUPG, Variant.RD_VMS):
                raise ConfigurationError("reconstructed-diffusion variants are 1D only")
            if "exact_1d" in (self.tau_mode, self.omega_hat_mode):
                raise ConfigurationError("exact_1d modes require a line2 mesh")

    def limiter_on(self, mesh: Mesh) -> bool:
        return (mesh.dim > 1) if self.limiter is None else bool(self.limiter)


def as_method(method) -> StabilizationMethod:
    if isinstance(method, StabilizationMethod):
        return method
    return StabilizationMethod(Variant.parse(method))


@dataclass(frozen=True)
class ProblemData:
    """Coefficients, source and boundary data of one Fourier mode.

    ``dirichlet`` and ``neumann`` map boundary-set names to a complex value or
    a callable ``f(x) -> complex`` of coordinates ``(n, d)``.  Dirichlet sets
    are applied in mapping order, so later sets win on shared nodes.
    ``velocity`` overrides ``params.velocity`` with a per-element field
    ``(n_elements, d)``.  A reaction ``s`` can be folded in by passing the
    complex frequency through the source instead; no separate path exists.
    """

    params: PhysicalParams
    source: Value = 0.0
    dirichlet: Mapping[str, Value] = field(default_factory=dict)
    neumann: Mapping[str, Value] = field(default_factory=dict)
    velocity: Optional[np.ndarray] = None

    def __post_init__(self):
        both = set(self.dirichlet) & set(self.neumann)
        if both:
            raise ConfigurationError(f"sets both Dirichlet and Neumann: {sorted(both)}")

    def element_velocity(self, mesh: Mesh) -> np.ndarray:
        if self.velocity is not None:
            v = np.asarray(self.velocity, dtype=float)
            if v.shape != (mesh.n_elements, mesh.dim):
                raise ConfigurationError("per-element velocity has the wrong shape")
            return v
        v = np.atleast_1d(np.asarray(self.params.velocity, dtype=float))
        if v.size != mesh.dim:
            raise ConfigurationError(f"velocity must have {mesh.dim} components")
        return np.broadcast_to(v, (mesh.n_elements, mesh.dim))


def _evaluate(value, x):
    """Constant or callable data at points ``x`` of shape ``(..., d)``."""
    if callable(value):
        flat = x.reshape(-1, x.shape[-1])
        return np.asarray(value(flat), dtype=complex).reshape(x.shape[:-1])
    return np.full(x.shape[:-1], complex(value))


# --------------------------------------------------------------------------
# coefficients
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ElementScales:
    """Per (element, quadrature point) stabilization quantities."""

    tau: np.ndarray
    tau_diff: np.ndarray
    omega_hat: np.ndarray
    kappa_asu: np.ndarray


def element_scales(mesh, data, method, geo=None, velocity=None) -> ElementScales:
    method = as_method(method)
    geo = element_geometry(mesh) if geo is None else geo
    a = data.element_velocity(mesh) if velocity is None else velocity
    p = data.params
    kappa, omega = p.kappa, p.omega
    aGa = np.einsum("ei,eqij,ej->eq", a, geo.G, a)
    GG = np.einsum("eqij,eqij->eq", geo.G, geo.G)
    td_inv = 3.0 * kappa * np.sqrt(GG)
    tau_diff = 1.0 / td_inv
    if method.tau_mode == "exact_1d":
        h = mesh.nodes[mesh.elements[:, 1], 0] - mesh.nodes[mesh.elements[:, 0], 0]
        t = np.array([analytic.tau_exact_1d(ai * hi / (2 * kappa), hi, ai) if ai != 0
                      else hi * hi / (12 * kappa) for ai, hi in zip(a[:, 0], h)])
        tau = np.broadcast_to(t[:, None], tau_diff.shape).copy()
    else:
        tau = analytic.tau_approx(np.sqrt(aGa), td_inv)
        tau = np.broadcast_to(tau, tau_diff.shape).copy()

    if method.variant is Variant.ASU:
        if method.omega_hat_mode == "exact_1d":
            h = mesh.nodes[mesh.elements[:, 1], 0] - mesh.nodes[mesh.elements[:, 0], 0]
            w = np.array([analytic.omega_hat_exact(ai * hi / (2 * kappa), omega * hi * hi / (6 * kappa), omega)
                          for ai, hi in zip(a[:, 0], h)])
            omega_hat = np.broadcast_to(w[:, None], tau.shape).astype(complex)
        else:
            cap = analytic.tau_max(omega, tau_diff) if method.limiter_on(mesh) else None
            omega_hat = np.asarray(analytic.omega_hat_approx(omega, tau, cap), dtype=complex)
            omega_hat = np.broadcast_to(omega_hat, tau.shape).copy()
        k_asu = 2j * omega_hat * tau_diff * kappa
    else:
        omega_hat = np.full(tau.shape, omega + 0j)
        k_asu = np.zeros(tau.shape, dtype=complex)
    return ElementScales(tau=tau, tau_diff=tau_diff, omega_hat=omega_hat, kappa_asu=k_asu)


def form_coefficients(variant, omega, kappa, sc: ElementScales):
    """Integrand coefficients ``(c_mm, c_mc, c_cm, c_cc, c_kk)`` and ``(d_m, d_c)``."""
    variant = Variant.parse(variant)
    tau = sc.tau
    one = np.ones(tau.shape, dtype=complex)
    zero = np.zeros(tau.shape, dtype=complex)
    iw = 1j * omega * one
    if variant is Variant.GALERKIN:
        c = (iw, one, zero, zero, kappa * one)
        d = (one, zero)
    elif variant in (Variant.SUPG, Variant.RD_SUPG):
        c = (iw, one, iw * tau, tau * one, kappa * one)
        d = (one, tau * one)
    elif variant in (Variant.VMS_GLS, Variant.RD_VMS):
        c = (iw + omega * omega * tau, 1.0 - iw * tau, iw * tau, tau * one, kappa * one)
        d = (1.0 - iw * tau, tau * one)
    elif variant is Variant.ASU:
        c = (1j * sc.omega_hat, one, zero, tau * one, kappa + sc.kappa_asu)
        d = (one, zero)
    else:  # pragma: no cover
        raise ConfigurationError(variant)
    return c, d


def effective_coefficients(method, omega, a, kappa, tau, tau_diff):
    """Modified ``(omega_hat, a_hat, kappa_hat)`` of a method in 1D.

    Returns the row of the modified-coefficient table: any of the four main
    methods on a uniform 1D mesh is Galerkin's method with these values.
    """
    v = Variant.parse(method.variant if isinstance(method, StabilizationMethod) else method)
    w, a, k = complex(omega), complex(a), complex(kappa)
    if v is Variant.GALERKIN:
        out = (w, a, k)
    elif v is Variant.SUPG:
        out = (w, (1 - 1j * w * tau) * a, k + a * a * tau)
    elif v is Variant.VMS_GLS:
        out = ((1 - 1j * w * tau) * w, (1 - 2j * w * tau) * a, k + a * a * tau)
    elif v is Variant.ASU:
        wh = w * complex(np.exp(1j * w * tau))
        out = (wh, a, k + 2j * wh * tau_diff * k + a * a * tau)
    else:
        raise ConfigurationError("no modified-coefficient form for RD variants")
    return tuple(Cx.of(z) for z in out)


# --------------------------------------------------------------------------
# element matrices
# --------------------------------------------------------------------------

def _element_complex(geo, a, coeffs, elements=slice(None)):
    c_mm, c_mc, c_cm, c_cc, c_kk = (c[elements] for c in coeffs)
    N = geo.N
    dN = geo.dNdx[elements]
    jw = geo.JxW[elements]
    aN = np.einsum("ed,eqkd->eqk", a[elements], dN)
    K = np.einsum("eq,qa,qb->eab", c_mm * jw, N, N)
    K += np.einsum("eq,qa,eqb->eab", c_mc * jw, N, aN)
    K += np.einsum("eq,eqa,qb->eab", c_cm * jw, aN, N)
    K += np.einsum("eq,eqa,eqb->eab", c_cc * jw, aN, aN)
    K += np.einsum("eq,eqad,eqbd->eab", c_kk * jw, dN, dN)
    return K


def complex_to_block(Kc):
    """Map complex ``(..., n, n)`` matrices to real ``(..., 2n, 2n)`` blocks."""
    Kc = np.asarray(Kc)
    n = Kc.shape[-1]
    out = np.empty(Kc.shape[:-2] + (2 * n, 2 * n))
    out[..., 0::2, 0::2] = Kc.real
    out[..., 0::2, 1::2] = -Kc.imag
    out[..., 1::2, 0::2] = Kc.imag
    out[..., 1::2, 1::2] = Kc.real
    return out


def element_matrices_complex(mesh, data, method):
    """Complex element matrices ``(n_elements, k, k)`` of a method."""
    method = as_method(method)
    method.check_mesh(mesh)
    geo = element_geometry(mesh)
    a = data.element_velocity(mesh)
    sc = element_scales(mesh, data, method, geo, a)
    coeffs, _ = form_coefficients(method.variant, data.params.omega, data.params.kappa, sc)
    return _element_complex(geo, a, coeffs)


def element_matrix(element: int, mesh: Mesh, data: ProblemData, method) -> np.ndarray:
    """Real ``2k x 2k`` block matrix of one element."""
    if not 0 <= element < mesh.n_elements:
        raise IndexError("element index out of range")
    method = as_method(method)
    method.check_mesh(mesh)
    geo = element_geometry(mesh)
    a = data.element_velocity(mesh)
    sc = element_scales(mesh, data, method, geo, a)
    coeffs, _ = form_coefficients(method.variant, data.params.omega, data.params.kappa, sc)
    return complex_to_block(_element_complex(geo, a, coeffs, [element])[0])


def gls_element_matrices_complex(mesh, data, method=None):
    """Galerkin/least-squares element matrices, built from the operator.

    The penalty ``sum_e (tau L* w, L phi)`` uses the operator
    ``L = i w + a.grad`` and its adjoint-in-time ``L* = -i w + a.grad``.  Both
    are written as coefficient pairs on ``(N, a.grad N)`` and multiplied out
    into the integrand coefficients, independently of the coefficient table.
    """
    method = StabilizationMethod(Variant.VMS_GLS, **({} if method is None else
                                 {"tau_mode": method.tau_mode}))
    geo = element_geometry(mesh)
    a = data.element_velocity(mesh)
    sc = element_scales(mesh, data, method, geo, a)
    w, k = data.params.omega, data.params.kappa
    (g_mm, g_mc, g_cm, g_cc, g_kk), _ = form_coefficients(Variant.GALERKIN, w, k, sc)
    test = (-1j * w, 1.0)    # L* w  = -i w N + a.grad N
    trial = (1j * w, 1.0)    # L phi =  i w N + a.grad N
    tau = sc.tau
    coeffs = (
        g_mm + tau * (test[0] * trial[0]),
        g_mc + tau * (test[0] * trial[1]),
        g_cm + tau * (test[1] * trial[0]),
        g_cc + tau * (test[1] * trial[1]),
        g_kk,
    )
    return _element_complex(geo, a, coeffs)


# --------------------------------------------------------------------------
# global assembly
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AssembledSystem:
    """Real block system with Dirichlet rows replaced by identity.

    ``raw`` is the matrix before boundary conditions (used for interior
    stability probes); ``complex_raw`` is its complex counterpart.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    dirichlet_mask: np.ndarray
    raw: sp.csr_matrix
    complex_raw: sp.csr_matrix
    complex_rhs: np.ndarray

    @property
    def n_nodes(self):
        return self.rhs.size // 2

    def interior_matrix(self):
        free = np.flatnonzero(~self.dirichlet_mask)
        return self.raw[free][:, free].tocsr()


def block_dofs(nodes):
    nodes = np.asarray(nodes)
    return np.column_stack([2 * nodes, 2 * nodes + 1]).ravel()


def to_real_vector(z):
    z = np.asarray(z, dtype=complex)
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def to_complex_vector(v):
    v = np.asarray(v, dtype=float)
    return v[0::2] + 1j * v[1::2]


def complex_sparse_to_block(Kc):
    """Real block sparse matrix from a complex sparse matrix (all four blocks kept)."""
    Kc = sp.coo_matrix(Kc)
    r, c, v = Kc.row, Kc.col, Kc.data
    rows = np.concatenate([2 * r, 2 * r, 2 * r + 1, 2 * r + 1])
    cols = np.concatenate([2 * c, 2 * c + 1, 2 * c, 2 * c + 1])
    vals = np.concatenate([v.real, -v.imag, v.imag, v.real])
    n = 2 * Kc.shape[0]
    out = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    out.sort_indices()
    return out


def _global_complex(mesh, Ke):
    k = Ke.shape[1]
    rows = np.repeat(mesh.elements, k, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, k)).ravel()
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(mesh.n_nodes,) * 2)
    return K.tocsr()


def rd_operator(mesh):
    """Matrices of the diffusive-flux reconstruction on a line2 mesh.

    Returns the consistent mass ``M`` and ``D_AB = (N_A, N_B')`` as dense
    arrays; ``psi = M^{-1} D phi`` is the projected derivative.
    """
    if mesh.kind != "line2":
        raise ConfigurationError("reconstruction is defined on line2 meshes only")
    geo = element_geometry(mesh)
    Me = np.einsum("eq,qa,qb->eab", geo.JxW, geo.N, geo.N)
    De = np.einsum("eq,qa,eqb->eab", geo.JxW, geo.N, geo.dNdx[..., 0])
    M = _global_complex(mesh, Me).real.toarray()
    D = _global_complex(mesh, De).real.toarray()
    return M, D


def rd_reconstruct(mesh: Mesh, field) -> np.ndarray:
    """Consistent-mass L2 projection of the derivative of a nodal field."""
    M, D = rd_operator(mesh)
    return np.linalg.solve(M, D @ np.asarray(field))


def _rd_correction(mesh, data, method, sc, a):
    """Global complex correction from the reconstructed diffusive residual."""
    geo = element_geometry(mesh)
    M, D = rd_operator(mesh)
    P = np.linalg.solve(M, D)
    k, w = data.params.kappa, data.params.omega
    dN = geo.dNdx[..., 0]
    # residual term -k psi' tested by tau a w' (both variants)
    Ke = np.einsum("eq,e,eqa,eqb->eab", -k * sc.tau * geo.JxW, a[:, 0], dN, dN)
    if method.variant is Variant.RD_VMS:
        # ... and by -i w tau w
        Ke = Ke + np.einsum("eq,qa,eqb->eab", 1j * w * k * sc.tau * geo.JxW, geo.N, dN)
    C = _global_complex(mesh, Ke.astype(complex)).toarray()
    return C @ P


def assemble(mesh: Mesh, data: ProblemData, method, deterministic: bool = True) -> AssembledSystem:
    """Global real block system with loads and boundary conditions.

    Assembly is serial in element order, so results are bit-reproducible;
    ``deterministic`` is accepted for interface compatibility.
    """
    method = as_method(method)
    method.check_mesh(mesh)
    used = np.zeros(mesh.n_nodes, dtype=bool)
    used[mesh.elements.ravel()] = True
    if not used.all():
        raise AssemblyError(f"nodes without equations: {np.flatnonzero(~used)[:10].tolist()}")
    for name in list(data.dirichlet) + list(data.neumann):
        if name not in mesh.boundary_sets:
            raise ConfigurationError(f"unknown boundary set {name!r}")

    p = data.params
    geo = element_geometry(mesh)
    a = data.element_velocity(mesh)
    sc = element_scales(mesh, data, method, geo, a)
    coeffs, (d_m, d_c) = form_coefficients(method.variant, p.omega, p.kappa, sc)
    Kc = _global_complex(mesh, _element_complex(geo, a, coeffs))
    if method.variant in (Variant.RD_SUPG, Variant.RD_VMS):
        Kc = sp.csr_matrix(Kc.toarray() + _rd_correction(mesh, data, method, sc, a))

    # loads
    F = np.zeros(mesh.n_nodes, dtype=complex)
    q = _evaluate(data.source, geo.xq)
    if np.any(q != 0):
        aN = np.einsum("ed,eqkd->eqk", a, geo.dNdx)
        fe = np.einsum("eq,qa->ea", d_m * q * geo.JxW, geo.N)
        fe += np.einsum("eq,eqa->ea", d_c * q * geo.JxW, aN)
        np.add.at(F, mesh.elements, fe)
    for name, h in data.neumann.items():
        facets = boundary_facets(mesh, name)
        if len(facets) == 0:
            continue
        Nf, wf, xf = facet_quadrature(mesh, facets)
        hv = _evaluate(h, xf)
        np.add.at(F, facets, np.einsum("fq,qa->fa", hv * wf, Nf))

    # Dirichlet values, later sets override earlier ones
    g = np.zeros(mesh.n_nodes, dtype=complex)
    dmask_nodes = np.zeros(mesh.n_nodes, dtype=bool)
    for name, val in data.dirichlet.items():
        idx = mesh.boundary_sets[name]
        g[idx] = _evaluate(val, mesh.nodes[idx])
        dmask_nodes[idx] = True

    raw = complex_sparse_to_block(Kc)
    mask = np.repeat(dmask_nodes, 2)
    gr = to_real_vector(g)
    rhs = to_real_vector(F) - raw @ np.where(mask, gr, 0.0)
    rhs[mask] = gr[mask]

    A = raw.copy()
    rows = np.repeat(np.arange(A.shape[0]), np.diff(A.indptr))
    kill = mask[rows] | mask[A.indices]
    A.data[kill] = 0.0
    A.data[kill & (rows == A.indices)] = 1.0
    return AssembledSystem(matrix=A, rhs=rhs, dirichlet_mask=mask, raw=raw,
                           complex_raw=Kc, complex_rhs=F)


def solve_direct(system: AssembledSystem) -> np.ndarray:
    """Sparse LU solve; returns the complex nodal field."""
    from scipy.sparse.linalg import spsolve
    return to_complex_vector(spsolve(system.matrix.tocsc(), system.rhs))
