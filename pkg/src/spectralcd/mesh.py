"""Structured meshes (line2, quad4, tet4), parent-element shape functions,
quadrature, the element metric tensor, and a plain-text mesh format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

KINDS = ("line2", "quad4", "tet4")
DIM = {"line2": 1, "quad4": 2, "tet4": 3}
NODES_PER_ELEMENT = {"line2": 2, "quad4": 4, "tet4": 4}

# local facet connectivity, ordered so that the facet normal can be recovered
FACETS = {
    "line2": ((0,), (1,)),
    "quad4": ((0, 1), (1, 2), (2, 3), (3, 0)),
    "tet4": ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)),
}


class MeshError(ValueError):
    pass


class ElementQualityError(MeshError):
    pass


@dataclass(frozen=True)
class Mesh:
    """Nodes, connectivity and named boundary node sets.

    Arrays are made read-only on construction.
    """

    nodes: np.ndarray
    elements: np.ndarray
    kind: str
    boundary_sets: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MeshError(f"unknown element kind {self.kind!r}")
        nodes = np.array(self.nodes, dtype=float, copy=True)
        if nodes.ndim == 1:
            nodes = nodes[:, None]
        elements = np.array(self.elements, dtype=np.int64, copy=True)
        if nodes.shape[1] != DIM[self.kind]:
            raise MeshError(f"{self.kind} needs {DIM[self.kind]}D coordinates")
        if elements.ndim != 2 or elements.shape[1] != NODES_PER_ELEMENT[self.kind]:
            raise MeshError("connectivity has the wrong shape")
        if elements.size and (elements.min() < 0 or elements.max() >= len(nodes)):
            raise MeshError("connectivity references a missing node")
        sets = {}
        for name, idx in self.boundary_sets.items():
            arr = np.unique(np.asarray(idx, dtype=np.int64))
            arr.flags.writeable = False
            sets[name] = arr
        nodes.flags.writeable = False
        elements.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "boundary_sets", sets)

    @property
    def dim(self) -> int:
        return DIM[self.kind]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def element_sizes(self):
        """Cube root (or square/line root) of the element measure."""
        geo = element_geometry(self)
        vol = geo.JxW.sum(axis=1)
        if self.kind == "tet4":
            # edge length of the regular tet with the same volume
            return (6.0 * math.sqrt(2.0) * vol) ** (1.0 / 3.0)
        return vol ** (1.0 / self.dim)

    def __repr__(self):
        return (f"Mesh(kind={self.kind!r}, n_nodes={self.n_nodes}, "
                f"n_elements={self.n_elements}, sets={sorted(self.boundary_sets)})")


# --------------------------------------------------------------------------
# parent elements
# --------------------------------------------------------------------------

_QUAD_CORNERS = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)


def shape_functions(kind, xi):
    """Shape function values ``(nq, k)`` and parent gradients ``(nq, k, d)``."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if kind == "line2":
        s = xi[:, 0]
        N = np.stack([(1 - s) / 2, (1 + s) / 2], axis=1)
        dN = np.tile(np.array([[-0.5], [0.5]]), (len(s), 1, 1))
    elif kind == "quad4":
        s, t = xi[:, 0:1], xi[:, 1:2]
        cs, ct = _QUAD_CORNERS[:, 0], _QUAD_CORNERS[:, 1]
        N = (1 + s * cs) * (1 + t * ct) / 4
        dN = np.stack([cs * (1 + t * ct) / 4, ct * (1 + s * cs) / 4], axis=2)
    elif kind == "tet4":
        s, t, u = xi[:, 0], xi[:, 1], xi[:, 2]
        N = np.stack([1 - s - t - u, s, t, u], axis=1)
        ref = np.array([[-1, -1, -1], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
        dN = np.tile(ref, (len(s), 1, 1))
    else:
        raise MeshError(f"unknown element kind {kind!r}")
    return N, dN


def gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def quadrature(kind, order=None):
    """Quadrature points and weights on the parent element.

    ``order=None`` gives the assembly rule: 2-point Gauss per direction for
    line2/quad4 and the symmetric 4-point rule for tet4.  An integer ``order``
    gives a tensor Gauss rule with that many points per direction (collapsed
    onto the simplex for tet4), used for error norms.
    """
    if kind == "line2":
        x, w = gauss_legendre(order or 2)
        return x[:, None], w
    if kind == "quad4":
        x, w = gauss_legendre(order or 2)
        X, Y = np.meshgrid(x, x, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()]), np.outer(w, w).ravel()
    if kind == "tet4":
        if order is None:
            a, b = 0.5854101966249685, 0.1381966011250105
            pts = np.array([[b, b, b], [a, b, b], [b, a, b], [b, b, a]])
            return pts, np.full(4, 1.0 / 24.0)
        x, w = gauss_legendre(order)
        x = (x + 1) / 2
        w = w / 2
        U, V, Wz = np.meshgrid(x, x, x, indexing="ij")
        WU, WV, WW = np.meshgrid(w, w, w, indexing="ij")
        # Duffy collapse of the unit cube onto the unit simplex
        s = U
        t = V * (1 - U)
        u = Wz * (1 - U) * (1 - V)
        jac = (1 - U) ** 2 * (1 - V)
        pts = np.column_stack([s.ravel(), t.ravel(), u.ravel()])
        return pts, (WU * WV * WW * jac).ravel()
    raise MeshError(f"unknown element kind {kind!r}")


@dataclass(frozen=True)
class ElementGeometry:
    """Quadrature-point data for every element of a mesh.

    N      (nq, k)         shape function values
    dNdx   (ne, nq, k, d)  physical gradients
    JxW    (ne, nq)        weight times Jacobian determinant
    xq     (ne, nq, d)     physical quadrature points
    G      (ne, nq, d, d)  metric tensor (dxi/dx)^T (dxi/dx)
    """

    N: np.ndarray
    dNdx: np.ndarray
    JxW: np.ndarray
    xq: np.ndarray
    G: np.ndarray


def element_geometry(mesh: Mesh, order=None, elements=None) -> ElementGeometry:
    conn = mesh.elements if elements is None else mesh.elements[np.atleast_1d(elements)]
    pts, w = quadrature(mesh.kind, order)
    N, dN = shape_functions(mesh.kind, pts)
    X = mesh.nodes[conn]                                  # (ne, k, d)
    J = np.einsum("ekd,qkj->eqdj", X, dN)                 # dx_d / dxi_j
    det = np.linalg.det(J)
    if np.any(det <= 0):
        bad = np.unique(np.nonzero(det <= 0)[0])
        raise ElementQualityError(f"nonpositive Jacobian in elements {bad[:10].tolist()}")
    Jinv = np.linalg.inv(J)                               # dxi_j / dx_d
    dNdx = np.einsum("qkj,eqjd->eqkd", dN, Jinv)
    G = np.einsum("eqki,eqkj->eqij", Jinv, Jinv)
    xq = np.einsum("qk,ekd->eqd", N, X)
    return ElementGeometry(N=N, dNdx=dNdx, JxW=det * w, xq=xq, G=G)


def metric_tensor(mesh: Mesh, element: int, order=None) -> np.ndarray:
    """Metric tensor of one element at its quadrature points, ``(nq, d, d)``."""
    if not 0 <= element < mesh.n_elements:
        raise IndexError("element index out of range")
    return element_geometry(mesh, order, elements=[element]).G[0]


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------

def uniform_1d(N: int, L: float = 1.0) -> Mesh:
    """``N`` equal line2 elements on ``[0, L]``."""
    if N < 2:
        raise MeshError("need at least 2 elements")
    x = np.arange(N + 1) * (L / N)
    x[-1] = L
    elements = np.column_stack([np.arange(N), np.arange(1, N + 1)])
    return Mesh(x[:, None], elements, "line2", {"left": [0], "right": [N]})


def structured_quad_2d(Nx: int, Ny: int, L: float = 1.0, Ly=None) -> Mesh:
    """``Nx x Ny`` bilinear grid on ``[0, L] x [0, Ly]`` (``Ly`` defaults to ``L``)."""
    if Nx < 2 or Ny < 2:
        raise MeshError("need at least 2 elements per direction")
    Ly = L if Ly is None else Ly
    x = np.linspace(0.0, L, Nx + 1)
    y = np.linspace(0.0, Ly, Ny + 1)
    X, Y = np.meshgrid(x, y, indexing="xy")
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    nid = np.arange((Nx + 1) * (Ny + 1)).reshape(Ny + 1, Nx + 1)
    elements = np.column_stack([
        nid[:-1, :-1].ravel(), nid[:-1, 1:].ravel(),
        nid[1:, 1:].ravel(), nid[1:, :-1].ravel(),
    ])
    sets = {"bottom": nid[0, :], "top": nid[-1, :], "left": nid[:, 0], "right": nid[:, -1]}
    return Mesh(nodes, elements, "quad4", sets)


def _polar_disk(n_radial):
    """Center vertex plus rings of 6k vertices, and a CCW triangulation."""
    pts = [(0.0, 0.0)]
    rings = [[0]]
    for k in range(1, n_radial + 1):
        m = 6 * k
        ang = 2 * np.pi * np.arange(m) / m
        start = len(pts)
        pts.extend(zip(k / n_radial * np.cos(ang), k / n_radial * np.sin(ang)))
        rings.append(list(range(start, start + m)))
    pts = np.array(pts)
    tris = []
    for k in range(1, n_radial + 1):
        outer = rings[k]
        if k == 1:
            tris.extend((0, outer[j], outer[(j + 1) % 6]) for j in range(6))
            continue
        inner = rings[k - 1]
        ni, no = len(inner), len(outer)
        i = o = 0
        # advance around both rings by angle
        while i < ni or o < no:
            next_i = (i + 1) / ni if i < ni else np.inf
            next_o = (o + 1) / no if o < no else np.inf
            if next_o <= next_i:
                tris.append((inner[i % ni], outer[o % no], outer[(o + 1) % no]))
                o += 1
            else:
                tris.append((inner[i % ni], outer[o % no], inner[(i + 1) % ni]))
                i += 1
    tris = np.array(tris)
    p = pts[tris]
    area2 = ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
             - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))
    flip = area2 < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return pts, tris, rings[-1]


def cylinder_tet_3d(radius: float = 0.1, length: float = 1.0,
                    n_axial: int = 30, n_radial: int = 4) -> Mesh:
    """Tetrahedralized cylinder along +z, split from extruded prisms.

    Each prism is cut into three tets with face diagonals chosen from the
    lowest global vertex index, which keeps neighbouring prisms conforming.
    Sets: ``inlet`` (z = 0), ``outlet`` (z = length), ``wall``.
    """
    if n_axial < 4 or n_radial < 2:
        raise MeshError("need n_axial >= 4 and n_radial >= 2")
    disk, tris, rim = _polar_disk(n_radial)
    nd = len(disk)
    z = np.linspace(0.0, length, n_axial + 1)
    nodes = np.column_stack([
        np.tile(disk[:, 0] * radius, n_axial + 1),
        np.tile(disk[:, 1] * radius, n_axial + 1),
        np.repeat(z, nd),
    ])
    tris_sorted = np.sort(tris, axis=1)
    tets = []
    for layer in range(n_axial):
        a, b, c = (tris_sorted[:, j] + layer * nd for j in range(3))
        a2, b2, c2 = a + nd, b + nd, c + nd
        tets.append(np.column_stack([a, b, c, c2]))
        tets.append(np.column_stack([a, b, b2, c2]))
        tets.append(np.column_stack([a, a2, b2, c2]))
    tets = np.vstack(tets)
    p = nodes[tets]
    vol6 = np.einsum("ij,ij->i", np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), p[:, 3] - p[:, 0])
    tets[vol6 < 0] = tets[vol6 < 0][:, [0, 2, 1, 3]]
    if np.any(np.abs(vol6) <= 1e-14 * radius ** 2 * length / n_axial):
        raise ElementQualityError("degenerate tetrahedron generated")
    rim = np.asarray(rim)
    sets = {
        "inlet": np.arange(nd),
        "outlet": np.arange(nd) + n_axial * nd,
        "wall": (rim[None, :] + nd * np.arange(n_axial + 1)[:, None]).ravel(),
    }
    return Mesh(nodes, tets, "tet4", sets)


def polygon_prism_volume(radius, length, n_radial):
    """Exact volume enclosed by the generated cylinder mesh."""
    m = 6 * n_radial
    return 0.5 * m * radius ** 2 * math.sin(2 * math.pi / m) * length


# --------------------------------------------------------------------------
# boundary facets
# --------------------------------------------------------------------------

def boundary_facets(mesh: Mesh, set_name=None):
    """Boundary facets (node tuples), optionally restricted to one node set.

    A facet is on the boundary when exactly one element owns it; it belongs
    to a set when all of its nodes do.
    """
    local = FACETS[mesh.kind]
    all_f = np.vstack([mesh.elements[:, list(f)] for f in local])
    key = np.sort(all_f, axis=1)
    _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    facets = all_f[counts[inv.ravel()] == 1]
    if set_name is not None:
        members = np.zeros(mesh.n_nodes, dtype=bool)
        members[mesh.boundary_sets[set_name]] = True
        facets = facets[members[facets].all(axis=1)]
    return facets


def facet_quadrature(mesh: Mesh, facets):
    """Facet shape values ``(nq, kf)``, weights ``(nf, nq)`` and points ``(nf, nq, d)``."""
    X = mesh.nodes[facets]
    if mesh.kind == "line2":
        return np.ones((1, 1)), np.ones((len(facets), 1)), X
    if mesh.kind == "quad4":
        s, w = gauss_legendre(2)
        N = np.column_stack([(1 - s) / 2, (1 + s) / 2])
        length = np.linalg.norm(X[:, 1] - X[:, 0], axis=1)
        return N, np.outer(length / 2, w), np.einsum("qk,fkd->fqd", N, X)
    pts = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
    N = np.column_stack([1 - pts[:, 0] - pts[:, 1], pts[:, 0], pts[:, 1]])
    area = 0.5 * np.linalg.norm(np.cross(X[:, 1] - X[:, 0], X[:, 2] - X[:, 0]), axis=1)
    return N, np.outer(area, np.full(3, 1 / 3)), np.einsum("qk,fkd->fqd", N, X)


# --------------------------------------------------------------------------
# text format
# --------------------------------------------------------------------------

def write_mesh(mesh: Mesh, path) -> None:
    """Write the self-describing text format (full double precision)."""
    lines = [f"mesh {mesh.kind} {mesh.n_nodes} {mesh.n_elements}"]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in mesh.nodes]
    lines += [" ".join(str(int(v)) for v in row) for row in mesh.elements]
    for name, idx in mesh.boundary_sets.items():
        lines.append(f"set {name} {len(idx)}")
        lines.append(" ".join(str(int(v)) for v in idx))
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path) -> Mesh:
    lines = Path(path).read_text().split("\n")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "mesh":
        raise MeshError("missing 'mesh <kind> <n_nodes> <n_elems>' header")
    kind, nn, ne = head[1], int(head[2]), int(head[3])
    nodes = np.array([[float(v) for v in ln.split()] for ln in lines[1:1 + nn]])
    elements = np.array([[int(v) for v in ln.split()] for ln in lines[1 + nn:1 + nn + ne]],
                        dtype=np.int64).reshape(ne, NODES_PER_ELEMENT[kind])
    sets = {}
    tokens = " ".join(lines[1 + nn + ne:]).split()
    pos = 0
    while pos < len(tokens):
        if tokens[pos] != "set":
            raise MeshError(f"expected 'set', found {tokens[pos]!r}")
        name, count = tokens[pos + 1], int(tokens[pos + 2])
        sets[name] = [int(v) for v in tokens[pos + 3:pos + 3 + count]]
        pos += 3 + count
    return Mesh(nodes, elements, kind, sets)
