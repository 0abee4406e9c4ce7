"""Three-dimensional hyperelastic continuum finite elements.

Total Lagrangian formulation with isoparametric elements (hex8, hex20,
hex27, tet4, tet10), Saint Venant-Kirchhoff and compressible Neo-Hookean
material laws, analytic internal force and consistent tangent.

Hex parent domain is [-1, 1]^3; tet parent domain is the unit simplex
xi, eta, zeta >= 0, xi + eta + zeta <= 1.  Node orderings follow the VTK
conventions so exported meshes render directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DegenerateElementError",
    "ElementInversionError",
    "SolidMesh",
    "MaterialModel",
    "shape_functions",
    "quadrature",
    "element_faces",
    "deformation_gradient",
    "element_energy",
    "internal_force_tangent",
    "assemble",
    "total_energy",
    "recover_nodal_stress",
    "PARENT_NODES",
    "FACE_TABLES",
]


class DegenerateElementError(ValueError):
    """Reference Jacobian not positive at a quadrature point."""


class ElementInversionError(ValueError):
    """det F <= 0 at a quadrature point (Neo-Hookean only)."""


# -- parent geometry ----------------------------------------------------------

_H8 = np.array(
    [
        [-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
        [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1],
    ],
    dtype=float,
)

# VTK edge order for hex20: bottom ring, top ring, then vertical edges.
_H_EDGES = [
    (0, 1), (1, 2), (2, 3), (3, 0),
    (4, 5), (5, 6), (6, 7), (7, 4),
    (0, 4), (1, 5), (2, 6), (3, 7),
]

# VTK face-center order for hex27: -x, +x, -y, +y, -z, +z.
_H_FACE_CENTERS = np.array(
    [
        [-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0], [0, 0, -1], [0, 0, 1]
    ],
    dtype=float,
)

_T4 = np.array(
    [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float
)

_T_EDGES = [(0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3)]


def _hex20_nodes():
    mids = np.array([(_H8[a] + _H8[b]) / 2.0 for a, b in _H_EDGES])
    return np.vstack([_H8, mids])


def _hex27_nodes():
    return np.vstack([_hex20_nodes(), _H_FACE_CENTERS, [[0.0, 0.0, 0.0]]])


def _tet10_nodes():
    mids = np.array([(_T4[a] + _T4[b]) / 2.0 for a, b in _T_EDGES])
    return np.vstack([_T4, mids])


PARENT_NODES = {
    "hex8": _H8,
    "hex20": _hex20_nodes(),
    "hex27": _hex27_nodes(),
    "tet4": _T4,
    "tet10": _tet10_nodes(),
}

# Outward-oriented corner loops of each hex face (checked against the
# parent-element centroid).
_H8_FACES = [
    (0, 3, 2, 1), (4, 5, 6, 7),
    (0, 1, 5, 4), (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7),
]

_T4_FACES = [(0, 2, 1), (0, 1, 3), (1, 2, 3), (0, 3, 2)]


def _find_node(kind, coords):
    table = PARENT_NODES[kind]
    d = np.abs(table - np.asarray(coords, dtype=float)).max(axis=1)
    i = int(np.argmin(d))
    if d[i] > 1e-12:
        raise KeyError(f"no parent node at {coords} for {kind}")
    return i


def _hex_face_nodes(kind, corners):
    """Face node list: corners, edge midpoints, optional center."""
    table = PARENT_NODES[kind]
    nodes = list(corners)
    n = len(corners)
    for i in range(n):
        a, b = corners[i], corners[(i + 1) % n]
        nodes.append(_find_node(kind, (table[a] + table[b]) / 2.0))
    if kind == "hex27":
        center = np.mean(table[list(corners)], axis=0)
        nodes.append(_find_node(kind, center))
    return tuple(nodes)


def _tet10_face_nodes(corners):
    table = PARENT_NODES["tet10"]
    nodes = list(corners)
    for i in range(3):
        a, b = corners[i], corners[(i + 1) % 3]
        nodes.append(_find_node("tet10", (table[a] + table[b]) / 2.0))
    return tuple(nodes)


def _face_tables():
    tables = {
        "hex8": [("quad4", f) for f in _H8_FACES],
        "hex20": [("quad8", _hex_face_nodes("hex20", f)) for f in _H8_FACES],
        "hex27": [("quad9", _hex_face_nodes("hex27", f)) for f in _H8_FACES],
        "tet4": [("tri3", f) for f in _T4_FACES],
        "tet10": [("tri6", _tet10_face_nodes(f)) for f in _T4_FACES],
    }
    return tables


# kind -> list of (facet kind, local node tuple), outward oriented
FACE_TABLES = _face_tables()


# -- shape functions ----------------------------------------------------------


def _lagrange_1d(x, a):
    """Quadratic 1D Lagrange value/derivative at node location a in {-1,0,1}."""
    if a == -1.0:
        return 0.5 * x * (x - 1.0), x - 0.5
    if a == 0.0:
        return 1.0 - x * x, -2.0 * x
    return 0.5 * x * (x + 1.0), x + 0.5


def shape_functions(kind, xi):
    """Shape function values and parent-coordinate gradients.

    Parameters
    ----------
    kind : str
        One of hex8, hex20, hex27, tet4, tet10.
    xi : array_like, shape (3,)
        Parent coordinates.

    Returns
    -------
    N : ndarray, shape (n,)
    dN : ndarray, shape (n, 3)
    """
    x, y, z = float(xi[0]), float(xi[1]), float(xi[2])
    if kind == "hex8":
        P = PARENT_NODES[kind]
        N = np.empty(8)
        dN = np.empty((8, 3))
        for k, (a, b, c) in enumerate(P):
            fx, fy, fz = 1 + a * x, 1 + b * y, 1 + c * z
            N[k] = fx * fy * fz / 8.0
            dN[k] = [a * fy * fz / 8.0, b * fx * fz / 8.0, c * fx * fy / 8.0]
        return N, dN
    if kind == "hex20":
        P = PARENT_NODES[kind]
        N = np.empty(20)
        dN = np.empty((20, 3))
        for k, (a, b, c) in enumerate(P):
            if k < 8:
                fx, fy, fz = 1 + a * x, 1 + b * y, 1 + c * z
                g = a * x + b * y + c * z - 2.0
                N[k] = fx * fy * fz * g / 8.0
                dN[k] = [
                    fy * fz * (a * g + a * fx) / 8.0,
                    fx * fz * (b * g + b * fy) / 8.0,
                    fx * fy * (c * g + c * fz) / 8.0,
                ]
            else:
                # one parent coordinate is zero on each edge node
                if a == 0.0:
                    N[k] = (1 - x * x) * (1 + b * y) * (1 + c * z) / 4.0
                    dN[k] = [
                        -2 * x * (1 + b * y) * (1 + c * z) / 4.0,
                        b * (1 - x * x) * (1 + c * z) / 4.0,
                        c * (1 - x * x) * (1 + b * y) / 4.0,
                    ]
                elif b == 0.0:
                    N[k] = (1 + a * x) * (1 - y * y) * (1 + c * z) / 4.0
                    dN[k] = [
                        a * (1 - y * y) * (1 + c * z) / 4.0,
                        -2 * y * (1 + a * x) * (1 + c * z) / 4.0,
                        c * (1 + a * x) * (1 - y * y) / 4.0,
                    ]
                else:
                    N[k] = (1 + a * x) * (1 + b * y) * (1 - z * z) / 4.0
                    dN[k] = [
                        a * (1 + b * y) * (1 - z * z) / 4.0,
                        b * (1 + a * x) * (1 - z * z) / 4.0,
                        -2 * z * (1 + a * x) * (1 + b * y) / 4.0,
                    ]
        return N, dN
    if kind == "hex27":
        P = PARENT_NODES[kind]
        N = np.empty(27)
        dN = np.empty((27, 3))
        for k, (a, b, c) in enumerate(P):
            lx, dlx = _lagrange_1d(x, a)
            ly, dly = _lagrange_1d(y, b)
            lz, dlz = _lagrange_1d(z, c)
            N[k] = lx * ly * lz
            dN[k] = [dlx * ly * lz, lx * dly * lz, lx * ly * dlz]
        return N, dN
    if kind == "tet4":
        N = np.array([1.0 - x - y - z, x, y, z])
        dN = np.array(
            [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        )
        return N, dN
    if kind == "tet10":
        L = np.array([1.0 - x - y - z, x, y, z])
        dL = np.array(
            [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        )
        N = np.empty(10)
        dN = np.empty((10, 3))
        for i in range(4):
            N[i] = L[i] * (2.0 * L[i] - 1.0)
            dN[i] = (4.0 * L[i] - 1.0) * dL[i]
        for k, (i, j) in enumerate(_T_EDGES):
            N[4 + k] = 4.0 * L[i] * L[j]
            dN[4 + k] = 4.0 * (L[i] * dL[j] + L[j] * dL[i])
        return N, dN
    raise KeyError(f"unknown element kind {kind!r}")


def _gauss_1d(n):
    return np.polynomial.legendre.leggauss(n)


def quadrature(kind):
    """Quadrature points and weights for the element kind.

    Returns
    -------
    points : ndarray, shape (ng, 3)
    weights : ndarray, shape (ng,)
    """
    if kind in ("hex8", "hex20", "hex27"):
        n = 2 if kind == "hex8" else 3
        x, w = _gauss_1d(n)
        pts, wts = [], []
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    pts.append([x[i], x[j], x[k]])
                    wts.append(w[i] * w[j] * w[k])
        return np.array(pts), np.array(wts)
    if kind == "tet4":
        return np.array([[0.25, 0.25, 0.25]]), np.array([1.0 / 6.0])
    if kind == "tet10":
        a = 0.5854101966249685
        b = 0.1381966011250105
        pts = np.array(
            [[b, b, b], [a, b, b], [b, a, b], [b, b, a]]
        )
        return pts, np.full(4, 1.0 / 24.0)
    raise KeyError(f"unknown element kind {kind!r}")


def element_faces(kind):
    """Boundary faces of an element kind as (facet kind, local nodes)."""
    return FACE_TABLES[kind]


# -- mesh and material --------------------------------------------------------


@dataclass
class SolidMesh:
    """Solid mesh: reference coordinates, one element kind, connectivity.

    Parameters
    ----------
    X : ndarray, shape (n_nodes, 3)
        Reference nodal coordinates.
    kind : str
        Element kind of every element.
    conn : ndarray, shape (n_elem, nodes_per_elem)
        Element connectivity (VTK node order).
    face_sets : dict
        Name -> list of (element index, local face index) pairs on the
        mesh boundary.
    node_sets : dict
        Name -> array of node indices (Dirichlet plumbing).
    """

    X: np.ndarray
    kind: str
    conn: np.ndarray
    face_sets: dict = field(default_factory=dict)
    node_sets: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.conn = np.asarray(self.conn, dtype=int)
        if self.conn.max() >= self.X.shape[0] or self.conn.min() < 0:
            raise ValueError("connectivity index out of range")
        if self.conn.shape[1] != PARENT_NODES[self.kind].shape[0]:
            raise ValueError("connectivity width does not match element kind")

    @property
    def n_nodes(self):
        return self.X.shape[0]

    @property
    def n_elements(self):
        return self.conn.shape[0]


@dataclass
class MaterialModel:
    """Hyperelastic material: SaintVenantKirchhoff or CompressibleNeoHookean."""

    kind: str
    E: float
    nu: float

    def __post_init__(self):
        if self.kind not in ("SaintVenantKirchhoff", "CompressibleNeoHookean"):
            raise ValueError(f"unknown material kind {self.kind!r}")
        if self.E <= 0.0 or not (-1.0 < self.nu < 0.5):
            raise ValueError("material parameters out of range")

    def lame(self):
        lam = self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))
        mu = self.E / (2.0 * (1.0 + self.nu))
        return lam, mu


_VOIGT = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)]


def _stress_and_tangent(material, C):
    """Second Piola-Kirchhoff stress tensor and Voigt material tangent.

    Voigt order (11, 22, 33, 12, 23, 13) with engineering shear strains.
    """
    lam, mu = material.lame()
    if material.kind == "SaintVenantKirchhoff":
        Egl = 0.5 * (C - np.eye(3))
        S = lam * np.trace(Egl) * np.eye(3) + 2.0 * mu * Egl
        Cm = np.zeros((6, 6))
        Cm[:3, :3] = lam
        Cm[np.arange(3), np.arange(3)] += 2.0 * mu
        Cm[np.arange(3, 6), np.arange(3, 6)] = mu
        return S, Cm
    detC = np.linalg.det(C)
    if detC <= 0.0:
        raise ElementInversionError("det F <= 0 at quadrature point")
    lnJ = 0.5 * np.log(detC)
    Ci = np.linalg.inv(C)
    S = mu * (np.eye(3) - Ci) + lam * lnJ * Ci
    coef = mu - lam * lnJ
    Cm = np.empty((6, 6))
    for a, (i, j) in enumerate(_VOIGT):
        for b, (k, l) in enumerate(_VOIGT):
            Cm[a, b] = lam * Ci[i, j] * Ci[k, l] + coef * (
                Ci[i, k] * Ci[j, l] + Ci[i, l] * Ci[j, k]
            )
    return S, Cm


def _energy_density(material, C):
    lam, mu = material.lame()
    if material.kind == "SaintVenantKirchhoff":
        Egl = 0.5 * (C - np.eye(3))
        return 0.5 * lam * np.trace(Egl) ** 2 + mu * np.sum(Egl * Egl)
    detC = np.linalg.det(C)
    if detC <= 0.0:
        raise ElementInversionError("det F <= 0 at quadrature point")
    lnJ = 0.5 * np.log(detC)
    return 0.5 * mu * (np.trace(C) - 3.0) - mu * lnJ + 0.5 * lam * lnJ**2


# -- element kernels ----------------------------------------------------------


def _grads(kind, X_e, xi):
    """Shape values, material gradients dN/dX and reference Jacobian det."""
    N, dN = shape_functions(kind, xi)
    J = X_e.T @ dN  # J[i, j] = dX_i / dxi_j
    detJ = np.linalg.det(J)
    if detJ <= 0.0:
        raise DegenerateElementError(f"non-positive reference Jacobian {detJ:.3e}")
    gradN = dN @ np.linalg.inv(J)
    return N, gradN, detJ


def deformation_gradient(kind, X_e, d_e, xi):
    """Deformation gradient F = I + sum_a d_a (dN_a/dX)^T at parent point xi."""
    _, gradN, _ = _grads(kind, X_e, xi)
    return np.eye(3) + d_e.T @ gradN


def element_energy(kind, X_e, d_e, material):
    """Stored strain energy of one element."""
    pts, wts = quadrature(kind)
    total = 0.0
    for xi, w in zip(pts, wts):
        _, gradN, detJ = _grads(kind, X_e, xi)
        F = np.eye(3) + d_e.T @ gradN
        if np.linalg.det(F) <= 0.0:
            raise ElementInversionError("det F <= 0 at quadrature point")
        total += _energy_density(material, F.T @ F) * w * detJ
    return total


def internal_force_tangent(kind, X_e, d_e, material):
    """Element internal force and consistent tangent (total Lagrangian).

    Returns
    -------
    r : ndarray, shape (3 n,)
        Internal force, ordered (node, component).
    K : ndarray, shape (3 n, 3 n)
        Material + geometric stiffness, symmetric.
    """
    n = X_e.shape[0]
    r = np.zeros(3 * n)
    K = np.zeros((3 * n, 3 * n))
    pts, wts = quadrature(kind)
    for xi, w in zip(pts, wts):
        _, gradN, detJ = _grads(kind, X_e, xi)
        F = np.eye(3) + d_e.T @ gradN
        if np.linalg.det(F) <= 0.0:
            raise ElementInversionError("det F <= 0 at quadrature point")
        S, Cm = _stress_and_tangent(material, F.T @ F)
        # B maps nodal velocities to Green-Lagrange strain rates (Voigt)
        B = np.zeros((6, 3 * n))
        for a in range(n):
            g = gradN[a]
            cols = slice(3 * a, 3 * a + 3)
            B[0, cols] = F[:, 0] * g[0]
            B[1, cols] = F[:, 1] * g[1]
            B[2, cols] = F[:, 2] * g[2]
            B[3, cols] = F[:, 0] * g[1] + F[:, 1] * g[0]
            B[4, cols] = F[:, 1] * g[2] + F[:, 2] * g[1]
            B[5, cols] = F[:, 0] * g[2] + F[:, 2] * g[0]
        Sv = np.array([S[0, 0], S[1, 1], S[2, 2], S[0, 1], S[1, 2], S[0, 2]])
        r += w * detJ * (B.T @ Sv)
        K += w * detJ * (B.T @ Cm @ B)
        geo = gradN @ S @ gradN.T  # (n, n)
        for i in range(3):
            K[i::3, i::3] += w * detJ * geo
    return r, K


# -- global assembly ----------------------------------------------------------


def assemble(mesh, material, d, want_tangent=True):
    """Global internal force (and sparse tangent) of the solid.

    Parameters
    ----------
    mesh : SolidMesh
    material : MaterialModel
    d : ndarray, shape (n_nodes, 3)
        Nodal displacements.
    want_tangent : bool

    Returns
    -------
    R : ndarray, shape (3 n_nodes,)
    K : scipy.sparse.csr_matrix or None
    """
    from scipy.sparse import coo_matrix

    ndof = 3 * mesh.n_nodes
    R = np.zeros(ndof)
    rows, cols, vals = [], [], []
    for e in range(mesh.n_elements):
        c = mesh.conn[e]
        X_e = mesh.X[c]
        d_e = d[c]
        r_e, K_e = internal_force_tangent(mesh.kind, X_e, d_e, material)
        dofs = (3 * c[:, None] + np.arange(3)[None, :]).ravel()
        R[dofs] += r_e
        if want_tangent:
            ii, jj = np.meshgrid(dofs, dofs, indexing="ij")
            rows.append(ii.ravel())
            cols.append(jj.ravel())
            vals.append(K_e.ravel())
    K = None
    if want_tangent:
        K = coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(ndof, ndof),
        ).tocsr()
    return R, K


def total_energy(mesh, material, d):
    """Stored strain energy of the whole solid."""
    return sum(
        element_energy(mesh.kind, mesh.X[c], d[c], material) for c in mesh.conn
    )


def recover_nodal_stress(mesh, material, d, component=(2, 2)):
    """Nodal average of one second Piola-Kirchhoff stress component.

    Quadrature-point values are averaged (equal weights) onto the nodes of
    each element, then averaged over elements sharing a node.
    """
    i, j = component
    acc = np.zeros(mesh.n_nodes)
    cnt = np.zeros(mesh.n_nodes)
    pts, _ = quadrature(mesh.kind)
    for c in mesh.conn:
        X_e, d_e = mesh.X[c], d[c]
        vals = []
        for xi in pts:
            F = deformation_gradient(mesh.kind, X_e, d_e, xi)
            S, _ = _stress_and_tangent(material, F.T @ F)
            vals.append(S[i, j])
        v = float(np.mean(vals))
        acc[c] += v
        cnt[c] += 1.0
    return acc / np.maximum(cnt, 1.0)
