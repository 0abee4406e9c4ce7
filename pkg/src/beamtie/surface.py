"""Solid-surface geometry: facet extraction, averaged normal field,
closest-point projection, and surface triads.

Facets are boundary faces of solid elements (quad4/8/9, tri3/6) carrying
links to their parent element.  The averaged normal field assigns every
surface node the normalized sum of its adjacent facet unit normals and
interpolates them with the facet shape functions, yielding a C0 normal
field.  All evaluation routines accept either float positions or object
arrays of dual numbers so the coupling terms can be differentiated through
the normal averaging.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Dual2

__all__ = [
    "TopologyError",
    "DegenerateNormalError",
    "ProjectionError",
    "SingularDirectorError",
    "Facet",
    "SurfaceMesh",
    "ProjectionResult",
    "facet_shape",
    "extract_surface",
    "NormalField",
    "averaged_nodal_normals",
    "interpolate_normal",
    "closest_point_projection",
    "project_onto_facet",
    "SurfaceTriadData",
    "reference_surface_triad_data",
    "surface_triad",
    "FACET_PARENT_NODES",
]


class TopologyError(ValueError):
    """Face selector touched a non-boundary face or unknown set."""


class DegenerateNormalError(ValueError):
    """Adjacent facet normals cancel at a surface node."""


class ProjectionError(RuntimeError):
    """Closest-point projection failed to converge on any facet."""


class SingularDirectorError(ValueError):
    """Beam axis (numerically) parallel to the surface normal."""


# -- facet shape functions ----------------------------------------------------

_Q4 = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
_Q8 = np.vstack([_Q4, [[0, -1], [1, 0], [0, 1], [-1, 0]]])
_Q9 = np.vstack([_Q8, [[0.0, 0.0]]])
_T3 = np.array([[0, 0], [1, 0], [0, 1]], dtype=float)
_T6 = np.vstack([_T3, [[0.5, 0], [0.5, 0.5], [0, 0.5]]])

FACET_PARENT_NODES = {
    "quad4": _Q4,
    "quad8": _Q8,
    "quad9": _Q9,
    "tri3": _T3,
    "tri6": _T6,
}


def _lag1d(x, a):
    if a == -1.0:
        return 0.5 * x * (x - 1.0), x - 0.5
    if a == 0.0:
        return 1.0 - x * x, -2.0 * x
    return 0.5 * x * (x + 1.0), x + 0.5


def facet_shape(kind, xi, eta):
    """Facet shape values and parent gradients; dual-number friendly.

    Returns
    -------
    N : ndarray, shape (n,)
    dN : ndarray, shape (n, 2)
    """
    dual = isinstance(xi, Dual2) or isinstance(eta, Dual2)
    if kind == "quad4":
        N, dN = [], []
        for a, b in _Q4:
            N.append((1.0 + a * xi) * (1.0 + b * eta) / 4.0)
            dN.append([a * (1.0 + b * eta) / 4.0, b * (1.0 + a * xi) / 4.0])
    elif kind == "quad8":
        N, dN = [], []
        for a, b in _Q8[:4]:
            N.append((1.0 + a * xi) * (1.0 + b * eta) * (a * xi + b * eta - 1.0) / 4.0)
            dN.append(
                [
                    a * (1.0 + b * eta) * (2.0 * a * xi + b * eta) / 4.0,
                    b * (1.0 + a * xi) * (a * xi + 2.0 * b * eta) / 4.0,
                ]
            )
        for a, b in _Q8[4:]:
            if a == 0.0:
                N.append((1.0 - xi * xi) * (1.0 + b * eta) / 2.0)
                dN.append([-xi * (1.0 + b * eta), b * (1.0 - xi * xi) / 2.0])
            else:
                N.append((1.0 + a * xi) * (1.0 - eta * eta) / 2.0)
                dN.append([a * (1.0 - eta * eta) / 2.0, -eta * (1.0 + a * xi)])
    elif kind == "quad9":
        N, dN = [], []
        for a, b in _Q9:
            lx, dlx = _lag1d(xi, a)
            ly, dly = _lag1d(eta, b)
            N.append(lx * ly)
            dN.append([dlx * ly, lx * dly])
    elif kind == "tri3":
        N = [1.0 - xi - eta, xi, eta]
        dN = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]
    elif kind == "tri6":
        L = [1.0 - xi - eta, xi, eta]
        dL = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]
        N, dN = [], []
        for i in range(3):
            N.append(L[i] * (2.0 * L[i] - 1.0))
            dN.append([(4.0 * L[i] - 1.0) * dL[i][0], (4.0 * L[i] - 1.0) * dL[i][1]])
        for i, j in ((0, 1), (1, 2), (2, 0)):
            N.append(4.0 * L[i] * L[j])
            dN.append(
                [
                    4.0 * (L[i] * dL[j][0] + L[j] * dL[i][0]),
                    4.0 * (L[i] * dL[j][1] + L[j] * dL[i][1]),
                ]
            )
    else:
        raise KeyError(f"unknown facet kind {kind!r}")
    dtype = object if dual else float
    return np.array(N, dtype=dtype), np.array(dN, dtype=dtype)


def _inside(kind, xi, eta, tol=1e-8):
    if kind.startswith("quad"):
        return abs(xi) <= 1.0 + tol and abs(eta) <= 1.0 + tol
    return xi >= -tol and eta >= -tol and xi + eta <= 1.0 + tol


def _facet_center(kind):
    if kind.startswith("quad"):
        return 0.0, 0.0
    return 1.0 / 3.0, 1.0 / 3.0


# -- topology -----------------------------------------------------------------


@dataclass
class Facet:
    """One boundary face: facet kind, global node ids, parent element/face."""

    kind: str
    nodes: np.ndarray
    elem: int
    face: int


@dataclass
class SurfaceMesh:
    """Coupling surface: facets plus node-to-facet adjacency."""

    solid: object
    facets: list
    node_adj: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.node_adj:
            for fid, f in enumerate(self.facets):
                for gid in f.nodes:
                    self.node_adj.setdefault(int(gid), []).append(fid)

    @property
    def surf_nodes(self):
        return np.array(sorted(self.node_adj.keys()), dtype=int)

    def patch_nodes(self, fid):
        """Nodes of facet fid plus nodes of every facet sharing one of them."""
        out = set()
        for gid in self.facets[fid].nodes:
            for nfid in self.node_adj[int(gid)]:
                out.update(int(g) for g in self.facets[nfid].nodes)
        return np.array(sorted(out), dtype=int)

    def neighbor_facets(self, fid):
        out = set()
        for gid in self.facets[fid].nodes:
            out.update(self.node_adj[int(gid)])
        out.discard(fid)
        return sorted(out)


def extract_surface(solid_mesh, face_selector):
    """Surface mesh from named face sets of a solid mesh.

    Orientation of every facet is audited against the parent element
    centroid (reference configuration).
    """
    from .solid_fem import FACE_TABLES, shape_functions, PARENT_NODES

    faces = []
    for name in face_selector:
        if name not in solid_mesh.face_sets:
            raise TopologyError(f"unknown face set {name!r}")
        faces.extend(solid_mesh.face_sets[name])
    # multiplicity of every element face: shared faces are interior
    face_count = {}
    for conn in solid_mesh.conn:
        for _, local in FACE_TABLES[solid_mesh.kind]:
            key = frozenset(int(conn[i]) for i in local)
            face_count[key] = face_count.get(key, 0) + 1
    seen = set()
    facets = []
    for elem, face in faces:
        if (elem, face) in seen:
            continue
        seen.add((elem, face))
        fkind, local = FACE_TABLES[solid_mesh.kind][face]
        gnodes = solid_mesh.conn[elem][list(local)]
        if face_count[frozenset(int(g) for g in gnodes)] > 1:
            raise TopologyError(
                f"face {face} of element {elem} is interior (shared by two elements)"
            )
        facets.append(Facet(fkind, np.asarray(gnodes, dtype=int), int(elem), int(face)))
    mesh = SurfaceMesh(solid_mesh, facets)
    # outward-orientation audit
    for f in mesh.facets:
        centroid = solid_mesh.X[solid_mesh.conn[f.elem]].mean(axis=0)
        xi, eta = _facet_center(f.kind)
        N, dN = facet_shape(f.kind, xi, eta)
        Xf = solid_mesh.X[f.nodes]
        x0 = N @ Xf
        d1 = dN[:, 0] @ Xf
        d2 = dN[:, 1] @ Xf
        n = np.cross(d1, d2)
        if n @ (x0 - centroid) <= 0.0:
            raise TopologyError(
                f"facet of element {f.elem} face {f.face} not outward oriented"
            )
    return mesh


# -- averaged normal field ----------------------------------------------------


def _facet_unit_normal(facet, positions, xi, eta):
    """Unit geometric normal of one facet at (xi, eta); dual-friendly."""
    N, dN = facet_shape(facet.kind, xi, eta)
    xs = [positions[int(g)] for g in facet.nodes]
    d1 = sum((dN[k, 0] * xs[k] for k in range(len(xs))), np.zeros(3))
    d2 = sum((dN[k, 1] * xs[k] for k in range(len(xs))), np.zeros(3))
    n = ad.cross(d1, d2)
    return ad.normalize(n)


def averaged_nodal_normals(surface_mesh, positions, nodes=None):
    """Averaged unit normals keyed by global node id.

    Parameters
    ----------
    positions : indexable
        Maps global node id -> current position (float or dual 3-vector).
    nodes : iterable or None
        Restrict to these global node ids (default: all surface nodes).
    """
    if nodes is None:
        nodes = surface_mesh.surf_nodes
    out = {}
    for gid in nodes:
        gid = int(gid)
        acc = np.zeros(3, dtype=object)
        for fid in surface_mesh.node_adj[gid]:
            f = surface_mesh.facets[fid]
            local = int(np.where(f.nodes == gid)[0][0])
            xi, eta = FACET_PARENT_NODES[f.kind][local]
            acc = acc + _facet_unit_normal(f, positions, xi, eta)
        nrm = ad.value_of(ad.norm(acc))
        if nrm < 1e-10:
            raise DegenerateNormalError(f"averaged normal vanishes at node {gid}")
        out[gid] = ad.normalize(acc)
    return out


def interpolate_normal(facet, nodal_normals, xi, eta):
    """Interpolated averaged normal n_h at (xi, eta); unit length."""
    N, _ = facet_shape(facet.kind, xi, eta)
    acc = np.zeros(3, dtype=object)
    for k, gid in enumerate(facet.nodes):
        acc = acc + N[k] * nodal_normals[int(gid)]
    return ad.normalize(acc)


class NormalField:
    """Averaged C0 normal field over a surface mesh at fixed positions."""

    def __init__(self, surface_mesh, positions):
        self.mesh = surface_mesh
        self.positions = positions
        self.nodal = averaged_nodal_normals(surface_mesh, positions)
        # convert to plain float vectors when possible
        for gid, v in self.nodal.items():
            if not isinstance(v[0], Dual2):
                self.nodal[gid] = np.asarray(v, dtype=float)

    def node_normal(self, gid):
        return self.nodal[int(gid)]

    def evaluate(self, fid, xi, eta):
        """Interpolated unit normal on facet fid."""
        f = self.mesh.facets[fid]
        n = interpolate_normal(f, self.nodal, xi, eta)
        if not isinstance(n[0], Dual2):
            return np.asarray(n, dtype=float)
        return n


# -- closest-point projection -------------------------------------------------


@dataclass
class ProjectionResult:
    """Converged projection of a point onto the surface."""

    facet: int
    xi: float
    eta: float
    gap: float
    surface_point: np.ndarray
    converged: bool
    iterations: int


def _projection_residual(point, facet, positions, nodal_normals, xi, eta):
    """Director-orthogonality residual R_i = X_,i . (v - (v.n_h) n_h)."""
    N, dN = facet_shape(facet.kind, xi, eta)
    xs = [positions[int(g)] for g in facet.nodes]
    X = sum((N[k] * xs[k] for k in range(len(xs))), np.zeros(3))
    d1 = sum((dN[k, 0] * xs[k] for k in range(len(xs))), np.zeros(3))
    d2 = sum((dN[k, 1] * xs[k] for k in range(len(xs))), np.zeros(3))
    nh = interpolate_normal(facet, nodal_normals, xi, eta)
    v = np.array([point[0] - X[0], point[1] - X[1], point[2] - X[2]], dtype=object)
    g = ad.dot(v, nh)
    vp = np.array([v[0] - g * nh[0], v[1] - g * nh[1], v[2] - g * nh[2]], dtype=object)
    return ad.dot(d1, vp), ad.dot(d2, vp), g, X


def _try_facet(
    point, surface_mesh, positions, nodal_normals, fid, max_iter=20, domain_tol=1e-8
):
    facet = surface_mesh.facets[fid]
    xi, eta = _facet_center(facet.kind)
    for it in range(1, max_iter + 1):
        dxi = ad.seed([xi, eta], second_order=False)
        r1, r2, g, X = _projection_residual(
            point, facet, positions, nodal_normals, dxi[0], dxi[1]
        )
        res = np.array([r1.value, r2.value])
        if np.abs(res).max() < 1e-12:
            if _inside(facet.kind, xi, eta, tol=domain_tol):
                Xv = np.array([ad.value_of(c) for c in X])
                return ProjectionResult(
                    fid, xi, eta, float(ad.value_of(g)), Xv, True, it
                )
            return None
        J = np.array([r1.grad, r2.grad])
        try:
            step = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            return None
        step = np.clip(step, -1.0, 1.0)
        xi += step[0]
        eta += step[1]
        if not _inside(facet.kind, xi, eta, tol=1.5):
            return None
    return None


def project_onto_facet(
    point, surface_mesh, positions, nodal_normals, fid, domain_tol=1e-6
):
    """Projection constrained to one facet, with a relaxed domain check.

    Used for quadrature points of a segment whose facet assignment is
    already known; returns None if Newton fails or the solution leaves the
    facet by more than domain_tol.
    """
    return _try_facet(
        np.asarray(point, dtype=float),
        surface_mesh,
        positions,
        nodal_normals,
        fid,
        domain_tol=domain_tol,
    )


def closest_point_projection(
    point, surface_mesh, positions, nodal_normals, facet_hint=None
):
    """Project a point onto the surface along the averaged normal field.

    Solves the two director-orthogonality conditions per facet by Newton
    iteration; at convergence the relative vector satisfies
    point - X = gap * n_h.  Facets are tried hint-first, then neighbors of
    the hint, then all facets ordered by centroid distance; among multiple
    converged candidates with equal minimal |gap| the lowest facet id wins.
    """
    point = np.asarray(point, dtype=float)
    order = []
    if facet_hint is not None:
        order.append(facet_hint)
        order.extend(surface_mesh.neighbor_facets(facet_hint))
    centroids = []
    for fid, f in enumerate(surface_mesh.facets):
        c = np.mean([positions[int(g)] for g in f.nodes], axis=0)
        centroids.append((np.linalg.norm(point - c), fid))
    order.extend(fid for _, fid in sorted(centroids))
    tried = set()
    best = None
    for fid in order:
        if fid in tried:
            continue
        tried.add(fid)
        r = _try_facet(point, surface_mesh, positions, nodal_normals, fid)
        if r is None:
            continue
        if facet_hint is not None:
            return r
        if (
            best is None
            or abs(r.gap) < abs(best.gap) - 1e-12
            or (abs(abs(r.gap) - abs(best.gap)) <= 1e-12 and r.facet < best.facet)
        ):
            best = r
    if best is None:
        raise ProjectionError(f"no facet converged for point {point}")
    return best


# -- surface triads -----------------------------------------------------------


@dataclass
class SurfaceTriadData:
    """Frozen reference data for surface-triad evaluation at one point."""

    facet: int
    xi: float
    eta: float
    director0: np.ndarray  # g~0, unit, in the reference tangent plane
    coeffs: np.ndarray  # (a, b) with g~0 = a X_,xi + b X_,eta
    offset: np.ndarray  # constant rotation Lambda~_G0^T Lambda_B0


def reference_surface_triad_data(surface_mesh, projection, beam_ref_triad):
    """Build the reference director and constant triad offset at a projection."""
    f = surface_mesh.facets[projection.facet]
    X = surface_mesh.solid.X
    _, dN = facet_shape(f.kind, projection.xi, projection.eta)
    Xf = X[f.nodes]
    d1 = dN[:, 0] @ Xf
    d2 = dN[:, 1] @ Xf
    N = np.cross(d1, d2)
    N = N / np.linalg.norm(N)
    g1b = np.asarray(beam_ref_triad)[:, 0]
    w = np.cross(N, g1b)
    nw = np.linalg.norm(w)
    if nw < 1e-6:
        raise SingularDirectorError("beam axis parallel to surface normal")
    g0 = w / nw
    # first-fundamental-form decomposition g~0 = a X_,xi + b X_,eta
    G = np.array([[d1 @ d1, d1 @ d2], [d1 @ d2, d2 @ d2]])
    rhs = np.array([d1 @ g0, d2 @ g0])
    a, b = np.linalg.solve(G, rhs)
    lam_g0 = np.column_stack([g0, N, np.cross(g0, N)])
    offset = lam_g0.T @ np.asarray(beam_ref_triad, dtype=float)
    return SurfaceTriadData(
        projection.facet, projection.xi, projection.eta, g0, np.array([a, b]), offset
    )


def surface_triad(surface_mesh, triad_data, positions):
    """Current surface triad Lambda_G at a frozen reference point.

    positions maps global node id -> current position (float or dual).
    Equals the beam reference triad in the reference configuration.
    """
    f = surface_mesh.facets[triad_data.facet]
    _, dN = facet_shape(f.kind, triad_data.xi, triad_data.eta)
    xs = [positions[int(g)] for g in f.nodes]
    d1 = sum((dN[k, 0] * xs[k] for k in range(len(xs))), np.zeros(3))
    d2 = sum((dN[k, 1] * xs[k] for k in range(len(xs))), np.zeros(3))
    a, b = triad_data.coeffs
    g = ad.normalize(a * d1 + b * d2)
    n = ad.normalize(ad.cross(d1, d2))
    gxn = ad.cross(g, n)
    lam_g = np.empty((3, 3), dtype=object)
    lam_g[:, 0] = g
    lam_g[:, 1] = n
    lam_g[:, 2] = gxn
    out = np.dot(lam_g, triad_data.offset)
    if not isinstance(out[0, 0], Dual2):
        return np.asarray(out, dtype=float)
    return out
