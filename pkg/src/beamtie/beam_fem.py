"""Geometrically exact Simo-Reissner beam finite elements.

Two-noded elements with a C1 cubic Hermite centerline (nodal positions and
tangents) and nodal cross-section triads interpolated geodesically.  Nodal
unknowns per node: position r (3), tangent t (3), and a multiplicative
rotation increment theta (3) applied as Lambda <- exp_map(theta) Lambda.

Element residual and tangent are produced by second-order dual numbers
differentiating the stored-energy density, with the multiplicative-update
correction applied to the rotational diagonal blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from . import so3
from .autodiff import Dual2

__all__ = [
    "CrossSection",
    "BeamMesh",
    "BeamState",
    "hermite_shapes",
    "hermite_eval",
    "beam_strains",
    "element_energy",
    "beam_internal_force_tangent",
    "assemble",
    "total_energy",
    "line_load_force",
    "GAUSS_XI",
    "GAUSS_W",
]

# 4-point Gauss rule along the element axis
GAUSS_XI, GAUSS_W = np.polynomial.legendre.leggauss(4)


@dataclass
class CrossSection:
    """Circular cross-section with isotropic elastic constants."""

    R: float
    E: float
    nu: float

    def __post_init__(self):
        if self.R <= 0.0 or self.E <= 0.0:
            raise ValueError("cross-section parameters out of range")

    @property
    def A(self):
        return np.pi * self.R**2

    @property
    def I(self):
        return np.pi * self.R**4 / 4.0

    @property
    def J(self):
        return np.pi * self.R**4 / 2.0

    @property
    def G(self):
        return self.E / (2.0 * (1.0 + self.nu))

    def C_F(self):
        """Force constitutive matrix diag(EA, GA, GA)."""
        return np.diag([self.E * self.A, self.G * self.A, self.G * self.A])

    def C_M(self):
        """Moment constitutive matrix diag(GJ, EI, EI)."""
        return np.diag([self.G * self.J, self.E * self.I, self.E * self.I])


def hermite_shapes(xi, L):
    """Cubic Hermite shape functions and parent derivatives.

    Returns (values, derivatives), each length 4, ordered
    (r1, t1, r2, t2).  Tangent shapes carry the L/2 parent scaling so
    nodal tangents are arc-length derivatives.
    """
    h = np.array(
        [
            (2.0 - 3.0 * xi + xi**3) / 4.0,
            L * (1.0 - xi - xi**2 + xi**3) / 8.0,
            (2.0 + 3.0 * xi - xi**3) / 4.0,
            L * (-1.0 - xi + xi**2 + xi**3) / 8.0,
        ]
    )
    dh = np.array(
        [
            (-3.0 + 3.0 * xi**2) / 4.0,
            L * (-1.0 - 2.0 * xi + 3.0 * xi**2) / 8.0,
            (3.0 - 3.0 * xi**2) / 4.0,
            L * (-1.0 + 2.0 * xi + 3.0 * xi**2) / 8.0,
        ]
    )
    return h, dh


def _arc_length(r1, t1, r2, t2, n_gauss=10):
    """Reference element arc length by fixed-point iteration on L."""
    xi, w = np.polynomial.legendre.leggauss(n_gauss)
    L = float(np.linalg.norm(r2 - r1))
    for _ in range(8):
        total = 0.0
        for x, wt in zip(xi, w):
            _, dh = hermite_shapes(x, L)
            dr = dh[0] * r1 + dh[1] * t1 + dh[2] * r2 + dh[3] * t2
            total += wt * np.linalg.norm(dr)
        if abs(total - L) < 1e-14 * max(1.0, L):
            L = total
            break
        L = total
    return L


@dataclass
class BeamMesh:
    """Beam reference geometry: nodes, connectivity, reference triads.

    Parameters
    ----------
    r0 : ndarray, shape (n, 3)
        Reference centerline positions.
    t0 : ndarray, shape (n, 3)
        Reference centerline tangents (arc-length derivative, unit for an
        arc-length parameterized reference curve).
    conn : ndarray, shape (ne, 2)
        Two-noded connectivity.
    triads0 : ndarray, shape (n, 3, 3)
        Reference nodal triads; first base vector must align with the unit
        reference tangent.
    """

    r0: np.ndarray
    t0: np.ndarray
    conn: np.ndarray
    triads0: np.ndarray
    L_e: np.ndarray = None
    _ref_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.r0 = np.asarray(self.r0, dtype=float)
        self.t0 = np.asarray(self.t0, dtype=float)
        self.conn = np.asarray(self.conn, dtype=int)
        self.triads0 = np.asarray(self.triads0, dtype=float)
        norms = np.linalg.norm(self.t0, axis=1)
        if norms.min() <= 0.0:
            raise ValueError("zero reference tangent")
        for k in range(self.r0.shape[0]):
            g1 = self.triads0[k][:, 0]
            if np.linalg.norm(g1 - self.t0[k] / norms[k]) > 1e-8:
                raise ValueError(f"reference triad g1 misaligned at node {k}")
        if self.L_e is None:
            self.L_e = np.array(
                [
                    _arc_length(self.r0[a], self.t0[a], self.r0[b], self.t0[b])
                    for a, b in self.conn
                ]
            )

    @property
    def n_nodes(self):
        return self.r0.shape[0]

    @property
    def n_elements(self):
        return self.conn.shape[0]

    def reference_kinematics(self, e):
        """Per-Gauss-point reference data of element e.

        Returns a list of tuples (j, Gamma0, Omega0) with j the reference
        parent-to-arc-length Jacobian and Gamma0, Omega0 the reference
        values of the two strain measures before subtraction.
        """
        if e in self._ref_cache:
            return self._ref_cache[e]
        a, b = self.conn[e]
        L = self.L_e[e]
        lam1, lam2 = self.triads0[a], self.triads0[b]
        phi0 = so3.relative_rotation(lam1, lam2, check=False)
        data = []
        for xi in GAUSS_XI:
            _, dh = hermite_shapes(xi, L)
            dr = (
                dh[0] * self.r0[a]
                + dh[1] * self.t0[a]
                + dh[2] * self.r0[b]
                + dh[3] * self.t0[b]
            )
            j = np.linalg.norm(dr)
            t = (1.0 + xi) / 2.0
            lam = so3.exp_map(t * phi0) @ lam1
            gamma0 = lam.T @ (dr / j)
            omega0 = lam.T @ phi0 / (2.0 * j)
            data.append((j, gamma0, omega0))
        self._ref_cache[e] = data
        return data


@dataclass
class BeamState:
    """Current beam kinematics: positions, tangents, nodal triads."""

    r: np.ndarray
    t: np.ndarray
    triads: np.ndarray

    @classmethod
    def reference(cls, mesh):
        return cls(mesh.r0.copy(), mesh.t0.copy(), mesh.triads0.copy())

    def copy(self):
        return BeamState(self.r.copy(), self.t.copy(), self.triads.copy())


def hermite_eval(mesh, e, xi, r, t):
    """Centerline position and arc-length derivative at parent coordinate xi.

    r, t are (n, 3) nodal position/tangent arrays (floats or Dual2 objects).
    """
    a, b = mesh.conn[e]
    L = mesh.L_e[e]
    h, dh = hermite_shapes(xi, L)
    pos = h[0] * r[a] + h[1] * t[a] + h[2] * r[b] + h[3] * t[b]
    # reference Jacobian: derivatives are taken per reference arc length
    dr0 = (
        dh[0] * mesh.r0[a]
        + dh[1] * mesh.t0[a]
        + dh[2] * mesh.r0[b]
        + dh[3] * mesh.t0[b]
    )
    j = np.linalg.norm(dr0)
    dr = dh[0] * r[a] + dh[1] * t[a] + dh[2] * r[b] + dh[3] * t[b]
    return pos, dr / j


def _strains_at(mesh, e, xi, gp_ref, r1, t1, r2, t2, lam1, lam2):
    """Strain measures Gamma, Omega at one Gauss point (dual-friendly)."""
    L = mesh.L_e[e]
    _, dh = hermite_shapes(xi, L)
    dr = dh[0] * r1 + dh[1] * t1 + dh[2] * r2 + dh[3] * t2
    j, gamma0, omega0 = gp_ref
    t = (1.0 + xi) / 2.0
    phi = so3.rv(np.dot(lam2, lam1.T), check=False)
    lam = np.dot(
        so3.exp_map(np.array([t * phi[0], t * phi[1], t * phi[2]], dtype=phi.dtype)),
        lam1,
    )
    lam_T = lam.T
    gamma = np.dot(lam_T, dr) / j - gamma0
    omega = np.dot(lam_T, phi) / (2.0 * j) - omega0
    return gamma, omega


def beam_strains(mesh, e, xi, state):
    """Material strain measures (Gamma, Omega) of element e at parent xi.

    Both vanish identically in the reference configuration.
    """
    a, b = mesh.conn[e]
    L = mesh.L_e[e]
    _, dh = hermite_shapes(xi, L)
    dr0 = (
        dh[0] * mesh.r0[a]
        + dh[1] * mesh.t0[a]
        + dh[2] * mesh.r0[b]
        + dh[3] * mesh.t0[b]
    )
    j = np.linalg.norm(dr0)
    lam1_0, lam2_0 = mesh.triads0[a], mesh.triads0[b]
    phi0 = so3.relative_rotation(lam1_0, lam2_0, check=False)
    t = (1.0 + xi) / 2.0
    lam0 = so3.exp_map(t * phi0) @ lam1_0
    gp_ref = (j, lam0.T @ (dr0 / j), lam0.T @ phi0 / (2.0 * j))
    return _strains_at(
        mesh, e, xi, gp_ref,
        state.r[a], state.t[a], state.r[b], state.t[b],
        state.triads[a], state.triads[b],
    )


def _energy_kernel(mesh, e, cs, r1, t1, r2, t2, lam1, lam2):
    """Stored energy of one element for (possibly dual) nodal data."""
    C_F, C_M = cs.C_F(), cs.C_M()
    ref = mesh.reference_kinematics(e)
    total = 0.0
    for xi, w, gp_ref in zip(GAUSS_XI, GAUSS_W, ref):
        gamma, omega = _strains_at(mesh, e, xi, gp_ref, r1, t1, r2, t2, lam1, lam2)
        j = gp_ref[0]
        e_f = ad.dot(gamma, np.dot(C_F, gamma))
        e_m = ad.dot(omega, np.dot(C_M, omega))
        total = total + 0.5 * w * j * (e_f + e_m)
    return total


def element_energy(mesh, e, cs, state):
    a, b = mesh.conn[e]
    return _energy_kernel(
        mesh, e, cs,
        state.r[a], state.t[a], state.r[b], state.t[b],
        state.triads[a], state.triads[b],
    )


def beam_internal_force_tangent(mesh, e, cs, state, want_tangent=True):
    """Element residual and consistent tangent.

    Local dof order: (r1, t1, r2, t2, theta1, theta2), 18 unknowns; theta
    are multiplicative rotation increments seeded at zero.  The tangent
    includes the -1/2 skew(residual) correction on the rotational diagonal
    blocks required by the multiplicative update rule.
    """
    a, b = mesh.conn[e]
    duals = ad.seed(np.zeros(18) + np.concatenate(
        [state.r[a], state.t[a], state.r[b], state.t[b], np.zeros(6)]
    ), second_order=want_tangent)
    r1 = np.array(duals[0:3], dtype=object)
    t1 = np.array(duals[3:6], dtype=object)
    r2 = np.array(duals[6:9], dtype=object)
    t2 = np.array(duals[9:12], dtype=object)
    th1 = np.array(duals[12:15], dtype=object)
    th2 = np.array(duals[15:18], dtype=object)
    lam1 = np.dot(so3.exp_map(th1), state.triads[a])
    lam2 = np.dot(so3.exp_map(th2), state.triads[b])
    energy = _energy_kernel(mesh, e, cs, r1, t1, r2, t2, lam1, lam2)
    res = np.array(energy.grad)
    if not want_tangent:
        return res, None
    K = np.array(energy.hess)
    K[12:15, 12:15] -= 0.5 * so3.skew(res[12:15])
    K[15:18, 15:18] -= 0.5 * so3.skew(res[15:18])
    return res, K


def _element_dofs(mesh, e, n_solid_dofs, n_beam_nodes):
    """Global dof indices for the element's 18 local unknowns."""
    a, b = mesh.conn[e]
    pos = n_solid_dofs
    rot = n_solid_dofs + 6 * n_beam_nodes
    return np.concatenate(
        [
            pos + 6 * a + np.arange(6),
            pos + 6 * b + np.arange(6),
            rot + 3 * a + np.arange(3),
            rot + 3 * b + np.arange(3),
        ]
    )


def assemble(mesh, cs, state, n_solid_dofs, n_total_dofs, want_tangent=True):
    """Global beam internal force vector and (dense-block) sparse tangent."""
    from scipy.sparse import coo_matrix

    R = np.zeros(n_total_dofs)
    rows, cols, vals = [], [], []
    for e in range(mesh.n_elements):
        r_e, K_e = beam_internal_force_tangent(mesh, e, cs, state, want_tangent)
        dofs = _element_dofs(mesh, e, n_solid_dofs, mesh.n_nodes)
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
            shape=(n_total_dofs, n_total_dofs),
        ).tocsr()
    return R, K


def total_energy(mesh, cs, state):
    return sum(element_energy(mesh, e, cs, state) for e in range(mesh.n_elements))


def line_load_force(mesh, load, n_solid_dofs, n_total_dofs):
    """Consistent nodal force of a constant line load (N/m) on every element.

    The load acts on the centerline; work-conjugate contributions land on
    position and tangent dofs.
    """
    load = np.asarray(load, dtype=float)
    F = np.zeros(n_total_dofs)
    pos = n_solid_dofs
    for e in range(mesh.n_elements):
        a, b = mesh.conn[e]
        L = mesh.L_e[e]
        for xi, w in zip(GAUSS_XI, GAUSS_W):
            h, dh = hermite_shapes(xi, L)
            dr0 = (
                dh[0] * mesh.r0[a]
                + dh[1] * mesh.t0[a]
                + dh[2] * mesh.r0[b]
                + dh[3] * mesh.t0[b]
            )
            j = np.linalg.norm(dr0)
            F[pos + 6 * a : pos + 6 * a + 3] += w * j * h[0] * load
            F[pos + 6 * a + 3 : pos + 6 * a + 6] += w * j * h[1] * load
            F[pos + 6 * b : pos + 6 * b + 3] += w * j * h[2] * load
            F[pos + 6 * b + 3 : pos + 6 * b + 6] += w * j * h[3] * load
    return F
