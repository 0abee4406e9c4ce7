"""Mortar coupling of beam centerlines to solid surfaces.

Segment-based evaluation of the positional constraint variants

* CONS: c = D x_B - M x_S - q,  q_j = integral Phi_j g_c0 n_h ds
* REF:  c = D x_B - M x_S
* DISP: c = D d_B - M d_S

and the rotational constraint c_theta,j = integral Phi_j psi_SB ds with
psi_SB the relative rotation vector between surface triad and beam triad.
Lagrange multipliers are interpolated linearly on the beam elements
(multiplier nodes collocated with beam nodes) and eliminated by the
node-wise weighted penalty rule lambda_j = eps kappa_j^-1 c_j with
kappa_j = integral Phi_j ds.

Every integral (D, M, q, kappa, rotational terms) shares one Gauss rule
per segment, which is what makes the linear-momentum audit vanish
identically.  The CONS normal term and all rotational terms are
differentiated with dual numbers; consistent tangents follow from the
penalty potential 1/2 eps c^T V^-1 c plus the multiplicative-rotation
correction on the rotational diagonal blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from . import beam_fem as bf
from . import so3
from . import surface as srf

__all__ = [
    "CouplingConfig",
    "SegmentGaussPoint",
    "Segment",
    "SegmentTable",
    "ConstraintRangeError",
    "SegmentationError",
    "build_segments",
    "MortarAssembler",
    "AssembledSystem",
    "penalty_condense",
]

VARIANTS = ("CONS", "REF", "DISP")


class ConstraintRangeError(RuntimeError):
    """Relative rotation too close to pi for the rotational constraint."""


class SegmentationError(RuntimeError):
    """Projection failed at a quadrature point of an assigned segment."""


@dataclass
class CouplingConfig:
    """Coupling variant and penalty parameters."""

    variant: str = "CONS"
    rotational: bool = True
    eps_r: float = 100.0
    eps_theta: float = 0.1
    n_gauss: int = 6

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.eps_r <= 0.0 or self.eps_theta < 0.0:
            raise ValueError("penalty parameters out of range")


@dataclass
class SegmentGaussPoint:
    """Frozen reference data of one coupling quadrature point."""

    xi_b: float  # beam parent coordinate
    w: float  # quadrature weight including segment and arc-length Jacobians
    facet: int
    xi: float
    eta: float
    gap0: float
    xB0: np.ndarray
    xS0: np.ndarray
    beam_triad0: np.ndarray
    triad_data: object = None


@dataclass
class Segment:
    element: int
    xi_a: float
    xi_b: float
    facet: int
    gps: list = field(default_factory=list)


@dataclass
class SegmentTable:
    segments: list
    kappa: np.ndarray  # per beam (= multiplier) node
    active: np.ndarray  # bool per multiplier node


class _Overlay:
    """Position accessor overriding a base array for a few node ids."""

    def __init__(self, base, over):
        self.base = base
        self.over = over

    def __getitem__(self, gid):
        v = self.over.get(gid)
        return self.base[gid] if v is None else v


def _beam_ref_point(beam_mesh, e, xi):
    a, b = beam_mesh.conn[e]
    h, dh = bf.hermite_shapes(xi, beam_mesh.L_e[e])
    r = (
        h[0] * beam_mesh.r0[a]
        + h[1] * beam_mesh.t0[a]
        + h[2] * beam_mesh.r0[b]
        + h[3] * beam_mesh.t0[b]
    )
    dr = (
        dh[0] * beam_mesh.r0[a]
        + dh[1] * beam_mesh.t0[a]
        + dh[2] * beam_mesh.r0[b]
        + dh[3] * beam_mesh.t0[b]
    )
    return r, np.linalg.norm(dr)


def _sample_facet(beam_mesh, smesh, nodal_normals, e, xi, hint):
    pt, _ = _beam_ref_point(beam_mesh, e, xi)
    try:
        p = srf.closest_point_projection(
            pt, smesh, smesh.solid.X, nodal_normals, facet_hint=hint
        )
        return p.facet
    except srf.ProjectionError:
        return None


def build_segments(beam_mesh, smesh, config, n_samples=17):
    """Segment table: per beam element, facet-wise integration intervals.

    Segment boundaries are located by bisection (parent tolerance 1e-10)
    wherever the projection facet changes between samples.  Quadrature
    points carry frozen reference projections, gaps and surface-triad data.
    """
    X = smesh.solid.X
    nf = srf.NormalField(smesh, X)
    gauss_x, gauss_w = np.polynomial.legendre.leggauss(config.n_gauss)
    segments = []
    n_nodes = beam_mesh.n_nodes
    kappa = np.zeros(n_nodes)
    for e in range(beam_mesh.n_elements):
        a_node, b_node = beam_mesh.conn[e]
        xs = np.linspace(-1.0, 1.0, n_samples)
        fids = []
        hint = None
        for x in xs:
            f = _sample_facet(beam_mesh, smesh, nf.nodal, e, x, hint)
            fids.append(f)
            hint = f if f is not None else hint
        # split at facet changes
        bounds = [xs[0]]
        bfacets = []
        for i in range(n_samples - 1):
            fa, fb = fids[i], fids[i + 1]
            if fa == fb:
                continue
            lo, hi = xs[i], xs[i + 1]
            flo = fa
            while hi - lo > 1e-10:
                mid = 0.5 * (lo + hi)
                fm = _sample_facet(beam_mesh, smesh, nf.nodal, e, mid, flo)
                if fm == flo:
                    lo = mid
                else:
                    hi = mid
            cut = 0.5 * (lo + hi)
            bounds.append(cut)
            bfacets.append(fa)
        bounds.append(xs[-1])
        bfacets.append(fids[-1])
        for (xa, xb), fid in zip(zip(bounds[:-1], bounds[1:]), bfacets):
            if fid is None or xb - xa < 1e-12:
                continue
            seg = Segment(e, float(xa), float(xb), int(fid))
            for gx, gw in zip(gauss_x, gauss_w):
                xi_b = 0.5 * (xa + xb) + 0.5 * (xb - xa) * gx
                pt, j = _beam_ref_point(beam_mesh, e, xi_b)
                proj = srf.project_onto_facet(pt, smesh, X, nf.nodal, fid)
                if proj is None:
                    raise SegmentationError(
                        f"projection failed at beam element {e}, parent {xi_b:.6f}"
                    )
                w = gw * 0.5 * (xb - xa) * j
                t = 0.5 * (1.0 + xi_b)
                tri0 = so3.geodesic_interpolate(
                    beam_mesh.triads0[a_node], beam_mesh.triads0[b_node], t
                )
                tdata = None
                if config.rotational:
                    tdata = srf.reference_surface_triad_data(smesh, proj, tri0)
                seg.gps.append(
                    SegmentGaussPoint(
                        xi_b, w, proj.facet, proj.xi, proj.eta, proj.gap,
                        pt, proj.surface_point, tri0, tdata,
                    )
                )
                phi = np.array([0.5 * (1.0 - xi_b), 0.5 * (1.0 + xi_b)])
                kappa[a_node] += w * phi[0]
                kappa[b_node] += w * phi[1]
            segments.append(seg)
    scale = beam_mesh.L_e.mean() if beam_mesh.n_elements else 1.0
    active = kappa > 1e-12 * scale
    return SegmentTable(segments, kappa, active)


@dataclass
class AssembledSystem:
    """Condensed tangent and residual after multiplier elimination."""

    tangent: object
    residual: np.ndarray


class MortarAssembler:
    """Assembles coupling residual/tangent contributions for one model.

    Dof layout: solid (3 per node) first, then beam positional (6 per
    node: r, t), then beam rotational (3 per node).
    """

    def __init__(self, solid_mesh, smesh, beam_mesh, config):
        self.solid = solid_mesh
        self.smesh = smesh
        self.beam = beam_mesh
        self.config = config
        self.nS = solid_mesh.n_nodes
        self.nB = beam_mesh.n_nodes
        self.pos_off = 3 * self.nS
        self.rot_off = 3 * self.nS + 6 * self.nB
        self.n_dofs = 3 * self.nS + 9 * self.nB
        self.table = build_segments(beam_mesh, smesh, config)
        self._build_DM()

    # -- constant mortar matrices -------------------------------------------

    def _build_DM(self):
        """D (beam side), M (solid side) and the reference normal term q0."""
        nrow = 3 * self.nB
        self.D = np.zeros((nrow, 6 * self.nB))
        self.M = np.zeros((nrow, 3 * self.nS))
        for seg in self.table.segments:
            a, b = self.beam.conn[seg.element]
            L = self.beam.L_e[seg.element]
            facet = self.smesh.facets[seg.facet]
            for gp in seg.gps:
                h, _ = bf.hermite_shapes(gp.xi_b, L)
                phi = [0.5 * (1.0 - gp.xi_b), 0.5 * (1.0 + gp.xi_b)]
                N, _ = srf.facet_shape(facet.kind, gp.xi, gp.eta)
                for jn, pj in ((a, phi[0]), (b, phi[1])):
                    wj = gp.w * pj
                    for i in range(3):
                        row = 3 * jn + i
                        self.D[row, 6 * a + i] += wj * h[0]
                        self.D[row, 6 * a + 3 + i] += wj * h[1]
                        self.D[row, 6 * b + i] += wj * h[2]
                        self.D[row, 6 * b + 3 + i] += wj * h[3]
                        for k, gid in enumerate(facet.nodes):
                            self.M[row, 3 * gid + i] += wj * N[k]
        # base positional Jacobian: D on beam columns, -M on solid columns
        self.base_J = np.zeros((nrow, self.n_dofs))
        self.base_J[:, : 3 * self.nS] = -self.M
        self.base_J[:, self.pos_off : self.pos_off + 6 * self.nB] = self.D

    def _vinv(self, eps):
        """Penalty weights eps / kappa_j per multiplier node (inactive: 0)."""
        out = np.zeros(self.nB)
        act = self.table.active
        out[act] = eps / self.table.kappa[act]
        return out

    # -- current-configuration kinematic vectors ----------------------------

    def _beam_dof_vector(self, bstate):
        xb = np.empty(6 * self.nB)
        xb[0::6] = bstate.r[:, 0]
        xb[1::6] = bstate.r[:, 1]
        xb[2::6] = bstate.r[:, 2]
        xb[3::6] = bstate.t[:, 0]
        xb[4::6] = bstate.t[:, 1]
        xb[5::6] = bstate.t[:, 2]
        return xb

    # -- CONS normal term ----------------------------------------------------

    def _q_segments(self, positions, second_order, lam=None):
        """Dual-number evaluation of q over all segments.

        First-order mode returns (q values, dq/dd_S dense); second-order
        mode returns the Hessian of lam . q with respect to solid dofs.
        """
        nrow = 3 * self.nB
        q = np.zeros(nrow)
        dq = np.zeros((nrow, 3 * self.nS)) if not second_order else None
        H = np.zeros((3 * self.nS, 3 * self.nS)) if second_order else None
        for seg in self.table.segments:
            a, b = self.beam.conn[seg.element]
            facet = self.smesh.facets[seg.facet]
            patch = self.smesh.patch_nodes(seg.facet)
            seeds = ad.seed(
                np.array([positions[g] for g in patch]).ravel(),
                second_order=second_order,
            )
            over = {
                int(g): np.array(seeds[3 * k : 3 * k + 3], dtype=object)
                for k, g in enumerate(patch)
            }
            pos = _Overlay(positions, over)
            nodals = srf.averaged_nodal_normals(self.smesh, pos, nodes=facet.nodes)
            cols = (3 * patch[:, None] + np.arange(3)[None, :]).ravel()
            s_acc = None
            for gp in seg.gps:
                nh = srf.interpolate_normal(facet, nodals, gp.xi, gp.eta)
                phi = [0.5 * (1.0 - gp.xi_b), 0.5 * (1.0 + gp.xi_b)]
                for jn, pj in ((a, phi[0]), (b, phi[1])):
                    coef = gp.w * pj * gp.gap0
                    for i in range(3):
                        comp = coef * nh[i]
                        row = 3 * jn + i
                        q[row] += comp.value
                        if not second_order:
                            dq[row, cols] += comp.grad
                        else:
                            term = lam[row] * comp
                            s_acc = term if s_acc is None else s_acc + term
            if second_order and s_acc is not None:
                H[np.ix_(cols, cols)] += s_acc.hess
        if second_order:
            return q, H
        return q, dq

    # -- rotational constraint ----------------------------------------------

    def _theta_segments(self, positions, bstate, second_order, lam=None):
        """Dual evaluation of the rotational constraint over all segments.

        First-order: returns (c_theta, J_theta dense over all dofs).
        Second-order: returns Hessian of lam . c_theta (multiplicative
        rotation seeds), without the skew correction.
        """
        nrow = 3 * self.nB
        c = np.zeros(nrow)
        J = np.zeros((nrow, self.n_dofs)) if not second_order else None
        H = np.zeros((self.n_dofs, self.n_dofs)) if second_order else None
        for seg in self.table.segments:
            a, b = self.beam.conn[seg.element]
            facet = self.smesh.facets[seg.facet]
            fnodes = np.array(sorted(int(g) for g in set(facet.nodes)))
            nsol = 3 * len(fnodes)
            nact = nsol + 6
            vals = np.concatenate(
                [np.array([positions[g] for g in fnodes]).ravel(), np.zeros(6)]
            )
            seeds = ad.seed(vals, second_order=second_order)
            over = {
                int(g): np.array(seeds[3 * k : 3 * k + 3], dtype=object)
                for k, g in enumerate(fnodes)
            }
            pos = _Overlay(positions, over)
            th1 = np.array(seeds[nsol : nsol + 3], dtype=object)
            th2 = np.array(seeds[nsol + 3 : nsol + 6], dtype=object)
            lam1 = np.dot(so3.exp_map(th1), bstate.triads[a])
            lam2 = np.dot(so3.exp_map(th2), bstate.triads[b])
            phi_rel = so3.rv(np.dot(lam2, lam1.T), check=False)
            cols = np.concatenate(
                [
                    (3 * fnodes[:, None] + np.arange(3)[None, :]).ravel(),
                    self.rot_off + 3 * a + np.arange(3),
                    self.rot_off + 3 * b + np.arange(3),
                ]
            )
            s_acc = None
            for gp in seg.gps:
                lam_g = srf.surface_triad(self.smesh, gp.triad_data, pos)
                t = 0.5 * (1.0 + gp.xi_b)
                lam_b = np.dot(
                    so3.exp_map(
                        np.array(
                            [t * phi_rel[0], t * phi_rel[1], t * phi_rel[2]],
                            dtype=object,
                        )
                    ),
                    lam1,
                )
                psi = so3.rv(np.dot(lam_g, lam_b.T), check=False)
                ang = np.sqrt(sum(ad.value_of(x) ** 2 for x in psi))
                if ang >= np.pi - 1e-3:
                    raise ConstraintRangeError(
                        f"relative rotation {ang:.4f} near pi at beam element "
                        f"{seg.element}"
                    )
                phi = [0.5 * (1.0 - gp.xi_b), 0.5 * (1.0 + gp.xi_b)]
                for jn, pj in ((a, phi[0]), (b, phi[1])):
                    wj = gp.w * pj
                    for i in range(3):
                        comp = wj * psi[i]
                        row = 3 * jn + i
                        c[row] += comp.value
                        if not second_order:
                            J[row, cols] += comp.grad
                        else:
                            term = lam[row] * comp
                            s_acc = term if s_acc is None else s_acc + term
            if second_order and s_acc is not None:
                H[np.ix_(cols, cols)] += s_acc.hess
        if second_order:
            return c, H
        return c, J

    # -- public evaluation ---------------------------------------------------

    def positional_constraints(self, d_solid, bstate):
        """Constraint residual c_r (3 per multiplier node) for the variant."""
        xs = (self.solid.X + d_solid).ravel()
        xb = self._beam_dof_vector(bstate)
        if self.config.variant == "CONS":
            q, _ = self._q_segments(self.solid.X + d_solid, second_order=False)
            return self.D @ xb - self.M @ xs - q
        if self.config.variant == "REF":
            return self.D @ xb - self.M @ xs
        xb0 = self._beam_dof_vector(bf.BeamState.reference(self.beam))
        return self.D @ (xb - xb0) - self.M @ (xs - self.solid.X.ravel())

    def assemble(self, d_solid, bstate, want_tangent=True):
        """Coupling residual (and consistent tangent) over all dofs.

        Returns (r, K, info) with info carrying the constraint residuals
        and reconstructed multipliers.
        """
        positions = self.solid.X + d_solid
        xs = positions.ravel()
        xb = self._beam_dof_vector(bstate)
        J = self.base_J.copy()
        if self.config.variant == "CONS":
            q, dq = self._q_segments(positions, second_order=False)
            c = self.D @ xb - self.M @ xs - q
            J[:, : 3 * self.nS] -= dq
        elif self.config.variant == "REF":
            c = self.D @ xb - self.M @ xs
        else:
            xb0 = self._beam_dof_vector(bf.BeamState.reference(self.beam))
            c = self.D @ (xb - xb0) - self.M @ (xs - self.solid.X.ravel())
        vinv = self._vinv(self.config.eps_r)
        lam = c * np.repeat(vinv, 3)
        r = J.T @ lam
        c_th = lam_th = None
        J_th = None
        if self.config.rotational and self.config.eps_theta > 0.0:
            c_th, J_th = self._theta_segments(positions, bstate, second_order=False)
            vinv_th = self._vinv(self.config.eps_theta)
            lam_th = c_th * np.repeat(vinv_th, 3)
            r += J_th.T @ lam_th
        K = None
        if want_tangent:
            K = J.T @ (J * np.repeat(vinv, 3)[:, None])
            if self.config.variant == "CONS":
                _, Hq = self._q_segments(positions, second_order=True, lam=lam)
                K[: 3 * self.nS, : 3 * self.nS] -= Hq
            if lam_th is not None:
                K += J_th.T @ (J_th * np.repeat(vinv_th, 3)[:, None])
                _, Hth = self._theta_segments(
                    positions, bstate, second_order=True, lam=lam_th
                )
                K += Hth
            # multiplicative-update correction on rotational diagonal blocks
            for anode in range(self.nB):
                sl = slice(self.rot_off + 3 * anode, self.rot_off + 3 * anode + 3)
                g = r[sl]
                K[sl, sl] -= 0.5 * so3.skew(g)
        info = {
            "c_r": c,
            "lambda_r": lam,
            "c_theta": c_th,
            "lambda_theta": lam_th,
        }
        return r, K, info

    def coupling_energy(self, d_solid, bstate):
        """Penalty potential 1/2 eps c^T V^-1 c (positional + rotational)."""
        c = self.positional_constraints(d_solid, bstate)
        vinv = np.repeat(self._vinv(self.config.eps_r), 3)
        total = 0.5 * float(c @ (vinv * c))
        if self.config.rotational and self.config.eps_theta > 0.0:
            positions = self.solid.X + d_solid
            c_th, _ = self._theta_segments(positions, bstate, second_order=False)
            vinv_th = np.repeat(self._vinv(self.config.eps_theta), 3)
            total += 0.5 * float(c_th @ (vinv_th * c_th))
        return total

    def conservation_audit(self, d_solid, bstate):
        """Net coupling force and net moment about the origin.

        Contracts the coupling residual with the six rigid-body motion
        generators of the current configuration.
        """
        r, _, info = self.assemble(d_solid, bstate, want_tangent=False)
        xs = self.solid.X + d_solid
        force = np.zeros(3)
        moment = np.zeros(3)
        for k in range(self.nS):
            f = r[3 * k : 3 * k + 3]
            force += f
            moment += np.cross(xs[k], f)
        for a in range(self.nB):
            fr = r[self.pos_off + 6 * a : self.pos_off + 6 * a + 3]
            ft = r[self.pos_off + 6 * a + 3 : self.pos_off + 6 * a + 6]
            m = r[self.rot_off + 3 * a : self.rot_off + 3 * a + 3]
            force += fr
            moment += np.cross(bstate.r[a], fr) + np.cross(bstate.t[a], ft) + m
        return force, moment, info


def penalty_condense(assembler, d_solid, bstate, K_uncoupled, R_uncoupled):
    """Condensed system: uncoupled blocks plus penalty-eliminated coupling."""
    r, K, _ = assembler.assemble(d_solid, bstate, want_tangent=True)
    from scipy.sparse import csr_matrix

    A = K_uncoupled + csr_matrix(K)
    return AssembledSystem(A, R_uncoupled + r)
