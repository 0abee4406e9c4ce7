"""Problem definition: meshes, materials, boundary conditions, coupling.

The global unknown vector is ordered solid displacements (3 per node),
beam positional unknowns (6 per node: position, tangent), beam rotation
increments (3 per node).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import beam_fem as bf
from . import solid_fem as sf
from . import surface as srf
from .mortar import CouplingConfig, MortarAssembler

__all__ = ["Model", "State", "facet_quadrature"]


def facet_quadrature(kind):
    """2D quadrature for boundary facets (quads: 3x3 Gauss, tris: 4-point)."""
    if kind.startswith("quad"):
        x, w = np.polynomial.legendre.leggauss(3)
        pts = [(a, b) for a in x for b in x]
        wts = [wa * wb for wa in w for wb in w]
        return np.array(pts), np.array(wts)
    pts = np.array(
        [
            [1.0 / 3.0, 1.0 / 3.0],
            [0.6, 0.2],
            [0.2, 0.6],
            [0.2, 0.2],
        ]
    )
    wts = np.array([-27.0, 25.0, 25.0, 25.0]) / 96.0
    return pts, wts


@dataclass
class Model:
    """Immutable problem definition.

    Parameters
    ----------
    solid : SolidMesh
    material : MaterialModel
    beam : BeamMesh
    section : CrossSection
    coupling : CouplingConfig
    coupling_faces : list of str
        Face-set names forming the coupling surface.
    dirichlet : list of (node index array, component list)
        Zero-displacement constraints on solid nodes.
    tractions : list of (face set name, 3-vector)
        Dead surface tractions (N/m^2) on reference areas.
    body_load : 3-vector or None
        Dead body force density (N/m^3).
    beam_line_loads : list of (element index list, 3-vector)
        Constant line loads (N/m) on beam elements.
    beam_point_loads : list of (node index, 3-vector)
        Point forces on beam centerline nodes.
    beam_clamps : list of node indices
        Beam nodes with all nine unknowns fixed.
    name : str
    """

    solid: sf.SolidMesh
    material: sf.MaterialModel
    beam: bf.BeamMesh
    section: bf.CrossSection
    coupling: CouplingConfig
    coupling_faces: list
    dirichlet: list = field(default_factory=list)
    tractions: list = field(default_factory=list)
    body_load: object = None
    beam_line_loads: list = field(default_factory=list)
    beam_point_loads: list = field(default_factory=list)
    beam_clamps: list = field(default_factory=list)
    name: str = "model"
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_dofs(self):
        return 3 * self.solid.n_nodes + 9 * self.beam.n_nodes

    @property
    def pos_off(self):
        return 3 * self.solid.n_nodes

    @property
    def rot_off(self):
        return 3 * self.solid.n_nodes + 6 * self.beam.n_nodes

    def surface(self):
        if "surface" not in self._cache:
            self._cache["surface"] = srf.extract_surface(
                self.solid, self.coupling_faces
            )
        return self._cache["surface"]

    def mortar(self):
        if "mortar" not in self._cache:
            self._cache["mortar"] = MortarAssembler(
                self.solid, self.surface(), self.beam, self.coupling
            )
        return self._cache["mortar"]

    def fixed_dofs(self):
        fixed = set()
        for nodes, comps in self.dirichlet:
            for k in np.atleast_1d(nodes):
                for c in comps:
                    fixed.add(3 * int(k) + int(c))
        for a in self.beam_clamps:
            a = int(a)
            fixed.update(range(self.pos_off + 6 * a, self.pos_off + 6 * a + 6))
            fixed.update(range(self.rot_off + 3 * a, self.rot_off + 3 * a + 3))
        return np.array(sorted(fixed), dtype=int)

    def external_force(self):
        """Dead external load vector at full load scale."""
        F = np.zeros(self.n_dofs)
        for name, t in self.tractions:
            t = np.asarray(t, dtype=float)
            for elem, face in self.solid.face_sets[name]:
                fkind, local = sf.FACE_TABLES[self.solid.kind][face]
                gnodes = self.solid.conn[elem][list(local)]
                Xf = self.solid.X[gnodes]
                pts, wts = facet_quadrature(fkind)
                for (xi, eta), w in zip(pts, wts):
                    N, dN = srf.facet_shape(fkind, xi, eta)
                    d1 = dN[:, 0] @ Xf
                    d2 = dN[:, 1] @ Xf
                    dA = np.linalg.norm(np.cross(d1, d2))
                    for k, gid in enumerate(gnodes):
                        F[3 * gid : 3 * gid + 3] += w * dA * N[k] * t
        if self.body_load is not None:
            b = np.asarray(self.body_load, dtype=float)
            pts, wts = sf.quadrature(self.solid.kind)
            for c in self.solid.conn:
                Xe = self.solid.X[c]
                for xi, w in zip(pts, wts):
                    N, dN = sf.shape_functions(self.solid.kind, xi)
                    detJ = np.linalg.det(Xe.T @ dN)
                    for k, gid in enumerate(c):
                        F[3 * gid : 3 * gid + 3] += w * detJ * N[k] * b
        for elems, load in self.beam_line_loads:
            sub = np.asarray(load, dtype=float)
            Fb = _line_load_subset(self.beam, elems, sub, self.pos_off, self.n_dofs)
            F += Fb
        for node, f in self.beam_point_loads:
            F[self.pos_off + 6 * int(node) : self.pos_off + 6 * int(node) + 3] += (
                np.asarray(f, dtype=float)
            )
        return F


def _line_load_subset(beam, elems, load, pos_off, n_dofs):
    F = np.zeros(n_dofs)
    for e in elems:
        a, b = beam.conn[e]
        L = beam.L_e[e]
        for xi, w in zip(bf.GAUSS_XI, bf.GAUSS_W):
            h, dh = bf.hermite_shapes(xi, L)
            dr0 = (
                dh[0] * beam.r0[a] + dh[1] * beam.t0[a]
                + dh[2] * beam.r0[b] + dh[3] * beam.t0[b]
            )
            j = np.linalg.norm(dr0)
            F[pos_off + 6 * a : pos_off + 6 * a + 3] += w * j * h[0] * load
            F[pos_off + 6 * a + 3 : pos_off + 6 * a + 6] += w * j * h[1] * load
            F[pos_off + 6 * b : pos_off + 6 * b + 3] += w * j * h[2] * load
            F[pos_off + 6 * b + 3 : pos_off + 6 * b + 6] += w * j * h[3] * load
    return F


@dataclass
class State:
    """Solution state: solid displacements and beam kinematics."""

    d_solid: np.ndarray
    beam: bf.BeamState

    @classmethod
    def reference(cls, model):
        return cls(
            np.zeros((model.solid.n_nodes, 3)), bf.BeamState.reference(model.beam)
        )

    def copy(self):
        return State(self.d_solid.copy(), self.beam.copy())

    def apply_increment(self, model, du):
        """Additive update of positions/tangents, multiplicative for triads."""
        from . import so3

        nS = model.solid.n_nodes
        self.d_solid += du[: 3 * nS].reshape(-1, 3)
        pos = du[model.pos_off : model.rot_off].reshape(-1, 6)
        self.beam.r += pos[:, :3]
        self.beam.t += pos[:, 3:]
        rot = du[model.rot_off :].reshape(-1, 3)
        for a in range(model.beam.n_nodes):
            self.beam.triads[a] = so3.exp_map(rot[a]) @ self.beam.triads[a]
