"""Built-in verification models: patch tests, half-pipe, supported plate.

Each builder returns a fully configured :class:`~beamtie.model.Model`; the
geometries are generated procedurally so example inputs are code rather
than checked-in meshes.
"""

from __future__ import annotations

import numpy as np

from . import beam_fem as bf
from . import meshgen
from . import so3
from . import solid_fem as sf
from .model import Model
from .mortar import CouplingConfig

__all__ = [
    "straight_beam_mesh",
    "curve_beam_mesh",
    "patch_test_planar",
    "patch_test_curved",
    "half_pipe",
    "supported_plate",
    "MODEL_BUILDERS",
]


def straight_beam_mesh(p0, p1, n_el):
    """Straight beam from p0 to p1 with n_el two-noded elements."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    n = n_el + 1
    r0 = np.linspace(p0, p1, n)
    axis = (p1 - p0) / np.linalg.norm(p1 - p0)
    t0 = np.tile(axis, (n, 1))
    tri = np.tile(so3.smallest_rotation_triad(axis), (n, 1, 1))
    conn = np.array([[i, i + 1] for i in range(n_el)])
    return bf.BeamMesh(r0, t0, conn, tri)


def curve_beam_mesh(curve, tangent, params, n_el):
    """Beam sampled from an analytic space curve.

    curve/tangent map the curve parameter to position / (non-unit) tangent;
    nodal tangents are normalized (arc-length convention) and reference
    triads are smallest-rotation frames of the tangent.
    """
    s = np.linspace(params[0], params[1], n_el + 1)
    r0 = np.array([curve(x) for x in s])
    t0 = np.array([tangent(x) for x in s])
    t0 = t0 / np.linalg.norm(t0, axis=1)[:, None]
    tri = np.array([so3.smallest_rotation_triad(t) for t in t0])
    conn = np.array([[i, i + 1] for i in range(n_el)])
    return bf.BeamMesh(r0, t0, conn, tri)


def _merge_beams(meshes):
    """Concatenate independent beam meshes into one BeamMesh."""
    r0 = np.vstack([m.r0 for m in meshes])
    t0 = np.vstack([m.t0 for m in meshes])
    tri = np.vstack([m.triads0 for m in meshes])
    conns = []
    L = []
    off = 0
    for m in meshes:
        conns.append(m.conn + off)
        L.append(m.L_e)
        off += m.n_nodes
    return bf.BeamMesh(r0, t0, np.vstack(conns), tri, L_e=np.concatenate(L))


def patch_test_planar(kind="hex8", variant="CONS", cells=(4, 4, 5)):
    """Planar constant stress transfer: block with two coincident beams.

    1 x 1 x 1.2 m block (bottom fixed), two coincident straight beams a
    radius above the top face, loaded by opposing line loads of
    0.025 N/m so the net coupling force on the solid vanishes.
    """
    R = 0.05
    solid = meshgen.block_mesh(
        kind, *cells, lengths=(1.0, 1.0, 1.2), origin=(-0.5, -0.5, 0.0)
    )
    material = sf.MaterialModel("SaintVenantKirchhoff", 1.0, 0.0)
    b1 = straight_beam_mesh([-0.5, 0.0, 1.2 + R], [0.5, 0.0, 1.2 + R], 5)
    b2 = straight_beam_mesh([-0.5, 0.0, 1.2 + R], [0.5, 0.0, 1.2 + R], 7)
    beam = _merge_beams([b1, b2])
    section = bf.CrossSection(R, 100.0, 0.0)
    t = 0.025
    return Model(
        solid=solid,
        material=material,
        beam=beam,
        section=section,
        coupling=CouplingConfig(
            variant=variant, rotational=True, eps_r=100.0, eps_theta=0.1
        ),
        coupling_faces=["zmax"],
        dirichlet=[(solid.node_sets["zmin"], [0, 1, 2])],
        beam_line_loads=[
            (list(range(5)), [0.0, 0.0, t]),
            (list(range(5, 12)), [0.0, 0.0, -t]),
        ],
        name=f"patch-planar-{kind}-{variant}",
    )


def _patch_surface_f(i, j):
    return 1.25 - i * i - j * j


def patch_test_curved(kind="hex8", variant="CONS", cells=(4, 4, 5)):
    """Curved constant stress transfer: paraboloid top surface.

    Top surface z = 5/4 - x^2 - y^2; beams follow the surface curve at
    y = 0, offset by the beam radius along the surface normal.  The line
    load on the 7-element beam carries the length-compensation factor from
    the slightly different discretized arc lengths.
    """
    R = 0.05
    block = meshgen.block_mesh(
        kind, *cells, lengths=(1.0, 1.0, 1.2), origin=(-0.5, -0.5, 0.0)
    )

    def warp(x):
        out = x.copy()
        out[2] = x[2] / 1.2 * _patch_surface_f(x[0], x[1])
        return out

    solid = meshgen.map_mesh(block, warp)
    material = sf.MaterialModel("SaintVenantKirchhoff", 1.0, 0.0)

    def curve(i):
        f = _patch_surface_f(i, 0.0)
        n = np.array([2.0 * i, 0.0, 1.0]) / np.sqrt(1.0 + 4.0 * i * i)
        return np.array([i, 0.0, f]) + R * n

    def tangent(i):
        h = 1e-7
        return (curve(i + h) - curve(i - h)) / (2.0 * h)

    b1 = curve_beam_mesh(curve, tangent, (-0.5, 0.5), 5)
    b2 = curve_beam_mesh(curve, tangent, (-0.5, 0.5), 7)
    beam = _merge_beams([b1, b2])
    section = bf.CrossSection(R, 100.0, 0.0)
    t = 0.025
    return Model(
        solid=solid,
        material=material,
        beam=beam,
        section=section,
        coupling=CouplingConfig(
            variant=variant, rotational=True, eps_r=100.0, eps_theta=0.1
        ),
        coupling_faces=["zmax"],
        dirichlet=[(solid.node_sets["zmin"], [0, 1, 2])],
        beam_line_loads=[
            (list(range(5)), [0.0, 0.0, t]),
            (list(range(5, 12)), [0.0, 0.0, -t * 0.9995346]),
        ],
        name=f"patch-curved-{kind}-{variant}",
    )


def half_pipe(variant="CONS", loaded=True, kind="hex8"):
    """Half-pipe with a helix-shaped beam on its outer surface.

    Outer radius 1 m, inner radius 0.8 m, length 1 m along e2; the helix
    (radius 1.05 m, pitch 2 m) is offset 0.05 m from the outer surface.
    The solid end face at the helix start is fixed; optionally a tip force
    0.0004 N e3 acts on the other end of the beam.
    """
    block = meshgen.block_mesh(kind, 2, 12, 4, lengths=(1.0, 1.0, 1.0))

    def warp(x):
        # angular coordinate runs backwards so the mapped elements keep a
        # positive Jacobian (right-handed block axes)
        r = 0.8 + 0.2 * x[0]
        alpha = np.pi * (1.0 - x[1])
        return np.array([r * np.cos(alpha), x[2], r * np.sin(alpha)])

    solid = meshgen.map_mesh(block, warp)
    material = sf.MaterialModel("CompressibleNeoHookean", 1.0, 0.0)

    r_b, pitch = 1.05, 2.0

    def curve(alpha):
        return np.array(
            [r_b * np.cos(alpha), pitch * alpha / (2.0 * np.pi), r_b * np.sin(alpha)]
        )

    def tangent(alpha):
        return np.array(
            [-r_b * np.sin(alpha), pitch / (2.0 * np.pi), r_b * np.cos(alpha)]
        )

    beam = curve_beam_mesh(curve, tangent, (0.0, np.pi), 10)
    section = bf.CrossSection(0.1, 50.0, 0.0)
    loads = []
    if loaded:
        loads = [(beam.n_nodes - 1, [0.0, 0.0, 0.0004])]
    return Model(
        solid=solid,
        material=material,
        beam=beam,
        section=section,
        coupling=CouplingConfig(
            variant=variant, rotational=True, eps_r=10.0, eps_theta=1.0
        ),
        coupling_faces=["xmax"],
        dirichlet=[(solid.node_sets["ymax"], [0, 1, 2])],
        beam_point_loads=loads,
        name=f"half-pipe-{variant}",
    )


def supported_plate(rotational=True, kind="hex8", eps_r=100.0):
    """Plate reinforced by a beam strut on its top surface.

    3 x 1 x 0.1 m plate loaded from below with 0.0002 N/m^2; beam parallel
    to e1 at y = 0.85, resting a radius above the top face; plate and beam
    clamped at x = 3.
    """
    R = 0.075
    solid = meshgen.block_mesh(kind, 30, 10, 1, lengths=(3.0, 1.0, 0.1))
    material = sf.MaterialModel("CompressibleNeoHookean", 1.0, 0.0)
    beam = straight_beam_mesh([0.0, 0.85, 0.1 + R], [3.0, 0.85, 0.1 + R], 10)
    section = bf.CrossSection(R, 100.0, 0.0)
    return Model(
        solid=solid,
        material=material,
        beam=beam,
        section=section,
        coupling=CouplingConfig(
            variant="CONS", rotational=rotational, eps_r=eps_r, eps_theta=0.1
        ),
        coupling_faces=["zmax"],
        dirichlet=[(solid.node_sets["xmax"], [0, 1, 2])],
        tractions=[("zmin", [0.0, 0.0, 0.0002])],
        beam_clamps=[beam.n_nodes - 1],
        name="plate-full" if rotational else "plate-pos",
    )


MODEL_BUILDERS = {
    "patch-planar": patch_test_planar,
    "patch-curved": patch_test_curved,
    "half-pipe": half_pipe,
    "plate": supported_plate,
}
