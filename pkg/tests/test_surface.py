"""Surface extraction, averaged normal field, projection, surface triads."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from beamtie import meshgen
from beamtie import so3
from beamtie import surface as srf


def flat_surface(nx=2, ny=2, kind="hex8"):
    solid = meshgen.block_mesh(kind, nx, ny, 1, lengths=(1.0, 1.0, 0.3))
    smesh = srf.extract_surface(solid, ["zmax"])
    return solid, smesh


def paraboloid_surface(kind="hex8", cells=(4, 4, 2)):
    block = meshgen.block_mesh(
        kind, *cells, lengths=(1.0, 1.0, 1.2), origin=(-0.5, -0.5, 0.0)
    )

    def warp(x):
        out = x.copy()
        out[2] = x[2] / 1.2 * (1.25 - x[0] ** 2 - x[1] ** 2)
        return out

    solid = meshgen.map_mesh(block, warp)
    return solid, srf.extract_surface(solid, ["zmax"])


def test_single_hex_top_face():
    solid = meshgen.block_mesh("hex8", 1, 1, 1)
    smesh = srf.extract_surface(solid, ["zmax"])
    assert len(smesh.facets) == 1
    assert smesh.facets[0].kind == "quad4"


def test_counting_and_adjacency():
    solid = meshgen.block_mesh("hex8", 2, 2, 2)
    smesh = srf.extract_surface(solid, ["zmax"])
    assert len(smesh.facets) == 4
    assert len(smesh.surf_nodes) == 9
    counts = sorted(len(smesh.node_adj[g]) for g in smesh.surf_nodes)
    assert counts == [1, 1, 1, 1, 2, 2, 2, 2, 4]


def test_unknown_face_set_raises():
    solid = meshgen.block_mesh("hex8", 1, 1, 1)
    with pytest.raises(srf.TopologyError, match="unknown"):
        srf.extract_surface(solid, ["nope"])


def test_interior_face_raises():
    solid = meshgen.block_mesh("hex8", 2, 1, 1)
    solid.face_sets["bad"] = [(0, 3)]  # +x face of element 0 is interior
    with pytest.raises(srf.TopologyError, match="interior"):
        srf.extract_surface(solid, ["bad"])


def test_tet_orientation_audit():
    solid = meshgen.block_mesh("tet4", 2, 2, 2)
    smesh = srf.extract_surface(solid, ["zmax", "xmin", "ymax"])
    for f in smesh.facets:
        centroid = solid.X[solid.conn[f.elem]].mean(axis=0)
        xi, eta = 1.0 / 3.0, 1.0 / 3.0
        N, dN = srf.facet_shape(f.kind, xi, eta)
        Xf = solid.X[f.nodes]
        n = np.cross(dN[:, 0] @ Xf, dN[:, 1] @ Xf)
        assert n @ (N @ Xf - centroid) > 0.0


def test_flat_plane_normals():
    solid, smesh = flat_surface()
    nf = srf.NormalField(smesh, solid.X)
    for g in smesh.surf_nodes:
        assert_allclose(nf.node_normal(g), [0.0, 0.0, 1.0], atol=1e-14)
    for fid in range(len(smesh.facets)):
        assert_allclose(nf.evaluate(fid, 0.3, -0.4), [0.0, 0.0, 1.0], atol=1e-14)


def test_right_angle_edge_bisector():
    # two quad facets meeting at 90 degrees: edge normal bisects at 45 degrees
    from beamtie.solid_fem import SolidMesh

    # element 1 is a unit cube standing on top of element 0's far edge; the
    # two selected faces (+z of element 0, -x of element 1) meet at 90
    # degrees along the edge through nodes 5 and 6
    X = np.array(
        [
            [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
            [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
            [2, 0, 1], [2, 1, 1], [2, 0, 2], [2, 1, 2],
            [1, 0, 2], [1, 1, 2],
        ],
        dtype=float,
    )
    conn = np.array([[0, 1, 2, 3, 4, 5, 6, 7], [8, 10, 11, 9, 5, 12, 13, 6]])
    solid = SolidMesh(X, "hex8", conn)
    solid.face_sets["tops"] = [(0, 1), (1, 1)]
    smesh = srf.extract_surface(solid, ["tops"])
    nf = srf.NormalField(smesh, solid.X)
    bisector = np.array([-1.0, 0.0, 1.0]) / np.sqrt(2.0)
    for g in (5, 6):  # nodes on the shared edge
        assert_allclose(nf.node_normal(g), bisector, atol=1e-12)


def test_curved_field_continuity():
    solid, smesh = paraboloid_surface()
    nf = srf.NormalField(smesh, solid.X)
    for fid, facet in enumerate(smesh.facets):
        for k, g in enumerate(facet.nodes):
            xi, eta = srf.FACET_PARENT_NODES[facet.kind][k]
            assert_allclose(nf.evaluate(fid, xi, eta), nf.node_normal(g), atol=1e-14)


def test_degenerate_normal_raises():
    # fold a facet back onto its neighbor: the averaged normal cancels
    from beamtie.solid_fem import SolidMesh

    X = np.array(
        [
            [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
            [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
            [2, 0, 0], [2, 1, 0], [2, 0, 1], [2, 1, 1],
        ],
        dtype=float,
    )
    conn = np.array([[0, 1, 2, 3, 4, 5, 6, 7], [1, 8, 9, 2, 5, 10, 11, 6]])
    solid = SolidMesh(X, "hex8", conn)
    solid.face_sets["tops"] = [(0, 1), (1, 1)]
    smesh = srf.extract_surface(solid, ["tops"])
    positions = solid.X.copy()
    # fold element 1's top face completely over element 0's
    R = so3.exp_map(np.array([0.0, np.pi, 0.0]))
    pivot = np.array([1.0, 0.0, 1.0])
    for k in (8, 9, 10, 11):
        positions[k] = pivot + R @ (positions[k] - pivot)
    with pytest.raises(srf.DegenerateNormalError):
        srf.averaged_nodal_normals(smesh, positions)


def test_projection_flat_plane():
    solid, smesh = flat_surface()
    normals = srf.averaged_nodal_normals(smesh, solid.X)
    res = srf.closest_point_projection(
        np.array([0.3, 0.4, 1.3]), smesh, solid.X, normals
    )
    assert res.converged
    assert_allclose(res.surface_point, [0.3, 0.4, 0.3], atol=1e-12)
    assert res.gap == pytest.approx(1.0, abs=1e-12)


def test_projection_point_on_surface():
    solid, smesh = flat_surface()
    normals = srf.averaged_nodal_normals(smesh, solid.X)
    res = srf.closest_point_projection(
        np.array([0.25, 0.25, 0.3]), smesh, solid.X, normals
    )
    assert abs(res.gap) < 1e-12
    assert_allclose(res.surface_point, [0.25, 0.25, 0.3], atol=1e-12)


def test_projection_recovers_seeded_gap_on_curved_surface():
    solid, smesh = paraboloid_surface()
    normals = srf.averaged_nodal_normals(smesh, solid.X)
    rng = np.random.default_rng(4)
    for _ in range(10):
        fid = rng.integers(0, len(smesh.facets))
        xi, eta = rng.uniform(-0.9, 0.9, 2)
        f = smesh.facets[fid]
        N, _ = srf.facet_shape(f.kind, xi, eta)
        x0 = N @ solid.X[f.nodes]
        n = srf.interpolate_normal(f, normals, xi, eta).astype(float)
        g = rng.uniform(0.01, 0.2)
        point = x0 + g * n
        res = srf.closest_point_projection(point, smesh, solid.X, normals, fid)
        # converged relative vector is parallel to the interpolated normal
        v = point - res.surface_point
        n_c = srf.interpolate_normal(f, normals, res.xi, res.eta).astype(float)
        assert np.linalg.norm(v - res.gap * n_c) < 1e-9
        assert res.gap == pytest.approx(g, abs=1e-9)


def test_projection_failure_far_point():
    solid, smesh = flat_surface()
    normals = srf.averaged_nodal_normals(smesh, solid.X)
    with pytest.raises(srf.ProjectionError):
        srf.closest_point_projection(
            np.array([50.0, 50.0, 50.0]), smesh, solid.X, normals
        )


def _triad_setup(curved=False):
    if curved:
        solid, smesh = paraboloid_surface()
        point = np.array([0.1, 0.05, 1.30])
    else:
        solid, smesh = flat_surface()
        point = np.array([0.4, 0.5, 0.45])
    normals = srf.averaged_nodal_normals(smesh, solid.X)
    res = srf.closest_point_projection(point, smesh, solid.X, normals)
    beam_triad = so3.smallest_rotation_triad(np.array([1.0, 0.2, 0.1]))
    data = srf.reference_surface_triad_data(smesh, res, beam_triad)
    return solid, smesh, data, beam_triad


@pytest.mark.parametrize("curved", [False, True])
def test_surface_triad_reference_identity(curved):
    solid, smesh, data, beam_triad = _triad_setup(curved)
    lam = srf.surface_triad(smesh, data, solid.X)
    assert_allclose(lam, beam_triad, atol=1e-12)


def test_surface_triad_objectivity():
    solid, smesh, data, _ = _triad_setup(curved=True)
    rng = np.random.default_rng(5)
    R = so3.exp_map(rng.standard_normal(3))
    lam0 = srf.surface_triad(smesh, data, solid.X)
    lam1 = srf.surface_triad(smesh, data, solid.X @ R.T + rng.standard_normal(3))
    assert_allclose(lam1, R @ lam0, atol=1e-12)


def test_surface_triad_interior_deformation_invariance():
    solid, smesh, data, _ = _triad_setup(curved=True)
    lam0 = srf.surface_triad(smesh, data, solid.X)
    positions = solid.X.copy()
    interior = np.setdiff1d(np.arange(solid.n_nodes), list(smesh.surf_nodes))
    rng = np.random.default_rng(6)
    positions[interior] += 0.2 * rng.standard_normal((interior.size, 3))
    lam1 = srf.surface_triad(smesh, data, positions)
    assert_allclose(lam1, lam0, atol=0.0)


def test_surface_triad_rank_one_normal_stretch_invariance():
    # F = I + a (x) N moves the flat surface rigidly along itself: the
    # in-plane derivatives, hence the triad, must not change
    solid, smesh, data, _ = _triad_setup(curved=False)
    lam0 = srf.surface_triad(smesh, data, solid.X)
    N = np.array([0.0, 0.0, 1.0])
    a = np.array([0.05, -0.03, 0.2])
    positions = solid.X + np.outer(solid.X @ N, a)
    lam1 = srf.surface_triad(smesh, data, positions)
    assert_allclose(lam1, lam0, atol=1e-12)


def test_singular_director_raises():
    solid, smesh = flat_surface()
    normals = srf.averaged_nodal_normals(smesh, solid.X)
    res = srf.closest_point_projection(
        np.array([0.5, 0.5, 0.5]), smesh, solid.X, normals
    )
    vertical = so3.smallest_rotation_triad(np.array([0.0, 0.0, 1.0]))
    with pytest.raises(srf.SingularDirectorError):
        srf.reference_surface_triad_data(smesh, res, vertical)
