"""Geometrically exact beam elements: interpolation, strains, tangents."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from beamtie import beam_fem as bf
from beamtie import so3


def straight_mesh(n_el, length=1.0):
    n = n_el + 1
    r0 = np.zeros((n, 3))
    r0[:, 0] = np.linspace(0.0, length, n)
    t0 = np.tile([1.0, 0.0, 0.0], (n, 1))
    tri = np.tile(np.eye(3), (n, 1, 1))
    conn = np.array([[i, i + 1] for i in range(n_el)])
    return bf.BeamMesh(r0, t0, conn, tri)


def random_state(mesh, rng, scale=0.1):
    state = bf.BeamState.reference(mesh)
    state.r = state.r + scale * rng.standard_normal(state.r.shape)
    state.t = state.t + scale * rng.standard_normal(state.t.shape)
    for k in range(mesh.n_nodes):
        state.triads[k] = so3.exp_map(scale * rng.standard_normal(3)) @ state.triads[k]
    return state


def test_hermite_endpoint_interpolation():
    mesh = straight_mesh(2)
    rng = np.random.default_rng(0)
    r = rng.standard_normal((3, 3))
    t = rng.standard_normal((3, 3))
    pos, _ = bf.hermite_eval(mesh, 0, -1.0, r, t)
    assert_allclose(pos, r[0], atol=1e-14)
    pos, _ = bf.hermite_eval(mesh, 0, 1.0, r, t)
    assert_allclose(pos, r[1], atol=1e-14)


def test_hermite_partition_of_unity():
    mesh = straight_mesh(1, length=0.73)
    L = mesh.L_e[0]
    for xi in np.linspace(-1.0, 1.0, 20):
        h, _ = bf.hermite_shapes(xi, L)
        assert h[0] + h[2] == pytest.approx(1.0, abs=1e-14)


def test_straight_midpoint_and_unit_tangent():
    mesh = straight_mesh(1)
    pos, dr = bf.hermite_eval(mesh, 0, 0.0, mesh.r0, mesh.t0)
    assert_allclose(pos, 0.5 * (mesh.r0[0] + mesh.r0[1]), atol=1e-14)
    assert np.linalg.norm(dr) == pytest.approx(1.0, abs=1e-14)


def test_reference_strains_vanish():
    mesh = straight_mesh(3)
    state = bf.BeamState.reference(mesh)
    for e in range(3):
        for xi in (-0.7, 0.0, 0.5):
            gam, om = bf.beam_strains(mesh, e, xi, state)
            assert_allclose(gam, np.zeros(3), atol=1e-14)
            assert_allclose(om, np.zeros(3), atol=1e-14)


def test_axial_stretch_strain():
    mesh = straight_mesh(1)
    a = 1.3
    state = bf.BeamState.reference(mesh)
    state.r = state.r * a
    state.t = state.t * a
    gam, om = bf.beam_strains(mesh, 0, 0.2, state)
    assert_allclose(gam, [a - 1.0, 0.0, 0.0], atol=1e-13)
    assert_allclose(om, np.zeros(3), atol=1e-13)


def test_circular_arc_curvature():
    # bend one element into an arc of radius rho; midpoint curvature ~ 1/rho
    rho = 20.0
    L = 1.0
    phi = L / rho
    mesh = straight_mesh(1, length=L)
    state = bf.BeamState.reference(mesh)
    angles = [0.0, phi]
    for k, ang in enumerate(angles):
        state.r[k] = [rho * np.sin(ang), 0.0, rho * (1.0 - np.cos(ang))]
        state.t[k] = [np.cos(ang), 0.0, np.sin(ang)]
        state.triads[k] = so3.exp_map(np.array([0.0, -ang, 0.0]))
    _, om = bf.beam_strains(mesh, 0, 0.0, state)
    assert np.linalg.norm(om) == pytest.approx(1.0 / rho, rel=1e-3)


def test_energy_objectivity():
    mesh = straight_mesh(3)
    cs = bf.CrossSection(0.05, 100.0, 0.3)
    rng = np.random.default_rng(1)
    state = random_state(mesh, rng)
    e0 = bf.total_energy(mesh, cs, state)
    R = so3.exp_map(rng.standard_normal(3))
    c = rng.standard_normal(3)
    moved = state.copy()
    moved.r = state.r @ R.T + c
    moved.t = state.t @ R.T
    for k in range(mesh.n_nodes):
        moved.triads[k] = R @ state.triads[k]
    e1 = bf.total_energy(mesh, cs, moved)
    assert e1 == pytest.approx(e0, rel=1e-12)


def test_reference_residual_zero():
    mesh = straight_mesh(2)
    cs = bf.CrossSection(0.05, 100.0, 0.0)
    state = bf.BeamState.reference(mesh)
    r, _ = bf.beam_internal_force_tangent(mesh, 0, cs, state)
    assert np.abs(r).max() < 1e-14


def test_rigid_motion_residual_zero():
    mesh = straight_mesh(2)
    cs = bf.CrossSection(0.05, 100.0, 0.0)
    rng = np.random.default_rng(2)
    R = so3.exp_map(rng.standard_normal(3))
    c = rng.standard_normal(3)
    state = bf.BeamState.reference(mesh)
    state.r = state.r @ R.T + c
    state.t = state.t @ R.T
    for k in range(mesh.n_nodes):
        state.triads[k] = R @ state.triads[k]
    r, _ = bf.beam_internal_force_tangent(mesh, 0, cs, state)
    assert np.abs(r).max() < 1e-10


def test_tangent_matches_finite_differences():
    mesh = straight_mesh(1)
    cs = bf.CrossSection(0.05, 100.0, 0.2)
    rng = np.random.default_rng(3)
    state = random_state(mesh, rng, scale=0.05)
    r, K = bf.beam_internal_force_tangent(mesh, 0, cs, state)
    h = 1e-6
    scale = np.abs(K).max()
    worst = 0.0
    for i in range(18):
        rs = []
        for sgn in (1.0, -1.0):
            pert = state.copy()
            if i < 6:
                (pert.r if i < 3 else pert.t)[0][i % 3] += sgn * h
            elif i < 12:
                (pert.r if i < 9 else pert.t)[1][i % 3] += sgn * h
            else:
                node = 0 if i < 15 else 1
                dth = np.zeros(3)
                dth[i % 3] = sgn * h
                pert.triads[node] = so3.exp_map(dth) @ pert.triads[node]
            rp, _ = bf.beam_internal_force_tangent(
                mesh, 0, cs, pert, want_tangent=False
            )
            rs.append(rp)
        worst = max(worst, np.abs((rs[0] - rs[1]) / (2 * h) - K[:, i]).max() / scale)
    assert worst < 1e-5


def test_cantilever_euler_bernoulli():
    # slender tip-loaded cantilever against FL^3 / 3EI
    n_el = 8
    L, R, E = 2.0, 0.05, 100.0
    mesh = straight_mesh(n_el, length=L)
    cs = bf.CrossSection(R, E, 0.0)
    F_tip = 1e-6 * 3.0 * E * cs.I / L**3  # small deflection regime
    n_dofs = 9 * mesh.n_nodes
    F = np.zeros(n_dofs)
    F[6 * (mesh.n_nodes - 1) + 2] = F_tip
    state = bf.BeamState.reference(mesh)
    fixed = list(range(6)) + list(range(6 * mesh.n_nodes, 6 * mesh.n_nodes + 3))
    free = np.setdiff1d(np.arange(n_dofs), fixed)
    for _ in range(20):
        r, K = bf.assemble(mesh, cs, state, 0, n_dofs)
        res = r - F
        if np.linalg.norm(res[free]) < 1e-16:
            break
        K = np.asarray(K.todense())
        du = np.zeros(n_dofs)
        du[free] = np.linalg.solve(K[np.ix_(free, free)], -res[free])
        pos = du[: 6 * mesh.n_nodes].reshape(-1, 6)
        state.r = state.r + pos[:, :3]
        state.t = state.t + pos[:, 3:]
        rot = du[6 * mesh.n_nodes :].reshape(-1, 3)
        for k in range(mesh.n_nodes):
            state.triads[k] = so3.exp_map(rot[k]) @ state.triads[k]
    w_tip = state.r[-1, 2] - mesh.r0[-1, 2]
    w_eb = F_tip * L**3 / (3.0 * E * cs.I)
    assert w_tip == pytest.approx(w_eb, rel=0.01)


def test_line_load_total_force():
    mesh = straight_mesh(4, length=2.0)
    load = np.array([0.0, 0.3, -0.1])
    F = bf.line_load_force(mesh, load, 0, 9 * mesh.n_nodes)
    total = F[: 6 * mesh.n_nodes].reshape(-1, 6)[:, :3].sum(axis=0)
    assert_allclose(total, 2.0 * load, rtol=1e-12)


def test_misaligned_reference_triad_rejected():
    r0 = np.array([[0.0, 0, 0], [1.0, 0, 0]])
    t0 = np.array([[1.0, 0, 0], [1.0, 0, 0]])
    tri = np.tile(so3.exp_map(np.array([0.0, 0.0, 0.5])), (2, 1, 1))
    with pytest.raises(ValueError, match="misaligned"):
        bf.BeamMesh(r0, t0, np.array([[0, 1]]), tri)
