"""Mortar coupling: mortar matrices, constraint variants, conservation."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from beamtie import beam_fem as bf
from beamtie import meshgen
from beamtie import so3
from beamtie import surface as srf
from beamtie.model import Model, State
from beamtie.models import straight_beam_mesh
from beamtie.mortar import CouplingConfig, MortarAssembler
from beamtie.solid_fem import MaterialModel


def flat_model(variant="CONS", gap=0.07, rotational=True, n_gauss=6):
    solid = meshgen.block_mesh("hex8", 2, 2, 1, lengths=(1.0, 1.0, 0.25))
    beam = straight_beam_mesh(
        [0.1, 0.45, 0.25 + gap], [0.9, 0.55, 0.25 + gap], 2
    )
    return Model(
        solid=solid,
        material=MaterialModel("SaintVenantKirchhoff", 1.0, 0.0),
        beam=beam,
        section=bf.CrossSection(0.05, 100.0, 0.0),
        coupling=CouplingConfig(
            variant=variant, rotational=rotational, eps_r=50.0, eps_theta=0.2,
            n_gauss=n_gauss,
        ),
        coupling_faces=["zmax"],
    )


def random_state(model, rng, scale=0.02):
    state = State.reference(model)
    state.d_solid += scale * rng.standard_normal(state.d_solid.shape)
    du = np.zeros(model.n_dofs)
    du[model.pos_off :] = scale * rng.standard_normal(9 * model.beam.n_nodes)
    state.apply_increment(model, du)
    return state


def test_row_sums_equal_kappa():
    m = flat_model()
    asm = m.mortar()
    kap = asm.table.kappa
    # positional shape functions sum to one: each D row sums to kappa_j,
    # and so does each M row (facet partitions of unity)
    for j in range(m.beam.n_nodes):
        d_sum = asm.D[3 * j, 0::6].sum()  # x rows against nodal position columns
        m_sum = asm.M[3 * j, 0::3].sum()
        assert d_sum == pytest.approx(kap[j], abs=1e-13)
        assert m_sum == pytest.approx(kap[j], abs=1e-13)


def test_cons_reference_residual_machine_zero():
    m = flat_model("CONS")
    state = State.reference(m)
    c = m.mortar().positional_constraints(state.d_solid, state.beam)
    assert np.abs(c).max() < 1e-14


def test_disp_reference_residual_machine_zero():
    m = flat_model("DISP")
    state = State.reference(m)
    c = m.mortar().positional_constraints(state.d_solid, state.beam)
    assert np.abs(c).max() < 1e-14


def test_ref_reference_residual_is_weighted_gap():
    gap = 0.09
    m = flat_model("REF", gap=gap)
    state = State.reference(m)
    asm = m.mortar()
    c = asm.positional_constraints(state.d_solid, state.beam).reshape(-1, 3)
    for j in range(m.beam.n_nodes):
        assert_allclose(c[j], asm.table.kappa[j] * gap * np.array([0, 0, 1.0]),
                        atol=1e-14)


def test_variants_agree_at_zero_gap():
    # with the beam exactly on the surface all three constraints coincide
    rng = np.random.default_rng(0)
    states = None
    cs = {}
    for variant in ("CONS", "REF", "DISP"):
        m = flat_model(variant, gap=0.0)
        if states is None:
            states = random_state(m, rng)
        cs[variant] = m.mortar().positional_constraints(
            states.d_solid, states.beam
        )
    assert_allclose(cs["CONS"], cs["REF"], atol=1e-13)
    # DISP differs from CONS only through reference terms, which cancel here
    assert_allclose(cs["CONS"], cs["DISP"], atol=1e-13)


def test_gauss_rule_doubling_flat_exactness():
    # on a flat surface the coupling integrands are polynomial and the
    # 6-point rule is already exact: doubling must not change anything
    rng = np.random.default_rng(1)
    m6 = flat_model("CONS", n_gauss=6)
    m12 = flat_model("CONS", n_gauss=12)
    state = random_state(m6, rng)
    c6 = m6.mortar().positional_constraints(state.d_solid, state.beam)
    c12 = m12.mortar().positional_constraints(state.d_solid, state.beam)
    assert np.abs(c6 - c12).max() < 1e-12
    assert_allclose(m6.mortar().table.kappa, m12.mortar().table.kappa, atol=1e-13)


def test_conservation_cons_random_states():
    rng = np.random.default_rng(2)
    m = flat_model("CONS", gap=0.05)
    for _ in range(5):
        state = random_state(m, rng)
        force, moment, info = m.mortar().conservation_audit(
            state.d_solid, state.beam
        )
        lam = np.linalg.norm(info["lambda_r"])
        L = m.beam.L_e.sum()
        assert np.abs(force).max() < 1e-12 * max(lam * L, 1.0)
        assert np.abs(moment).max() < 1e-12 * max(lam * L, 1.0)


def test_disp_moment_leak():
    rng = np.random.default_rng(3)
    m = flat_model("DISP", gap=0.08)
    state = random_state(m, rng)
    _, moment, info = m.mortar().conservation_audit(state.d_solid, state.beam)
    lam = np.linalg.norm(info["lambda_r"])
    assert np.abs(moment).max() > 1e-3 * lam * 0.08 * 0.02


@pytest.mark.parametrize("variant", ["CONS", "REF", "DISP"])
def test_coupling_tangent_matches_finite_differences(variant):
    rng = np.random.default_rng(4)
    m = flat_model(variant, gap=0.04)
    asm = m.mortar()
    state = random_state(m, rng)
    r, K, _ = asm.assemble(state.d_solid, state.beam)
    h = 1e-6
    scale = np.abs(K).max()
    worst = 0.0
    cols = rng.choice(m.n_dofs, 40, replace=False)
    for i in cols:
        col = np.zeros(m.n_dofs)
        for sgn in (1.0, -1.0):
            pert = state.copy()
            du = np.zeros(m.n_dofs)
            du[i] = sgn * h
            pert.apply_increment(m, du)
            rp, _, _ = asm.assemble(pert.d_solid, pert.beam, want_tangent=False)
            col += sgn * rp / (2.0 * h)
        worst = max(worst, np.abs(col - K[:, i]).max() / scale)
    assert worst < 1e-5


def test_residual_is_energy_gradient():
    rng = np.random.default_rng(5)
    m = flat_model("CONS", gap=0.05)
    asm = m.mortar()
    state = random_state(m, rng)
    r, _, _ = asm.assemble(state.d_solid, state.beam, want_tangent=False)
    h = 1e-6
    for i in rng.choice(m.n_dofs, 12, replace=False):
        es = []
        for sgn in (1.0, -1.0):
            pert = state.copy()
            du = np.zeros(m.n_dofs)
            du[i] = sgn * h
            pert.apply_increment(m, du)
            es.append(asm.coupling_energy(pert.d_solid, pert.beam))
        fd = (es[0] - es[1]) / (2.0 * h)
        assert fd == pytest.approx(r[i], rel=2e-5, abs=1e-9)


def test_penalty_weights_only_on_active_nodes():
    # beam overhanging the surface: trailing nodes collect no weight
    solid = meshgen.block_mesh("hex8", 2, 2, 1, lengths=(1.0, 1.0, 0.25))
    beam = straight_beam_mesh([0.1, 0.5, 0.3], [2.5, 0.5, 0.3], 4)
    m = Model(
        solid=solid,
        material=MaterialModel("SaintVenantKirchhoff", 1.0, 0.0),
        beam=beam,
        section=bf.CrossSection(0.05, 100.0, 0.0),
        coupling=CouplingConfig(variant="CONS", rotational=False, eps_r=10.0),
        coupling_faces=["zmax"],
    )
    asm = m.mortar()
    assert asm.table.active[0] and asm.table.active[1]
    assert not asm.table.active[-1]
    state = State.reference(m)
    r, _, _ = asm.assemble(state.d_solid, state.beam, want_tangent=False)
    assert np.abs(r).max() < 1e-12


def test_rotational_constraint_reference_zero_and_objectivity():
    m = flat_model("CONS", gap=0.03)
    asm = m.mortar()
    state = State.reference(m)
    r, _, info = asm.assemble(state.d_solid, state.beam, want_tangent=False)
    assert np.abs(info["c_theta"]).max() < 1e-12
    # rigid rotation of everything leaves the coupling energy unchanged
    rng = np.random.default_rng(6)
    R = so3.exp_map(0.3 * rng.standard_normal(3))
    state2 = random_state(m, rng)
    e0 = asm.coupling_energy(state2.d_solid, state2.beam)
    moved = state2.copy()
    x_new = (m.solid.X + state2.d_solid) @ R.T
    moved.d_solid = x_new - m.solid.X
    moved.beam.r = state2.beam.r @ R.T
    moved.beam.t = state2.beam.t @ R.T
    for k in range(m.beam.n_nodes):
        moved.beam.triads[k] = R @ state2.beam.triads[k]
    e1 = asm.coupling_energy(moved.d_solid, moved.beam)
    assert e1 == pytest.approx(e0, rel=1e-10)
