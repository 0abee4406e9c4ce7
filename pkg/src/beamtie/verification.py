"""End-to-end verification suite for the coupled beam-to-surface solver.

Each check builds its model from the generators in :mod:`beamtie.models`,
runs the solver and compares against analytic expectations (constant
stress transfer, conservation, penalty scaling, tangent consistency).
The checks are used both by the command line ``verify`` subcommand and
by the automated test suite.
"""

from __future__ import annotations

import time

import numpy as np

from . import beam_fem as bf
from . import models
from . import solid_fem as sf
from . import solver
from .model import State

__all__ = ["run_check", "run_all", "CHECKS"]


def _result(name, passed, details):
    return {"name": name, "passed": bool(passed), "details": details}


def _max_beam_curvature(model, state):
    worst = 0.0
    for e in range(model.beam.n_elements):
        _, omega = bf.beam_strains(model.beam, e, 0.0, state.beam)
        worst = max(worst, float(np.hypot(omega[1], omega[2])))
    return worst


def check_planar_patch():
    """Constant stress transfer on the planar block, every element kind."""
    details = {}
    passed = True
    for kind in ["hex8", "hex20", "hex27", "tet4", "tet10"]:
        for variant in ["CONS", "DISP"]:
            t0 = time.time()
            m = models.patch_test_planar(kind, variant)
            state, _ = solver.solve(m, solver.SolveConfig(steps=2))
            dt = time.time() - t0
            u = float(np.linalg.norm(state.d_solid, axis=1).max())
            s33 = float(
                np.abs(
                    sf.recover_nodal_stress(m.solid, m.material, state.d_solid)
                ).max()
            )
            kap = _max_beam_curvature(m, state)
            ok = u <= 1e-9 and s33 <= 1e-9 and kap <= 1e-9 and dt < 30.0
            details[f"{kind}-{variant}"] = {
                "max_u": u, "max_S33": s33, "max_curvature": kap,
                "runtime_s": dt, "passed": ok,
            }
            passed = passed and ok
    return _result("planar constant stress transfer (CONS/DISP)", passed, details)


def check_planar_ref():
    """REF variant: beams sink onto the surface, stress state stays zero."""
    m = models.patch_test_planar("hex8", "REF")
    state, _ = solver.solve(m, solver.SolveConfig(steps=2))
    dz1 = float((state.beam.r[:6, 2] - m.beam.r0[:6, 2]).mean())
    dz2 = float((state.beam.r[6:, 2] - m.beam.r0[6:, 2]).mean())
    s33 = float(
        np.abs(sf.recover_nodal_stress(m.solid, m.material, state.d_solid)).max()
    )
    ok = (-0.0505 <= dz1 <= -0.0495) and (-0.0505 <= dz2 <= -0.0495) and s33 <= 1e-9
    return _result(
        "planar REF variant (beams offset by -R e3)",
        ok,
        {"mean_dz_beam1": dz1, "mean_dz_beam2": dz2, "max_S33": s33},
    )


def check_curved_patch():
    """Curved surface: CONS/DISP strain energy far below REF's."""
    energies = {}
    for variant in ["CONS", "DISP", "REF"]:
        m = models.patch_test_curved("hex8", variant)
        state, _ = solver.solve(m, solver.SolveConfig(steps=2))
        energies[variant] = float(
            sf.total_energy(m.solid, m.material, state.d_solid)
            + bf.total_energy(m.beam, m.section, state.beam)
        )
    rc = energies["CONS"] / energies["REF"]
    rd = energies["DISP"] / energies["REF"]
    ok = rc <= 1e-2 and rd <= 1e-2
    return _result(
        "curved constant stress transfer (energy ordering)",
        ok,
        {"energies": energies, "ratio_CONS": rc, "ratio_DISP": rd},
    )


def _random_audit_model(kind, variant, rng):
    """Small flat-surface model with a beam at a random reference gap."""
    R = 0.05
    solid = models.meshgen.block_mesh(kind, 2, 2, 1, lengths=(1.0, 1.0, 0.25))
    gap = float(rng.uniform(0.01 * R, 2.0 * R))
    beam = models.straight_beam_mesh(
        [0.15, 0.45, 0.25 + gap], [0.85, 0.55, 0.25 + gap], 2
    )
    m = models.Model(
        solid=solid,
        material=sf.MaterialModel("SaintVenantKirchhoff", 1.0, 0.0),
        beam=beam,
        section=bf.CrossSection(R, 100.0, 0.0),
        coupling=models.CouplingConfig(
            variant=variant, rotational=True, eps_r=50.0, eps_theta=0.2
        ),
        coupling_faces=["zmax"],
        name="audit",
    )
    return m, gap


def _random_state(m, rng, scale):
    state = State.reference(m)
    state.d_solid += scale * rng.standard_normal(state.d_solid.shape)
    du = np.zeros(m.n_dofs)
    du[m.pos_off :] = scale * rng.standard_normal(9 * m.beam.n_nodes)
    state.apply_increment(m, du)
    return state


def check_conservation():
    """Randomized conservation audit: CONS conserves, DISP leaks moment."""
    rng = np.random.default_rng(20260824)
    scale = 0.02
    worst_cons = 0.0
    min_disp = np.inf
    n_ok = 0
    for i in range(50):
        kind = "hex8" if i % 2 == 0 else "tet4"
        m, gap = _random_audit_model(kind, "CONS", rng)
        state = _random_state(m, rng, scale)
        force, moment, info = m.mortar().conservation_audit(state.d_solid, state.beam)
        lam_norm = float(np.linalg.norm(info["lambda_r"]))
        L = float(m.beam.L_e.sum())
        viol = max(np.abs(force).max(), np.abs(moment).max()) / (lam_norm * L)
        worst_cons = max(worst_cons, viol)
        cons_ok = viol <= 1e-11

        md, _ = _random_audit_model(kind, "DISP", rng)
        md.beam, md.section = m.beam, m.section
        sd = State(state.d_solid.copy(), state.beam.copy())
        _, moment_d, info_d = md.mortar().conservation_audit(sd.d_solid, sd.beam)
        lam_d = float(np.linalg.norm(info_d["lambda_r"]))
        rel = np.abs(moment_d).max() / (lam_d * gap * scale + 1e-300)
        min_disp = min(min_disp, rel)
        disp_ok = rel > 1e-3
        n_ok += cons_ok and disp_ok
    ok = n_ok == 50
    return _result(
        "conservation audit (50 random configurations)",
        ok,
        {
            "configs_passed": n_ok,
            "worst_CONS_violation": worst_cons,
            "min_DISP_moment_ratio": float(min_disp),
        },
    )


def check_half_pipe():
    """Unloaded half-pipe: CONS/DISP inert, REF stores energy."""
    details = {}
    passed = True
    for variant in ["CONS", "DISP", "REF"]:
        m = models.half_pipe(variant, loaded=False)
        state, _ = solver.solve(m, solver.SolveConfig(steps=1))
        e = float(solver.total_internal_energy(m, state))
        u = float(
            max(
                np.linalg.norm(state.d_solid, axis=1).max(),
                np.linalg.norm(state.beam.r - m.beam.r0, axis=1).max(),
            )
        )
        if variant == "REF":
            ok = e > 1e-6
        else:
            ok = abs(e) <= 1e-10 and u <= 1e-10
        details[variant] = {"energy": e, "max_u": u, "passed": ok}
        passed = passed and ok
    return _result("unloaded half-pipe (zero/zero/positive energy)", passed, details)


def check_plate_stiffening():
    """Rotational coupling stiffens the supported plate markedly."""
    m_full = models.supported_plate(rotational=True)
    s_full, _ = solver.solve(m_full, solver.SolveConfig(steps=2))
    u_full = float(np.abs(s_full.d_solid[:, 2]).max())
    m_pos = models.supported_plate(rotational=False)
    s_pos, _ = solver.solve(m_pos, solver.SolveConfig(steps=8))
    u_pos = float(np.abs(s_pos.d_solid[:, 2]).max())
    ratio = u_full / u_pos
    return _result(
        "supported-plate stiffening (full vs positional coupling)",
        ratio < 0.7,
        {"deflection_full": u_full, "deflection_positional": u_pos, "ratio": ratio},
    )


def check_tangent_consistency():
    """FD check of the condensed tangent plus quadratic Newton tail."""
    m = models.patch_test_curved("hex8", "CONS", cells=(2, 2, 2))
    # stronger loads so the Newton iteration has a measurable nonlinear tail
    m.beam_line_loads = [
        (list(range(5)), [0.0, 0.03, 0.05]),
        (list(range(5, 12)), [0.02, 0.0, -0.04]),
    ]
    state, hist = solver.solve(m, solver.SolveConfig(steps=1))
    free = np.setdiff1d(np.arange(m.n_dofs), m.fixed_dofs())

    _, K, _ = solver.assemble_system(m, state, 1.0)
    K = np.asarray(K.todense())
    h = 1e-6
    K_fd = np.zeros_like(K)
    for i in free:
        for sgn in (1.0, -1.0):
            pert = state.copy()
            du = np.zeros(m.n_dofs)
            du[i] = sgn * h
            pert.apply_increment(m, du)
            R, _, _ = solver.assemble_system(m, pert, 1.0, want_tangent=False)
            K_fd[:, i] += sgn * R / (2.0 * h)
    sub = np.ix_(free, free)
    scale = np.abs(K[sub]).max()
    fd_err = float(np.abs(K_fd[sub] - K[sub]).max() / scale)

    norms = hist[-1]["residual_norms"]
    tail_ok = True
    tail = {"norms": [float(x) for x in norms]}
    if len(norms) >= 4:
        r1, r2, r3 = norms[-3], norms[-2], norms[-1]
        C = r2 / r1**2
        pred = C * r2**2
        tail_ok = (r3 <= 10.0 * pred) or (r3 <= 1e-12)
        tail.update({"predicted_final": float(pred), "actual_final": float(r3)})
    ok = fd_err <= 1e-5 and tail_ok
    return _result(
        "tangent consistency and quadratic Newton tail",
        ok,
        {"fd_max_rel_error": fd_err, "n_unknowns": int(len(free)), "tail": tail},
    )


def check_rotation_properties():
    """Fast SO(3)/surface property sample (full suites live in the tests)."""
    from . import so3, surface

    t0 = time.time()
    rng = np.random.default_rng(7)
    worst_rt = 0.0
    for _ in range(200):
        psi = rng.standard_normal(3)
        psi *= rng.uniform(0.0, 3.1) / np.linalg.norm(psi)
        worst_rt = max(worst_rt, np.abs(so3.rv(so3.exp_map(psi)) - psi).max())
    # interpolated averaged normals are continuous across facet edges
    m = models.patch_test_curved("hex8", "CONS")
    smesh = m.surface()
    nf = surface.NormalField(smesh, m.solid.X)
    worst_c0 = 0.0
    for fid, facet in enumerate(smesh.facets):
        for k, node in enumerate(facet.nodes):
            xi, eta = surface.FACET_PARENT_NODES[facet.kind][k]
            n_interp = nf.evaluate(fid, xi, eta)
            worst_c0 = max(worst_c0, np.abs(n_interp - nf.node_normal(node)).max())
    dt = time.time() - t0
    ok = worst_rt <= 1e-10 and worst_c0 <= 1e-12 and dt < 5.0
    return _result(
        "rotation/surface property sample",
        ok,
        {"roundtrip_max": float(worst_rt), "c0_max": float(worst_c0), "runtime_s": dt},
    )


def check_penalty_scaling():
    """Doubling eps_r halves the positional constraint violation."""
    vals = {}
    for eps in (100.0, 200.0):
        m = models.supported_plate(rotational=True, eps_r=eps)
        state, _ = solver.solve(m, solver.SolveConfig(steps=2))
        _, _, info = m.mortar().assemble(state.d_solid, state.beam, want_tangent=False)
        vals[eps] = float(np.abs(info["c_r"]).max())
    factor = vals[200.0] / vals[100.0]
    return _result(
        "penalty scaling law (constraint halves when eps_r doubles)",
        0.4 <= factor <= 0.6,
        {"c_inf_eps100": vals[100.0], "c_inf_eps200": vals[200.0], "factor": factor},
    )


CHECKS = [
    ("planar-patch", check_planar_patch),
    ("planar-ref", check_planar_ref),
    ("curved-patch", check_curved_patch),
    ("conservation", check_conservation),
    ("half-pipe", check_half_pipe),
    ("plate-stiffening", check_plate_stiffening),
    ("tangent", check_tangent_consistency),
    ("rotation-properties", check_rotation_properties),
    ("penalty-scaling", check_penalty_scaling),
]


def run_check(key):
    for k, fn in CHECKS:
        if k == key:
            return fn()
    raise KeyError(f"unknown check {key!r}")


def run_all(printer=None):
    """Run every check; returns (all_passed, list of result dicts)."""
    results = []
    for key, fn in CHECKS:
        res = fn()
        res["key"] = key
        results.append(res)
        if printer is not None:
            printer(f"[{'PASS' if res['passed'] else 'FAIL'}] {res['name']}")
    return all(r["passed"] for r in results), results
