"""Command line front end: run, verify, audit and generate subcommands.

Exit code 0 means every requested check (or the simulation itself)
succeeded.  Reports are written both as plain text and as JSON.  The
environment variable ``BEAMTIE_THREADS`` caps the BLAS/LAPACK thread
pools used during assembly and factorization.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import model_io, models, solver, verification

__all__ = ["main"]

_VARIANTS = {"cons": "CONS", "ref": "REF", "disp": "DISP"}


def _apply_thread_cap():
    cap = os.environ.get("BEAMTIE_THREADS")
    if not cap:
        return
    try:
        n = max(1, int(cap))
    except ValueError:
        print(f"warning: ignoring non-integer BEAMTIE_THREADS={cap!r}", file=sys.stderr)
        return
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=n)
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)


def _add_overrides(p):
    p.add_argument("--variant", choices=sorted(_VARIANTS), help="coupling variant")
    p.add_argument(
        "--no-rot", action="store_true", help="disable rotational coupling"
    )
    p.add_argument("--eps-r", type=float, help="positional penalty parameter")
    p.add_argument("--eps-theta", type=float, help="rotational penalty parameter")
    p.add_argument("--steps", type=int, help="number of load steps")
    p.add_argument("--out", default=".", help="output directory")


def _load(args):
    model = model_io.load_model(args.model)
    config = model_io.load_solve_config(args.model)
    cp = model.coupling
    if args.variant:
        cp.variant = _VARIANTS[args.variant]
    if args.no_rot:
        cp.rotational = False
    if args.eps_r is not None:
        cp.eps_r = args.eps_r
    if args.eps_theta is not None:
        cp.eps_theta = args.eps_theta
    if args.steps is not None:
        config.steps = args.steps
    model._cache.clear()
    return model, config


def _cmd_run(args):
    model, config = _load(args)
    if args.load_scale is not None and args.load_scale == 0.0:
        config.steps = 1
    os.makedirs(args.out, exist_ok=True)
    base = os.path.join(args.out, model.name)

    def dump(step, state):
        model_io.export_vtu(model, state, f"{base}_solid_{step:03d}.vtu")
        _, _, info = model.mortar().assemble(
            state.d_solid, state.beam, want_tangent=False
        )
        model_io.export_beam_vtp(
            model, state, f"{base}_beam_{step:03d}.vtp", multipliers=info["lambda_r"]
        )

    if args.load_scale is not None:
        # fixed load scale: reuse the stepper with a scaled external load
        scale = args.load_scale
        orig = model.external_force
        model.external_force = lambda: scale * orig()
    state, history = solver.solve(model, config, callback=dump)
    force, moment, info = model.mortar().conservation_audit(state.d_solid, state.beam)
    tip = state.beam.r[-1] - model.beam.r0[-1]
    report = {
        "model": model.name,
        "variant": model.coupling.variant,
        "internal_energy": solver.total_internal_energy(model, state),
        "coupling_energy": model.mortar().coupling_energy(state.d_solid, state.beam),
        "max_solid_displacement": float(
            np.linalg.norm(state.d_solid, axis=1).max()
        ),
        "beam_tip_displacement": tip,
        "beam_mean_displacement": (state.beam.r - model.beam.r0).mean(axis=0),
        "constraint_norm_inf": float(np.abs(info["c_r"]).max()),
        "net_coupling_force": force,
        "net_coupling_moment": moment,
        "steps": [
            {"step": h["step"], "iterations": len(h["residual_norms"]) - 1}
            for h in history
        ],
    }
    txt, _ = model_io.write_report(report, base + "_report")
    with open(txt) as fh:
        print(fh.read(), end="")
    return 0


def _cmd_verify(args):
    os.makedirs(args.out, exist_ok=True)
    passed, results = verification.run_all(printer=print)
    model_io.write_report(
        {"passed": passed, "checks": results},
        os.path.join(args.out, "verify_report"),
    )
    return 0 if passed else 1


def _cmd_audit(args):
    model, _ = _load(args)
    from .model import State

    state = State.reference(model)
    rng = np.random.default_rng(args.seed)
    du = np.zeros(model.n_dofs)
    du[:] = 0.01 * rng.standard_normal(model.n_dofs)
    state.apply_increment(model, du)
    force, moment, info = model.mortar().conservation_audit(state.d_solid, state.beam)
    lam_norm = float(np.linalg.norm(info["lambda_r"]))
    L = float(model.beam.L_e.sum())
    conserved = max(np.abs(force).max(), np.abs(moment).max()) <= max(
        1e-11 * lam_norm * L, 1e-14
    )

    # FD spot check of the condensed tangent on random columns
    _, K, _ = solver.assemble_system(model, state, 0.0)
    K = np.asarray(K.todense())
    free = np.setdiff1d(np.arange(model.n_dofs), model.fixed_dofs())
    cols = rng.choice(free, size=min(30, free.size), replace=False)
    h = 1e-6
    worst = 0.0
    scale = np.abs(K[np.ix_(free, free)]).max()
    for i in cols:
        col = np.zeros(model.n_dofs)
        for sgn in (1.0, -1.0):
            pert = state.copy()
            dv = np.zeros(model.n_dofs)
            dv[i] = sgn * h
            pert.apply_increment(model, dv)
            R, _, _ = solver.assemble_system(model, pert, 0.0, want_tangent=False)
            col += sgn * R / (2.0 * h)
        worst = max(worst, float(np.abs(col[free] - K[free, i]).max() / scale))
    fd_ok = worst <= 1e-5

    expect_conserved = model.coupling.variant != "DISP"
    ok = fd_ok and (conserved == expect_conserved)
    report = {
        "model": model.name,
        "variant": model.coupling.variant,
        "net_coupling_force": force,
        "net_coupling_moment": moment,
        "multiplier_norm": lam_norm,
        "conserved": bool(conserved),
        "conservation_expected": bool(expect_conserved),
        "fd_max_rel_error": worst,
        "fd_columns": int(cols.size),
        "passed": bool(ok),
    }
    os.makedirs(args.out, exist_ok=True)
    txt, _ = model_io.write_report(
        report, os.path.join(args.out, model.name + "_audit")
    )
    with open(txt) as fh:
        print(fh.read(), end="")
    return 0 if ok else 1


def _cmd_generate(args):
    builder = models.MODEL_BUILDERS[args.name]
    kwargs = {}
    if args.name in ("patch-planar", "patch-curved", "half-pipe"):
        if args.variant:
            kwargs["variant"] = _VARIANTS[args.variant]
    if args.name == "plate" and args.no_rot:
        kwargs["rotational"] = False
    model = builder(**kwargs)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, model.name + ".json")
    model_io.save_model(model, path, solve=solver.SolveConfig())
    print(path)
    return 0


def main(argv=None):
    _apply_thread_cap()
    ap = argparse.ArgumentParser(
        prog="beamtie",
        description="Quasi-static beam-to-solid-surface coupling simulator",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="solve a model and export results")
    p_run.add_argument("model", help="JSON model file")
    _add_overrides(p_run)
    p_run.add_argument(
        "--load-scale", type=float, default=None,
        help="fixed external load scale factor (default: ramp to 1)",
    )

    p_ver = sub.add_parser("verify", help="run the built-in verification suite")
    p_ver.add_argument("--out", default=".", help="output directory")

    p_aud = sub.add_parser(
        "audit", help="conservation and tangent checks on a model"
    )
    p_aud.add_argument("model", help="JSON model file")
    _add_overrides(p_aud)
    p_aud.add_argument("--seed", type=int, default=0)

    p_gen = sub.add_parser("generate", help="emit a built-in example model")
    p_gen.add_argument("name", choices=sorted(models.MODEL_BUILDERS))
    p_gen.add_argument("--variant", choices=sorted(_VARIANTS))
    p_gen.add_argument("--no-rot", action="store_true")
    p_gen.add_argument("--out", default=".", help="output directory")

    args = ap.parse_args(argv)
    handler = {
        "run": _cmd_run,
        "verify": _cmd_verify,
        "audit": _cmd_audit,
        "generate": _cmd_generate,
    }[args.command]
    try:
        return handler(args)
    except (model_io.SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (solver.NonconvergenceError, solver.SingularSystemError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
