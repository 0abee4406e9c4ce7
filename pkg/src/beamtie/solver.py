"""Load-stepped Newton-Raphson driver for the condensed coupled system."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix, lil_matrix
from scipy.sparse.linalg import splu

from . import beam_fem as bf
from . import solid_fem as sf
from .model import State

__all__ = ["SolveConfig", "NonconvergenceError", "SingularSystemError", "assemble_system", "solve"]


class NonconvergenceError(RuntimeError):
    """Newton iteration exceeded the iteration budget."""


class SingularSystemError(RuntimeError):
    """Direct factorization hit a zero pivot."""


@dataclass
class SolveConfig:
    """Newton/load-stepping parameters."""

    steps: int = 10
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_iter: int = 25

    def __post_init__(self):
        if self.steps < 1 or self.max_iter < 1:
            raise ValueError("positive counts required")
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("positive tolerances required")


def assemble_system(model, state, load_scale, want_tangent=True):
    """Global residual (internal - external) and consistent tangent."""
    n = model.n_dofs
    nS = model.solid.n_nodes
    R_s, K_s = sf.assemble(model.solid, model.material, state.d_solid, want_tangent)
    R = np.zeros(n)
    R[: 3 * nS] = R_s
    R_b, K_b = bf.assemble(
        model.beam, model.section, state.beam, 3 * nS, n, want_tangent
    )
    R += R_b
    r_c, K_c, info = model.mortar().assemble(
        state.d_solid, state.beam, want_tangent=want_tangent
    )
    R += r_c
    R -= load_scale * model.external_force()
    K = None
    if want_tangent:
        Ks_full = lil_matrix((n, n))
        Ks_full[: 3 * nS, : 3 * nS] = K_s
        K = Ks_full.tocsr() + K_b + csr_matrix(K_c)
    return R, K, info


def solve(model, config=None, state=None, callback=None):
    """Quasi-static solve with linear load scaling over the steps.

    Returns
    -------
    state : State
    history : list of dict
        Per load step: scale and the per-iteration residual norms.
    """
    config = config or SolveConfig()
    state = state.copy() if state is not None else State.reference(model)
    fixed = model.fixed_dofs()
    free = np.setdiff1d(np.arange(model.n_dofs), fixed)
    history = []
    for step in range(1, config.steps + 1):
        scale = step / config.steps
        norms = []
        ref_norm = None
        for it in range(1, config.max_iter + 1):
            R, K, _ = assemble_system(model, state, scale)
            rn = np.linalg.norm(R[free])
            norms.append(rn)
            if ref_norm is None:
                ref_norm = rn
            if rn <= max(config.rel_tol * ref_norm, config.abs_tol):
                break
            A = K[free][:, free].tocsc()
            try:
                lu = splu(A)
            except RuntimeError as exc:
                raise SingularSystemError(str(exc)) from exc
            du = np.zeros(model.n_dofs)
            du[free] = lu.solve(-R[free])
            if not np.all(np.isfinite(du)):
                raise SingularSystemError(
                    f"non-finite Newton update at step {step} iteration {it}"
                )
            state.apply_increment(model, du)
        else:
            raise NonconvergenceError(
                f"step {step} (scale {scale:.3f}) did not converge in "
                f"{config.max_iter} iterations; norms {norms}"
            )
        history.append({"step": step, "scale": scale, "residual_norms": norms})
        if callback is not None:
            callback(step, state)
    return state, history


def total_internal_energy(model, state):
    """Solid + beam strain energy plus the penalty coupling potential."""
    e_s = sf.total_energy(model.solid, model.material, state.d_solid)
    e_b = bf.total_energy(model.beam, model.section, state.beam)
    e_c = model.mortar().coupling_energy(state.d_solid, state.beam)
    return e_s + e_b + e_c
