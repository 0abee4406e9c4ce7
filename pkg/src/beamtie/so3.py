"""Finite-rotation algebra on SO(3).

Triads (orthonormal frames / rotation tensors) are plain 3x3 numpy arrays;
rotation vectors are length-3 arrays (axis times angle, radians).  All
routines also accept object arrays whose entries are :class:`~beamtie.autodiff.Dual2`,
so the coupling kernels can differentiate straight through the rotation
algebra.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Dual2, value_of

__all__ = [
    "InvalidRotationError",
    "InterpolationSingularityError",
    "skew",
    "exp_map",
    "rv",
    "relative_rotation",
    "geodesic_interpolate",
    "smallest_rotation_triad",
    "check_triad",
]

# Below this angle sin(psi)/psi and (1-cos(psi))/psi^2 switch to their
# truncated Taylor series to avoid catastrophic cancellation.
SMALL_ANGLE = 1e-6

ORTHONORMALITY_TOL = 1e-8


class InvalidRotationError(ValueError):
    """Input matrix is not orthonormal within tolerance."""


class InterpolationSingularityError(ValueError):
    """Relative rotation angle too close to pi for geodesic interpolation."""


def skew(v):
    """Skew-symmetric tensor S with S(v) b = v x b."""
    z = 0.0 * v[0]
    return np.array(
        [[z, -v[2], v[1]], [v[2], z, -v[0]], [-v[1], v[0], z]],
        dtype=object if isinstance(v[0], Dual2) else float,
    )


def _sin_over_x_coeffs(a):
    """alpha = sin(psi)/psi, beta = (1-cos(psi))/psi^2 with a = psi^2."""
    if value_of(a) < SMALL_ANGLE**2:
        alpha = 1.0 - a / 6.0 + a * a / 120.0 - a * a * a / 5040.0
        beta = 0.5 - a / 24.0 + a * a / 720.0 - a * a * a / 40320.0
    else:
        ang = ad.sqrt(a)
        alpha = ad.sin(ang) / ang
        beta = (1.0 - ad.cos(ang)) / a
    return alpha, beta


def exp_map(psi):
    """Rotation tensor of a rotation vector via the exponential map.

    Smooth on all of R^3; near zero the trigonometric coefficients are
    evaluated as series in psi^2, which keeps the expression differentiable
    through a seed at the identity.
    """
    psi = np.asarray(psi)
    a = ad.dot(psi, psi)
    alpha, beta = _sin_over_x_coeffs(a)
    s = skew(psi)
    s2 = np.dot(s, s)
    return np.eye(3) + alpha * s + beta * s2


def check_triad(lam, tol=ORTHONORMALITY_TOL):
    """Raise InvalidRotationError unless lam is a proper rotation."""
    lam_v = _values(lam)
    err = np.abs(lam_v.T @ lam_v - np.eye(3)).max()
    if err > tol:
        raise InvalidRotationError(f"matrix not orthonormal (deviation {err:.3e})")
    if np.linalg.det(lam_v) < 0.0:
        raise InvalidRotationError("matrix has negative determinant")


def _values(lam):
    if lam.dtype == object:
        return np.array([[value_of(x) for x in row] for row in lam])
    return np.asarray(lam, dtype=float)


def _quaternion(lam):
    """Unit quaternion (q0, qv) of a rotation tensor, Spurrier branch selection."""
    lv = _values(lam)
    tr = lv[0, 0] + lv[1, 1] + lv[2, 2]
    diag = [lv[0, 0], lv[1, 1], lv[2, 2]]
    m = max(tr, *diag)
    if m == tr:
        q0 = 0.5 * ad.sqrt(1.0 + lam[0, 0] + lam[1, 1] + lam[2, 2])
        inv = 0.25 / q0
        qv = [
            (lam[2, 1] - lam[1, 2]) * inv,
            (lam[0, 2] - lam[2, 0]) * inv,
            (lam[1, 0] - lam[0, 1]) * inv,
        ]
    else:
        i = int(np.argmax(diag))
        j, k = (i + 1) % 3, (i + 2) % 3
        qi = ad.sqrt(0.5 * lam[i, i] + 0.25 * (1.0 - (lam[0, 0] + lam[1, 1] + lam[2, 2])))
        inv = 0.25 / qi
        q0 = (lam[k, j] - lam[j, k]) * inv
        qv = [None, None, None]
        qv[i] = qi
        qv[j] = (lam[j, i] + lam[i, j]) * inv
        qv[k] = (lam[k, i] + lam[i, k]) * inv
        if value_of(q0) < 0.0:  # keep the angle in [0, pi]
            q0 = -q0
            qv = [-q for q in qv]
    return q0, qv


def rv(lam, check=True):
    """Rotation vector of a triad; returned angle lies in [0, pi]."""
    if check:
        check_triad(lam)
    q0, qv = _quaternion(lam)
    n2 = qv[0] * qv[0] + qv[1] * qv[1] + qv[2] * qv[2]
    if value_of(n2) < SMALL_ANGLE**2:
        # 2*atan2(n, q0)/n as a series in (n/q0)^2; q0 ~ 1 near the identity
        r = n2 / (q0 * q0)
        f = (2.0 / q0) * (1.0 - r / 3.0 + r * r / 5.0)
    else:
        n = ad.sqrt(n2)
        f = 2.0 * ad.atan2(n, q0) / n
    out = np.array([f * qv[0], f * qv[1], f * qv[2]], dtype=object)
    if not isinstance(out[0], Dual2):
        return out.astype(float)
    return out


def relative_rotation(lam1, lam2, check=True):
    """Rotation vector of lam2 * lam1^T (never computed as psi2 - psi1)."""
    return rv(np.dot(lam2, np.swapaxes(lam1, -1, -2)), check=check)


def geodesic_interpolate(lam1, lam2, t):
    """Geodesic between two triads: exp(t * rv(lam2 lam1^T)) lam1.

    Objective: interpolating (R lam1, R lam2) yields R times the result.
    """
    rel = relative_rotation(lam1, lam2, check=False)
    ang = np.sqrt(sum(value_of(c) ** 2 for c in rel))
    if ang >= np.pi - 1e-6:
        raise InterpolationSingularityError(
            f"relative angle {ang:.6f} too close to pi"
        )
    return np.dot(exp_map(np.array([t * rel[0], t * rel[1], t * rel[2]], dtype=rel.dtype)), lam1)


def smallest_rotation_triad(tangent):
    """Triad whose first base vector is the unit tangent, via the smallest
    rotation that maps e1 onto it."""
    t = np.asarray(tangent, dtype=float)
    t = t / np.linalg.norm(t)
    e1 = np.array([1.0, 0.0, 0.0])
    c = np.clip(t @ e1, -1.0, 1.0)
    axis = np.cross(e1, t)
    s = np.linalg.norm(axis)
    if s < 1e-12:
        if c > 0.0:
            return np.eye(3)
        # antiparallel: half turn about e3
        return exp_map(np.array([0.0, 0.0, np.pi]))
    angle = np.arctan2(s, c)
    return exp_map(axis / s * angle)
