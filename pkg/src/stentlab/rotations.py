"""Batched SO(3) helpers for the corotational beam kinematics.

All functions operate on arrays whose leading axes are batch axes; the
trailing axes are the vector (3,) or matrix (3, 3) dimensions.  Small-angle
branches use series expansions so the maps stay smooth through zero.
"""
import numpy as np

_EPS_ANGLE = 1e-6


def skew(v):
    """Skew-symmetric matrices from vectors, shape (..., 3) -> (..., 3, 3)."""
    v = np.asarray(v)
    out = np.zeros(v.shape + (3,), dtype=v.dtype)
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def exp_rotvec(w):
    """Rodrigues map: rotation vectors (..., 3) -> rotation matrices (..., 3, 3)."""
    w = np.asarray(w, dtype=float)
    theta2 = np.einsum("...i,...i->...", w, w)
    theta = np.sqrt(theta2)
    small = theta < _EPS_ANGLE
    # sin(t)/t and (1-cos(t))/t^2 with series fallbacks
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(small, 1.0 - theta2 / 6.0, np.sin(theta) / np.where(small, 1.0, theta))
        b = np.where(small, 0.5 - theta2 / 24.0,
                     (1.0 - np.cos(theta)) / np.where(small, 1.0, theta2))
    K = skew(w)
    K2 = K @ K
    eye = np.broadcast_to(np.eye(3), K.shape)
    return eye + a[..., None, None] * K + b[..., None, None] * K2


def log_rotmat(R):
    """Inverse Rodrigues map: rotation matrices -> rotation vectors.

    Intended for moderate angles (|theta| well below pi); deformational
    rotations in the beam formulation stay in that range.
    """
    R = np.asarray(R, dtype=float)
    tr = R[..., 0, 0] + R[..., 1, 1] + R[..., 2, 2]
    cos_t = np.clip((tr - 1.0) * 0.5, -1.0, 1.0)
    theta = np.arccos(cos_t)
    v = np.stack([R[..., 2, 1] - R[..., 1, 2],
                  R[..., 0, 2] - R[..., 2, 0],
                  R[..., 1, 0] - R[..., 0, 1]], axis=-1)
    small = theta < _EPS_ANGLE
    with np.errstate(invalid="ignore", divide="ignore"):
        factor = np.where(small, 0.5 + theta ** 2 / 12.0,
                          theta / (2.0 * np.sin(np.where(small, 1.0, theta))))
    return factor[..., None] * v


def orthonormalize(R):
    """Project near-rotation matrices back onto SO(3) via Gram-Schmidt."""
    R = np.array(R, dtype=float, copy=True)
    c0 = R[..., :, 0]
    c1 = R[..., :, 1]
    c0 = c0 / np.linalg.norm(c0, axis=-1, keepdims=True)
    c1 = c1 - np.einsum("...i,...i->...", c0, c1)[..., None] * c0
    c1 = c1 / np.linalg.norm(c1, axis=-1, keepdims=True)
    c2 = np.cross(c0, c1)
    return np.stack([c0, c1, c2], axis=-1)
