"""Quaternion and rotation-matrix algebra (torch, batched, dtype-preserving).

Conventions used throughout the package:
  * quaternions are ``(..., 4)`` tensors in ``[x, y, z, w]`` order (scalar last),
  * rotations are world-frame (active) unless noted,
  * the 6D rotation representation is the first two rotation-matrix COLUMNS,
    flattened column-major: ``[m00, m10, m20, m01, m11, m21]``,
  * Z is up; "heading" means yaw about world Z.
"""

from __future__ import annotations

import math

import torch

from .errors import NonUnitQuaternion

IDENTITY_QUAT = (0.0, 0.0, 0.0, 1.0)


def quat_normalize(q: torch.Tensor) -> torch.Tensor:
    return q / q.norm(dim=-1, keepdim=True)


def quat_conjugate(q: torch.Tensor) -> torch.Tensor:
    return torch.cat([-q[..., :3], q[..., 3:4]], dim=-1)


def quat_mul(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Hamilton product a ⊗ b (apply b first, then a)."""
    ax, ay, az, aw = a.unbind(-1)
    bx, by, bz, bw = b.unbind(-1)
    return torch.stack(
        [
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
            aw * bw - ax * bx - ay * by - az * bz,
        ],
        dim=-1,
    )


def quat_rotate(q: torch.Tensor, v: torch.Tensor) -> torch.Tensor:
    """Rotate vectors ``v`` by unit quaternions ``q``."""
    qvec = q[..., :3]
    w = q[..., 3:4]
    t = 2.0 * torch.linalg.cross(qvec, v, dim=-1)
    return v + w * t + torch.linalg.cross(qvec, t, dim=-1)


def quat_rotate_inverse(q: torch.Tensor, v: torch.Tensor) -> torch.Tensor:
    return quat_rotate(quat_conjugate(q), v)


def quat_from_axis_angle(axis: torch.Tensor, angle: torch.Tensor) -> torch.Tensor:
    """Unit quaternion for a rotation of ``angle`` radians about unit ``axis``."""
    half = 0.5 * angle.unsqueeze(-1)
    return torch.cat([axis * torch.sin(half), torch.cos(half)], dim=-1)


def quat_from_rpy(roll: float, pitch: float, yaw: float) -> torch.Tensor:
    """URDF-style fixed-axis roll-pitch-yaw to quaternion (float64)."""
    cr, sr = math.cos(roll / 2), math.sin(roll / 2)
    cp, sp = math.cos(pitch / 2), math.sin(pitch / 2)
    cy, sy = math.cos(yaw / 2), math.sin(yaw / 2)
    return torch.tensor(
        [
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
            cr * cp * cy + sr * sp * sy,
        ],
        dtype=torch.float64,
    )


def quat_from_yaw(yaw: torch.Tensor) -> torch.Tensor:
    half = 0.5 * yaw
    zeros = torch.zeros_like(half)
    return torch.stack([zeros, zeros, torch.sin(half), torch.cos(half)], dim=-1)


def yaw_of_quat(q: torch.Tensor) -> torch.Tensor:
    """Yaw (rotation about world Z) of a Z-up orientation."""
    x, y, z, w = q.unbind(-1)
    return torch.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))


def pitch_sin_of_quat(q: torch.Tensor) -> torch.Tensor:
    """sin(pitch); |value| ≈ 1 means the heading is degenerate (gimbal pole)."""
    x, y, z, w = q.unbind(-1)
    return 2.0 * (w * y - z * x)


def quat_to_matrix(q: torch.Tensor) -> torch.Tensor:
    """Rotation matrix ``(..., 3, 3)`` of unit quaternions."""
    x, y, z, w = q.unbind(-1)
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = w * x, w * y, w * z
    row0 = torch.stack([1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy)], dim=-1)
    row1 = torch.stack([2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx)], dim=-1)
    row2 = torch.stack([2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy)], dim=-1)
    return torch.stack([row0, row1, row2], dim=-2)


def matrix_to_quat(m: torch.Tensor) -> torch.Tensor:
    """Quaternion (xyzw) of rotation matrices, branch-robust (Shepperd)."""
    batch = m.shape[:-2]
    m = m.reshape(-1, 3, 3)
    m00, m01, m02 = m[:, 0, 0], m[:, 0, 1], m[:, 0, 2]
    m10, m11, m12 = m[:, 1, 0], m[:, 1, 1], m[:, 1, 2]
    m20, m21, m22 = m[:, 2, 0], m[:, 2, 1], m[:, 2, 2]

    # Four candidate constructions, each stable in a different trace regime.
    qw = torch.stack([1 + m00 + m11 + m22, m21 - m12, m02 - m20, m10 - m01], dim=-1)
    qx = torch.stack([m21 - m12, 1 + m00 - m11 - m22, m01 + m10, m02 + m20], dim=-1)
    qy = torch.stack([m02 - m20, m01 + m10, 1 - m00 + m11 - m22, m12 + m21], dim=-1)
    qz = torch.stack([m10 - m01, m02 + m20, m12 + m21, 1 - m00 - m11 + m22], dim=-1)
    # candidates[..., k] is (w, x, y, z) scaled by 4*component_k
    candidates = torch.stack([qw, qx, qy, qz], dim=-2)  # (B, 4, 4)
    diag = torch.stack(
        [1 + m00 + m11 + m22, 1 + m00 - m11 - m22, 1 - m00 + m11 - m22, 1 - m00 - m11 + m22],
        dim=-1,
    )
    best = diag.argmax(dim=-1)
    picked = candidates[torch.arange(m.shape[0]), best]  # (B, 4) in (w,x,y,z)*s
    q = torch.stack([picked[:, 1], picked[:, 2], picked[:, 3], picked[:, 0]], dim=-1)
    q = quat_normalize(q)
    # canonical sign: w >= 0
    sign = torch.where(q[:, 3:4] < 0, -torch.ones_like(q[:, 3:4]), torch.ones_like(q[:, 3:4]))
    return (q * sign).reshape(*batch, 4)


def rotmat6d(q: torch.Tensor, atol: float = 1e-4) -> torch.Tensor:
    """First two rotation-matrix columns of a unit quaternion, flattened to 6."""
    norm_err = (q.norm(dim=-1) - 1.0).abs()
    if bool((norm_err > atol).any()):
        raise NonUnitQuaternion(
            f"quaternion norm deviates from 1 by {float(norm_err.max()):.3e} (tol {atol:g})"
        )
    m = quat_to_matrix(quat_normalize(q))
    return torch.cat([m[..., :, 0], m[..., :, 1]], dim=-1)


def rotmat6d_to_quat(r6: torch.Tensor) -> torch.Tensor:
    """Inverse of :func:`rotmat6d` via Gram-Schmidt; tolerant to non-orthonormal input."""
    a1 = r6[..., 0:3]
    a2 = r6[..., 3:6]
    b1 = a1 / a1.norm(dim=-1, keepdim=True)
    a2p = a2 - (b1 * a2).sum(dim=-1, keepdim=True) * b1
    b2 = a2p / a2p.norm(dim=-1, keepdim=True)
    b3 = torch.linalg.cross(b1, b2, dim=-1)
    m = torch.stack([b1, b2, b3], dim=-1)  # columns
    return matrix_to_quat(m)


def quat_log_vector(q: torch.Tensor) -> torch.Tensor:
    """Rotation vector theta*axis of a unit quaternion (theta in [0, pi])."""
    qvec = q[..., :3]
    w = q[..., 3]
    sin_half = qvec.norm(dim=-1)
    half = torch.atan2(sin_half, w)
    # sin(half)/half -> 1 as half -> 0; guard the division
    scale = torch.where(sin_half > 1e-12, 2.0 * half / sin_half.clamp_min(1e-300), torch.full_like(half, 2.0))
    return qvec * scale.unsqueeze(-1)


def quat_geodesic(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Geodesic angle between two unit quaternions (sign-invariant)."""
    dot = (a * b).sum(dim=-1).abs().clamp(max=1.0)
    return 2.0 * torch.acos(dot)


def quat_slerp(a: torch.Tensor, b: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
    """Spherical linear interpolation along the shorter arc; t broadcasts."""
    dot = (a * b).sum(dim=-1, keepdim=True)
    b = torch.where(dot < 0, -b, b)
    dot = dot.abs().clamp(max=1.0)
    omega = torch.acos(dot)
    sin_omega = torch.sin(omega)
    t = torch.as_tensor(t, dtype=a.dtype, device=a.device)
    while t.dim() < a.dim():
        t = t.unsqueeze(-1)
    near = sin_omega < 1e-9
    wa = torch.where(near, 1.0 - t, torch.sin((1.0 - t) * omega) / sin_omega.clamp_min(1e-300))
    wb = torch.where(near, t, torch.sin(t * omega) / sin_omega.clamp_min(1e-300))
    return quat_normalize(wa * a + wb * b)
