"""Rigid transforms in SE(3): unit-quaternion rotation plus translation.

Quaternions are stored scalar-first (w, x, y, z) and renormalized after
every construction and composition, so the unit-norm invariant holds to
machine precision. Poses are immutable; the underlying arrays are
write-protected and safe to share across workers.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidInput


def _quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def _quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = w * x, w * y, w * z
    return np.array(
        [
            [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
            [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
            [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
        ]
    )


def _quat_from_matrix(m: np.ndarray) -> np.ndarray:
    # Shepperd's method: pick the largest diagonal combination for stability.
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        return np.array(
            [
                0.25 * s,
                (m[2, 1] - m[1, 2]) / s,
                (m[0, 2] - m[2, 0]) / s,
                (m[1, 0] - m[0, 1]) / s,
            ]
        )
    if m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        return np.array(
            [
                (m[2, 1] - m[1, 2]) / s,
                0.25 * s,
                (m[0, 1] + m[1, 0]) / s,
                (m[0, 2] + m[2, 0]) / s,
            ]
        )
    if m[1, 1] >= m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        return np.array(
            [
                (m[0, 2] - m[2, 0]) / s,
                (m[0, 1] + m[1, 0]) / s,
                0.25 * s,
                (m[1, 2] + m[2, 1]) / s,
            ]
        )
    s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
    return np.array(
        [
            (m[1, 0] - m[0, 1]) / s,
            (m[0, 2] + m[2, 0]) / s,
            (m[1, 2] + m[2, 1]) / s,
            0.25 * s,
        ]
    )


class Pose:
    """A rigid transform mapping points from its own frame to the parent frame."""

    __slots__ = ("quaternion", "translation")

    def __init__(self, rotation=(1.0, 0.0, 0.0, 0.0), translation=(0.0, 0.0, 0.0)):
        q = np.asarray(rotation, dtype=np.float64)
        t = np.asarray(translation, dtype=np.float64)
        if q.shape != (4,):
            raise InvalidInput(f"rotation must be a (w, x, y, z) quaternion, got shape {q.shape}")
        if t.shape != (3,):
            raise InvalidInput(f"translation must be a 3-vector, got shape {t.shape}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(t))):
            raise InvalidInput("pose components must be finite")
        n = float(np.linalg.norm(q))
        if n < 1e-12:
            raise InvalidInput("zero quaternion cannot represent a rotation")
        q = q / n
        q.setflags(write=False)
        t = t.copy()
        t.setflags(write=False)
        self.quaternion = q
        self.translation = t

    @classmethod
    def identity(cls) -> "Pose":
        return cls()

    @classmethod
    def from_axis_angle(cls, axis, angle: float, translation=(0.0, 0.0, 0.0)) -> "Pose":
        a = np.asarray(axis, dtype=np.float64)
        n = float(np.linalg.norm(a))
        if n < 1e-12:
            raise InvalidInput("rotation axis must be nonzero")
        a = a / n
        half = 0.5 * float(angle)
        s = math.sin(half)
        return cls((math.cos(half), a[0] * s, a[1] * s, a[2] * s), translation)

    @classmethod
    def from_matrix(cls, m) -> "Pose":
        m = np.asarray(m, dtype=np.float64)
        if m.shape != (4, 4):
            raise InvalidInput(f"expected a 4x4 homogeneous matrix, got shape {m.shape}")
        return cls(_quat_from_matrix(m[:3, :3]), m[:3, 3])

    @classmethod
    def from_rotation(cls, rot, translation=(0.0, 0.0, 0.0)) -> "Pose":
        rot = np.asarray(rot, dtype=np.float64)
        if rot.shape != (3, 3):
            raise InvalidInput(f"expected a 3x3 rotation matrix, got shape {rot.shape}")
        return cls(_quat_from_matrix(rot), translation)

    def rotation_matrix(self) -> np.ndarray:
        return _quat_to_matrix(self.quaternion)

    def to_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation_matrix()
        m[:3, 3] = self.translation
        return m

    def compose(self, other: "Pose") -> "Pose":
        """self applied after other: (self ∘ other)(p) = self(other(p))."""
        q = _quat_mul(self.quaternion, other.quaternion)
        t = self.apply(other.translation)
        return Pose(q, t)

    def inverse(self) -> "Pose":
        w, x, y, z = self.quaternion
        conj = np.array([w, -x, -y, -z])
        rinv = _quat_to_matrix(conj)
        return Pose(conj, -(rinv @ self.translation))

    def apply(self, points) -> np.ndarray:
        """Transform one point or an (..., 3) array of points."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation_matrix().T + self.translation

    def rotate(self, vectors) -> np.ndarray:
        """Rotate vectors without translating."""
        vec = np.asarray(vectors, dtype=np.float64)
        return vec @ self.rotation_matrix().T

    def rotation_angle(self) -> float:
        """Magnitude of the rotation in radians, in [0, pi]."""
        w = min(1.0, abs(float(self.quaternion[0])))
        return 2.0 * math.acos(w)

    def is_identity(self, tol: float = 1e-9) -> bool:
        return self.rotation_angle() <= tol and float(np.linalg.norm(self.translation)) <= tol

    def approx_equal(self, other: "Pose", tol: float = 1e-9) -> bool:
        return self.inverse().compose(other).is_identity(tol)

    def __repr__(self) -> str:
        q = ", ".join(f"{v:.6g}" for v in self.quaternion)
        t = ", ".join(f"{v:.6g}" for v in self.translation)
        return f"Pose(rotation=({q}), translation=({t}))"


def frame_map(base_sim: Pose, base_vis: Pose) -> Pose:
    """Transform taking poses expressed against one reference base to another.

    Built so that ``apply_map(frame_map(s, v), s)`` reproduces ``v``.
    """
    return base_vis.compose(base_sim.inverse())

def apply_map(mapping: Pose, body_sim: Pose) -> Pose:
    """Re-express a body pose through a frame mapping."""
    return mapping.compose(body_sim)
