"""Small rigid-transform helpers (4x4 homogeneous matrices)."""

from __future__ import annotations

import math

import numpy as np


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=float)


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=float)


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=float)


def transform(rotation: np.ndarray | None = None,
              translation=(0.0, 0.0, 0.0)) -> np.ndarray:
    T = np.eye(4)
    if rotation is not None:
        T[:3, :3] = rotation
    T[:3, 3] = translation
    return T


def invert(T: np.ndarray) -> np.ndarray:
    R = T[:3, :3]
    out = np.eye(4)
    out[:3, :3] = R.T
    out[:3, 3] = -R.T @ T[:3, 3]
    return out


def apply(T: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Apply a 4x4 transform to one point (3,) or many (N, 3)."""
    p = np.asarray(points, dtype=float)
    return p @ T[:3, :3].T + T[:3, 3]


def camera_pose(position, look_at, up=(0.0, 0.0, 1.0)) -> np.ndarray:
    """Camera-to-world transform with +z looking from position toward look_at.

    Camera convention: +x right, +y down, +z forward (pinhole optical frame).
    """
    position = np.asarray(position, dtype=float)
    fwd = np.asarray(look_at, dtype=float) - position
    fwd = fwd / np.linalg.norm(fwd)
    up = np.asarray(up, dtype=float)
    right = np.cross(fwd, up)
    n = np.linalg.norm(right)
    if n < 1e-9:  # looking straight along up; pick an arbitrary right
        right = np.cross(fwd, np.array([1.0, 0.0, 0.0]))
        n = np.linalg.norm(right)
    right /= n
    down = np.cross(fwd, right)
    R = np.column_stack([right, down, fwd])
    return transform(R, position)


def yaw_of(R: np.ndarray) -> float:
    return math.atan2(R[1, 0], R[0, 0])
