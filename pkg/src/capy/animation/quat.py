"""Quaternion helpers (x, y, z, w order)."""
from __future__ import annotations

import math

import numpy as np

IDENTITY = (0.0, 0.0, 0.0, 1.0)


def normalize(q) -> tuple[float, float, float, float]:
    x, y, z, w = (float(v) for v in q)
    n = math.sqrt(x * x + y * y + z * z + w * w)
    if n == 0.0:
        raise ValueError("zero quaternion")
    return (x / n, y / n, z / n, w / n)


def norm(q) -> float:
    x, y, z, w = (float(v) for v in q)
    return math.sqrt(x * x + y * y + z * z + w * w)


def multiply(a, b) -> tuple[float, float, float, float]:
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return (
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    )


def conjugate(q) -> tuple[float, float, float, float]:
    x, y, z, w = q
    return (-x, -y, -z, w)


def from_axis_angle(axis, angle_rad: float) -> tuple[float, float, float, float]:
    ax, ay, az = axis
    n = math.sqrt(ax * ax + ay * ay + az * az)
    if n == 0.0:
        raise ValueError("zero axis")
    half = angle_rad / 2.0
    s = math.sin(half) / n
    return (ax * s, ay * s, az * s, math.cos(half))


def to_matrix(q) -> np.ndarray:
    x, y, z, w = normalize(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def slerp(a, b, t: float) -> tuple[float, float, float, float]:
    """Spherical linear interpolation along the shorter arc."""
    ax, ay, az, aw = normalize(a)
    bx, by, bz, bw = normalize(b)
    dot = ax * bx + ay * by + az * bz + aw * bw
    if dot < 0.0:
        bx, by, bz, bw = -bx, -by, -bz, -bw
        dot = -dot
    if dot > 0.9995:
        out = (
            ax + t * (bx - ax),
            ay + t * (by - ay),
            az + t * (bz - az),
            aw + t * (bw - aw),
        )
        return normalize(out)
    theta = math.acos(min(1.0, dot))
    sin_theta = math.sin(theta)
    wa = math.sin((1.0 - t) * theta) / sin_theta
    wb = math.sin(t * theta) / sin_theta
    return (
        wa * ax + wb * bx,
        wa * ay + wb * by,
        wa * az + wb * bz,
        wa * aw + wb * bw,
    )


def angle_between(a, b) -> float:
    ax, ay, az, aw = normalize(a)
    bx, by, bz, bw = normalize(b)
    dot = abs(ax * bx + ay * by + az * bz + aw * bw)
    return 2.0 * math.acos(min(1.0, dot))
