"""Exact-arithmetic geometry helpers.

Poses are integers (millimeters, millidegrees). Trigonometry snaps to Q30
fixed-point rationals computed with mpmath, so motion is bit-identical
across hosts regardless of the platform libm. Floats appear only in camera
projection and ray tests, which feed booleans back into the engine.
"""
from __future__ import annotations

import math
from functools import lru_cache

import mpmath

Q30 = 1 << 30
FULL_TURN_MDEG = 360_000


def round_half_even(numerator: int, denominator: int) -> int:
    """Banker's rounding of numerator/denominator for positive denominator."""
    if denominator <= 0:
        raise ValueError("denominator must be positive")
    q, r = divmod(numerator, denominator)
    twice = 2 * r
    if twice > denominator or (twice == denominator and q % 2 == 1):
        q += 1
    return q


def meters_to_mm(value: float) -> int:
    """Meters (float) to integer millimeters, round-half-even."""
    scaled = value * 1000.0
    floor = math.floor(scaled)
    frac = scaled - floor
    if frac > 0.5:
        return floor + 1
    if frac < 0.5:
        return floor
    return floor + (floor % 2)


def mm_to_meters(value: int) -> float:
    return value / 1000.0


def degrees_to_mdeg(value: float) -> int:
    scaled = value * 1000.0
    floor = math.floor(scaled)
    frac = scaled - floor
    if frac > 0.5:
        return floor + 1
    if frac < 0.5:
        return floor
    return floor + (floor % 2)


def normalize_mdeg(value: int) -> int:
    return value % FULL_TURN_MDEG


@lru_cache(maxsize=4096)
def cos_sin_q30(yaw_mdeg: int) -> tuple[int, int]:
    """cos/sin of a millidegree angle as Q30 fixed-point integers."""
    angle = mpmath.mpf(normalize_mdeg(yaw_mdeg)) / 1000
    with mpmath.workdps(40):
        rad = angle * mpmath.pi / 180
        c = int(mpmath.nint(mpmath.cos(rad) * Q30))
        s = int(mpmath.nint(mpmath.sin(rad) * Q30))
    return c, s


def scaled_q30(amount: int, factor_q30: int) -> int:
    """amount * factor (Q30), round-half-even, exact integer arithmetic."""
    numerator = amount * factor_q30
    if numerator >= 0:
        return round_half_even(numerator, Q30)
    return -round_half_even(-numerator, Q30)


def displacement_mm(distance_mm: int, yaw_mdeg: int) -> tuple[int, int]:
    """Ground-plane displacement (dx, dz) for a walk of distance_mm at yaw."""
    c, s = cos_sin_q30(yaw_mdeg)
    return scaled_q30(distance_mm, c), scaled_q30(distance_mm, s)


# --- interval / box tests (closed boundaries) -------------------------------


def intervals_overlap(lo_a: int, hi_a: int, lo_b: int, hi_b: int) -> bool:
    return lo_a <= hi_b and lo_b <= hi_a


def boxes_overlap(min_a, max_a, min_b, max_b) -> bool:
    """Closed AABB intersection over integer coordinate triples."""
    return all(intervals_overlap(min_a[i], max_a[i], min_b[i], max_b[i]) for i in range(3))


# --- float ray tests ---------------------------------------------------------


def ray_aabb_entry(origin, direction, box_min, box_max) -> float | None:
    """Slab test; entry parameter t >= 0 of the first hit, None on miss."""
    t_min = 0.0
    t_max = math.inf
    for axis in range(3):
        o = origin[axis]
        d = direction[axis]
        lo = box_min[axis]
        hi = box_max[axis]
        if d == 0.0:
            if o < lo or o > hi:
                return None
            continue
        inv = 1.0 / d
        t0 = (lo - o) * inv
        t1 = (hi - o) * inv
        if inv < 0.0:
            t0, t1 = t1, t0
        t_min = max(t_min, t0)
        t_max = min(t_max, t1)
        if t_max < t_min:
            return None
    return t_min


def rotate_y(point, yaw_rad: float):
    """Rotate about +Y by the engine yaw convention: +X goes to (cos, 0, sin)."""
    c = math.cos(yaw_rad)
    s = math.sin(yaw_rad)
    x, y, z = point
    return (c * x - s * z, y, s * x + c * z)


def ray_oriented_box_entry(origin, direction, center, yaw_rad: float, half_extents) -> float | None:
    """Entry t of a yaw-rotated box, via the slab test in the box frame."""
    rel = (origin[0] - center[0], origin[1] - center[1], origin[2] - center[2])
    local_o = rotate_y(rel, -yaw_rad)
    local_d = rotate_y(direction, -yaw_rad)
    neg = (-half_extents[0], -half_extents[1], -half_extents[2])
    return ray_aabb_entry(local_o, local_d, neg, half_extents)
