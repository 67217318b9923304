"""Procedural closed-mesh generation.

Builds watertight, connected meshes by evaluating a signed-distance field
on a grid and extracting the zero level set with marching cubes (Lewiner
variant, topologically consistent). Used for the bundled character assets,
the rigging test corpus, and the offline text-to-3D provider.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from skimage import measure

from .rigging.mesh import TriMesh


def _capsule(points: np.ndarray, a, b, radius: float) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    pa = points - a
    t = np.clip((pa @ ab) / denom, 0.0, 1.0) if denom > 0 else np.zeros(len(points))
    closest = a + t[:, None] * ab
    return np.linalg.norm(points - closest, axis=1) - radius


def _sphere(points: np.ndarray, center, radius: float) -> np.ndarray:
    return np.linalg.norm(points - np.asarray(center, dtype=float), axis=1) - radius


def _round_box(points: np.ndarray, center, half, radius: float) -> np.ndarray:
    q = np.abs(points - np.asarray(center, dtype=float)) - np.asarray(half, dtype=float)
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
    inside = np.minimum(q.max(axis=1), 0.0)
    return outside + inside - radius


def _torus_y(points: np.ndarray, center, major: float, minor: float) -> np.ndarray:
    p = points - np.asarray(center, dtype=float)
    ring = np.sqrt(p[:, 0] ** 2 + p[:, 2] ** 2) - major
    return np.sqrt(ring**2 + p[:, 1] ** 2) - minor


def _smooth_min(d1: np.ndarray, d2: np.ndarray, k: float = 0.03) -> np.ndarray:
    h = np.clip(0.5 + 0.5 * (d2 - d1) / k, 0.0, 1.0)
    return d2 + (d1 - d2) * h - k * h * (1.0 - h)


def mesh_from_sdf(sdf, lo, hi, resolution: int = 56) -> TriMesh:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    axes = [np.linspace(lo[i], hi[i], resolution) for i in range(3)]
    xx, yy, zz = np.meshgrid(*axes, indexing="ij")
    points = np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=1)
    values = sdf(points).reshape(xx.shape)
    spacing = tuple((hi[i] - lo[i]) / (resolution - 1) for i in range(3))
    verts, faces, _, _ = measure.marching_cubes(values, level=0.0, spacing=spacing)
    verts = verts + lo
    return TriMesh(verts.astype(np.float64), faces.astype(np.int64))


@dataclass(frozen=True)
class HumanoidParams:
    """T-pose humanoid proportions, in meters. Defaults are roughly 1 m tall."""

    height: float = 1.0
    torso_radius: float = 0.13
    head_radius: float = 0.105
    arm_radius: float = 0.052
    arm_length: float = 0.40
    leg_radius: float = 0.062
    leg_spread: float = 0.09
    mirror: bool = False

    def clamped(self) -> "HumanoidParams":
        def clip(v, lo, hi):
            return min(max(v, lo), hi)

        return HumanoidParams(
            height=clip(self.height, 0.7, 1.4),
            torso_radius=clip(self.torso_radius, 0.10, 0.16),
            head_radius=clip(self.head_radius, 0.08, 0.13),
            arm_radius=clip(self.arm_radius, 0.045, 0.065),
            arm_length=clip(self.arm_length, 0.30, 0.50),
            leg_radius=clip(self.leg_radius, 0.05, 0.08),
            leg_spread=clip(self.leg_spread, 0.07, 0.12),
            mirror=self.mirror,
        )


def humanoid_sdf(params: HumanoidParams):
    s = params.height
    shoulder_y = 0.80 * s
    hip_y = 0.55 * s
    spread = params.leg_spread

    def sdf(points: np.ndarray) -> np.ndarray:
        p = points.copy()
        if params.mirror:
            p = p.copy()
            p[:, 0] = -p[:, 0]
        d = _capsule(p, (0, hip_y - 0.02 * s, 0), (0, shoulder_y, 0), params.torso_radius * s)
        d = _smooth_min(
            d, _capsule(p, (0, shoulder_y, 0), (0, 0.88 * s, 0), 0.035 * s), 0.015 * s
        )
        d = _smooth_min(d, _sphere(p, (0, 0.95 * s, 0), params.head_radius * s), 0.015 * s)
        for side in (1.0, -1.0):
            sx = side
            d = _smooth_min(
                d,
                _capsule(
                    p,
                    (sx * 0.10 * s, shoulder_y, 0),
                    (sx * (0.10 * s + params.arm_length * s), shoulder_y, 0),
                    params.arm_radius * s,
                ),
                0.03 * s,
            )
            d = _smooth_min(
                d,
                _capsule(
                    p,
                    (sx * spread * s, hip_y, 0),
                    (sx * (spread + 0.02) * s, 0.07 * s, 0),
                    params.leg_radius * s,
                ),
                0.03 * s,
            )
            d = _smooth_min(
                d,
                _capsule(
                    p,
                    (sx * (spread + 0.02) * s, 0.065 * s, 0.0),
                    (sx * (spread + 0.02) * s, 0.06 * s, 0.07 * s),
                    0.055 * s,
                ),
                0.02 * s,
            )
        return d

    return sdf


def humanoid_mesh(params: HumanoidParams | None = None, resolution: int = 56) -> TriMesh:
    params = (params or HumanoidParams()).clamped()
    s = params.height
    margin = 0.1 * s
    arm_reach = (0.10 + params.arm_length) * s + params.arm_radius * s
    lo = (-arm_reach - margin, -margin, -0.3 * s)
    hi = (arm_reach + margin, 1.05 * s + margin, 0.3 * s)
    return mesh_from_sdf(humanoid_sdf(params), lo, hi, resolution)


def capybara_mesh(resolution: int = 48) -> TriMesh:
    """The default character: a boxy rodent on four stub legs."""

    def sdf(points: np.ndarray) -> np.ndarray:
        p = points
        d = _round_box(p, (0.0, 0.16, 0.0), (0.10, 0.07, 0.16), 0.05)
        d = _smooth_min(d, _round_box(p, (0.0, 0.24, 0.20), (0.06, 0.055, 0.07), 0.03), 0.04)
        d = _smooth_min(d, _sphere(p, (0.045, 0.315, 0.22), 0.018), 0.01)
        d = _smooth_min(d, _sphere(p, (-0.045, 0.315, 0.22), 0.018), 0.01)
        for sx in (1.0, -1.0):
            for sz in (1.0, -1.0):
                d = _smooth_min(
                    d,
                    _capsule(p, (sx * 0.07, 0.13, sz * 0.11), (sx * 0.07, 0.03, sz * 0.11), 0.032),
                    0.02,
                )
        return d

    return mesh_from_sdf(sdf, (-0.25, -0.05, -0.30), (0.25, 0.42, 0.36), resolution)


_PROP_BUILDERS = ("hat", "ring", "ball", "block", "fruit")


def prop_mesh(style_seed: int, resolution: int = 40) -> TriMesh:
    """A small single-piece accessory mesh chosen by seed."""
    style = _PROP_BUILDERS[style_seed % len(_PROP_BUILDERS)]
    rng = np.random.default_rng(style_seed)
    scale = float(rng.uniform(0.8, 1.2))

    def sdf(points: np.ndarray) -> np.ndarray:
        p = points / scale
        if style == "hat":
            d = _capsule(p, (0, 0.0, 0), (0, 0.09, 0), 0.075)
            d = _smooth_min(d, _torus_y(p, (0, 0.0, 0), 0.10, 0.028), 0.02)
        elif style == "ring":
            d = _torus_y(p, (0, 0.02, 0), 0.09, 0.032)
        elif style == "ball":
            d = _sphere(p, (0, 0.0, 0), 0.1)
        elif style == "block":
            d = _round_box(p, (0, 0.0, 0), (0.07, 0.07, 0.07), 0.02)
        else:
            d = _sphere(p, (0, 0.0, 0), 0.085)
            d = _smooth_min(d, _capsule(p, (0, 0.08, 0), (0.03, 0.13, 0), 0.012), 0.01)
        return d * scale

    reach = 0.2 * scale
    return mesh_from_sdf(sdf, (-reach, -reach, -reach), (reach, reach, reach), resolution)


def prompt_seed(prompt: str) -> int:
    digest = hashlib.blake2b(prompt.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def mesh_for_prompt(prompt: str, kind: str, resolution: int = 48) -> TriMesh:
    """Deterministic mesh keyed by the prompt text."""
    seed = prompt_seed(prompt)
    if kind == "character":
        rng = np.random.default_rng(seed)
        params = HumanoidParams(
            height=float(rng.uniform(0.85, 1.15)),
            torso_radius=float(rng.uniform(0.11, 0.15)),
            head_radius=float(rng.uniform(0.09, 0.12)),
            arm_radius=float(rng.uniform(0.048, 0.06)),
            arm_length=float(rng.uniform(0.34, 0.46)),
            leg_radius=float(rng.uniform(0.055, 0.07)),
            leg_spread=float(rng.uniform(0.08, 0.11)),
        )
        return humanoid_mesh(params, resolution=resolution)
    return prop_mesh(seed, resolution=max(32, resolution - 8))


def open_test_mesh() -> TriMesh:
    """A sphere with a hole punched in it; fails the closed-mesh check."""
    mesh = mesh_from_sdf(lambda p: _sphere(p, (0, 0, 0), 0.1), (-0.15, -0.15, -0.15),
                         (0.15, 0.15, 0.15), 24)
    return TriMesh(mesh.vertices, mesh.triangles[:-8])
