"""Linear-blend skinning: apply a pose frame to a rigged character.

World transforms walk the joint tree in deviation form (rotation plus
displacement from the bind position), so the identity frame produces an
exactly-zero displacement field and the deformed mesh equals the bind
mesh bit-for-bit. A bone (named by its distal joint) rigidly follows the
world frame of its proximal joint; each vertex blends its bones'
displacements.
"""
from __future__ import annotations

import numpy as np

from ..rigging.mapper import RiggedCharacter
from . import quat
from .clip import JointTransform, PoseFrame, SkeletonMismatch


def joint_world_transforms(
    character: RiggedCharacter, frame: PoseFrame
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """name -> (world rotation matrix, displacement from bind position)."""
    out: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    names = character.joint_names
    positions = character.joint_positions
    index = {name: i for i, name in enumerate(names)}
    for i, name in enumerate(names):
        local = frame.transforms.get(name, JointTransform())
        rotation = quat.to_matrix(local.rotation)
        translation = np.asarray(local.translation, dtype=float)
        parent = character.joint_parents[i]
        if parent is None:
            world_r = rotation
            displacement = translation
        else:
            parent_r, parent_d = out[parent]
            offset = positions[i] - positions[index[parent]]
            # parent_r @ (offset + t) - offset vanishes exactly at identity
            displacement = parent_d + (parent_r @ (offset + translation) - offset)
            world_r = parent_r @ rotation
        out[name] = (world_r, displacement)
    return out


def bone_matrices(
    character: RiggedCharacter, frame: PoseFrame
) -> dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """bone name -> (rotation, displacement, pivot) of its skinning map.

    The map sends bind-space x to R (x - pivot) + pivot + d, the pivot
    being the proximal joint's bind position.
    """
    world = joint_world_transforms(character, frame)
    names = character.joint_names
    positions = character.joint_positions
    index = {name: i for i, name in enumerate(names)}
    out = {}
    for parent, child in character.bones():
        rotation, displacement = world[parent]
        out[child] = (rotation, displacement, positions[index[parent]])
    return out


def bone_images(
    character: RiggedCharacter, frame: PoseFrame, points: np.ndarray
) -> dict[str, np.ndarray]:
    """Rigid image of `points` under each bone's skinning map."""
    out = {}
    for name, (rotation, displacement, pivot) in bone_matrices(character, frame).items():
        rel = points - pivot
        out[name] = rel @ rotation.T + pivot + displacement
    return out


def apply_pose(character: RiggedCharacter, frame: PoseFrame) -> np.ndarray:
    """Deformed vertex positions for a pose frame."""
    if frame.transforms:
        unknown = set(frame.transforms) - set(character.joint_names)
        if unknown:
            raise SkeletonMismatch(f"frame has joints not in the skeleton: {sorted(unknown)}")
    verts = character.mesh.vertices
    weights = character.weights
    bone_names = weights.bone_names
    # displacement form: x + sum_b w_b (M_b x - x); exactly the bind pose
    # under the identity frame
    displacements = {}
    for name, (rotation, displacement, pivot) in bone_matrices(character, frame).items():
        rel = verts - pivot
        displacements[name] = rel @ (rotation - np.eye(3)).T + displacement
    out = verts.copy()
    for slot in range(weights.indices.shape[1]):
        cols = weights.indices[:, slot]
        vals = weights.values[:, slot]
        active = cols >= 0
        if not active.any():
            continue
        for bone_id in np.unique(cols[active]):
            bone_rows = active & (cols == bone_id)
            name = bone_names[int(bone_id)]
            out[bone_rows] += vals[bone_rows, None] * displacements[name][bone_rows]
    return out
