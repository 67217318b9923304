"""Replace the rigging skeleton with the tracking skeleton.

Tracking joints are placed by interpolation along their mapped rigging
bone; every rigging bone's skin weight mass moves to the nearest of the
tracking bone segments that subdivide it, so the per-vertex partition of
unity is conserved exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embed import EmbeddedSkeleton
from .mesh import TriMesh
from .skeleton import Skeleton, SkeletonMap, default_skeleton_map
from .weights import MAX_INFLUENCES, SkinWeights, point_segment_distance


@dataclass
class RiggedCharacter:
    mesh: TriMesh
    skeleton_id: str
    joint_names: list[str]
    joint_parents: list[str | None]
    joint_positions: np.ndarray  # (J, 3) bind pose, mesh coordinates
    weights: SkinWeights  # over tracking bones (named by distal joint)

    def parent_index(self, joint_index: int) -> int | None:
        parent = self.joint_parents[joint_index]
        return None if parent is None else self.joint_names.index(parent)

    def bones(self) -> list[tuple[str, str]]:
        return [
            (self.joint_parents[i], name)
            for i, name in enumerate(self.joint_names)
            if self.joint_parents[i] is not None
        ]

    def to_obj(self) -> dict:
        return {
            "version": 1,
            "skeleton_id": self.skeleton_id,
            "joints": [
                {
                    "name": name,
                    "parent": self.joint_parents[i],
                    "position": [float(v) for v in self.joint_positions[i]],
                }
                for i, name in enumerate(self.joint_names)
            ],
            "bones": list(self.weights.bone_names),
            "weights": [
                [[int(b), float(w)] for b, w in zip(self.weights.indices[v], self.weights.values[v]) if b >= 0]
                for v in range(len(self.mesh.vertices))
            ],
            "mesh": {
                "vertices": [[float(x) for x in v] for v in self.mesh.vertices],
                "triangles": [[int(i) for i in t] for t in self.mesh.triangles],
            },
        }

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_obj(), fh, separators=(",", ":"))
            fh.write("\n")

    @staticmethod
    def from_obj(obj: dict) -> "RiggedCharacter":
        mesh = TriMesh(
            np.array(obj["mesh"]["vertices"], dtype=np.float64),
            np.array(obj["mesh"]["triangles"], dtype=np.int64),
        )
        joints = obj["joints"]
        bone_names = list(obj["bones"])
        n = len(mesh.vertices)
        indices = np.full((n, MAX_INFLUENCES), -1, dtype=np.int32)
        values = np.zeros((n, MAX_INFLUENCES))
        for v, entries in enumerate(obj["weights"]):
            for slot, (b, w) in enumerate(entries[:MAX_INFLUENCES]):
                indices[v, slot] = b
                values[v, slot] = w
        return RiggedCharacter(
            mesh=mesh,
            skeleton_id=obj["skeleton_id"],
            joint_names=[j["name"] for j in joints],
            joint_parents=[j["parent"] for j in joints],
            joint_positions=np.array([j["position"] for j in joints], dtype=np.float64),
            weights=SkinWeights(bone_names=bone_names, indices=indices, values=values),
        )

    @staticmethod
    def load(path: str | Path) -> "RiggedCharacter":
        with open(path, "r", encoding="utf-8") as fh:
            return RiggedCharacter.from_obj(json.load(fh))


def map_skeleton(
    mesh: TriMesh,
    embedded: EmbeddedSkeleton,
    rig_weights: SkinWeights,
    skeleton_map: SkeletonMap | None = None,
) -> RiggedCharacter:
    skeleton_map = skeleton_map or default_skeleton_map()
    skeleton_map.validate()
    target: Skeleton = skeleton_map.target

    positions = {
        name: skeleton_map.place(embedded.positions, name) for name in target.names
    }

    # every tracking bone subdivides the rigging bone its child maps onto
    segments_by_rig: dict[str, list[tuple[str, np.ndarray, np.ndarray]]] = {}
    for parent, child in target.bones():
        rig_joint = skeleton_map.entries[child].rigging_joint
        segments_by_rig.setdefault(rig_joint, []).append(
            (child, positions[parent], positions[child])
        )

    verts = mesh.vertices
    n = len(verts)
    tracking_bones = target.bone_names()
    bone_index = {name: i for i, name in enumerate(tracking_bones)}
    dense = np.zeros((n, len(tracking_bones)))
    rig_dense = rig_weights.dense()
    for bi, rig_bone in enumerate(rig_weights.bone_names):
        mass = rig_dense[:, bi]
        if not mass.any():
            continue
        candidates = segments_by_rig.get(rig_bone)
        if not candidates:
            raise ValueError(f"no tracking segment covers rigging bone {rig_bone}")
        dist = np.stack(
            [point_segment_distance(verts, a, b) for _, a, b in candidates], axis=1
        )
        choice = dist.argmin(axis=1)
        for ci, (tracking_bone, _, _) in enumerate(candidates):
            rows = choice == ci
            dense[rows, bone_index[tracking_bone]] += mass[rows]

    skin = SkinWeights.from_dense(tracking_bones, dense)
    return RiggedCharacter(
        mesh=mesh,
        skeleton_id=target.skeleton_id,
        joint_names=list(target.names),
        joint_parents=[target.parent_of(name) for name in target.names],
        joint_positions=np.array([positions[name] for name in target.names]),
        weights=skin,
    )
