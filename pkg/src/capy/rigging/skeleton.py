"""Skeleton definitions.

Two skeletons: a compact 17-joint rigging skeleton used for embedding
(fewer nodes keeps the discrete search fast and its topology close to
generated humanoids), and a richer 28-joint tracking skeleton used for
pose capture and replay. A SkeletonMap ties each tracking joint to a point
along a rigging bone.

Reference pose: unit height, T-pose, Y up, facing +Z, left side at +X.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TRACKING_SKELETON_ID = "tracking-28"
RIGGING_SKELETON_ID = "rigging-17"


@dataclass(frozen=True)
class JointSpec:
    name: str
    parent: str | None
    reference: tuple[float, float, float]


@dataclass
class Skeleton:
    skeleton_id: str
    joints: list[JointSpec]
    symmetry_pairs: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        names = [j.name for j in self.joints]
        if len(set(names)) != len(names):
            raise ValueError("duplicate joint names")
        roots = [j for j in self.joints if j.parent is None]
        if len(roots) != 1:
            raise ValueError("skeleton needs exactly one root")
        by_name = {j.name: j for j in self.joints}
        for j in self.joints:
            if j.parent is not None and j.parent not in by_name:
                raise ValueError(f"unknown parent {j.parent} of {j.name}")
        self._by_name = by_name
        self._index = {name: i for i, name in enumerate(names)}

    @property
    def names(self) -> list[str]:
        return [j.name for j in self.joints]

    @property
    def root(self) -> str:
        return next(j.name for j in self.joints if j.parent is None)

    def parent_of(self, name: str) -> str | None:
        return self._by_name[name].parent

    def index_of(self, name: str) -> int:
        return self._index[name]

    def reference_positions(self) -> dict[str, np.ndarray]:
        return {j.name: np.array(j.reference, dtype=float) for j in self.joints}

    def bones(self) -> list[tuple[str, str]]:
        """(parent, child) segments, named by the child joint."""
        return [(j.parent, j.name) for j in self.joints if j.parent is not None]

    def bone_names(self) -> list[str]:
        return [child for _, child in self.bones()]

    def is_ancestor_or_self(self, ancestor: str, name: str) -> bool:
        cursor: str | None = name
        while cursor is not None:
            if cursor == ancestor:
                return True
            cursor = self.parent_of(cursor)
        return False

    def topological_order(self) -> list[str]:
        """Breadth-first from the root; parents always precede children."""
        children: dict[str, list[str]] = {j.name: [] for j in self.joints}
        for j in self.joints:
            if j.parent is not None:
                children[j.parent].append(j.name)
        order = [self.root]
        cursor = 0
        while cursor < len(order):
            order.extend(children[order[cursor]])
            cursor += 1
        return order


def rigging_skeleton() -> Skeleton:
    j = JointSpec
    joints = [
        j("pelvis", None, (0.0, 0.58, 0.0)),
        j("spine", "pelvis", (0.0, 0.70, 0.0)),
        j("chest", "spine", (0.0, 0.82, 0.0)),
        j("neck", "chest", (0.0, 0.90, 0.0)),
        j("head", "neck", (0.0, 0.97, 0.0)),
        j("shoulder.L", "chest", (0.10, 0.84, 0.0)),
        j("elbow.L", "shoulder.L", (0.26, 0.84, 0.0)),
        j("hand.L", "elbow.L", (0.42, 0.84, 0.0)),
        j("shoulder.R", "chest", (-0.10, 0.84, 0.0)),
        j("elbow.R", "shoulder.R", (-0.26, 0.84, 0.0)),
        j("hand.R", "elbow.R", (-0.42, 0.84, 0.0)),
        j("hip.L", "pelvis", (0.09, 0.52, 0.0)),
        j("knee.L", "hip.L", (0.10, 0.28, 0.0)),
        j("foot.L", "knee.L", (0.11, 0.05, 0.0)),
        j("hip.R", "pelvis", (-0.09, 0.52, 0.0)),
        j("knee.R", "hip.R", (-0.10, 0.28, 0.0)),
        j("foot.R", "knee.R", (-0.11, 0.05, 0.0)),
    ]
    pairs = [
        ("shoulder.L", "shoulder.R"),
        ("elbow.L", "elbow.R"),
        ("hand.L", "hand.R"),
        ("hip.L", "hip.R"),
        ("knee.L", "knee.R"),
        ("foot.L", "foot.R"),
    ]
    return Skeleton(RIGGING_SKELETON_ID, joints, pairs)


def tracking_skeleton() -> Skeleton:
    j = JointSpec
    joints = [
        j("hips", None, (0.0, 0.58, 0.0)),
        j("spine.1", "hips", (0.0, 0.64, 0.0)),
        j("spine.2", "spine.1", (0.0, 0.70, 0.0)),
        j("spine.3", "spine.2", (0.0, 0.76, 0.0)),
        j("chest", "spine.3", (0.0, 0.82, 0.0)),
        j("neck.1", "chest", (0.0, 0.90, 0.0)),
        j("neck.2", "neck.1", (0.0, 0.935, 0.0)),
        j("head", "neck.2", (0.0, 0.97, 0.0)),
        j("clavicle.L", "chest", (0.04, 0.828, 0.0)),
        j("shoulder.L", "clavicle.L", (0.10, 0.84, 0.0)),
        j("elbow.L", "shoulder.L", (0.26, 0.84, 0.0)),
        j("wrist.L", "elbow.L", (0.38, 0.84, 0.0)),
        j("hand.L", "wrist.L", (0.42, 0.84, 0.0)),
        j("clavicle.R", "chest", (-0.04, 0.828, 0.0)),
        j("shoulder.R", "clavicle.R", (-0.10, 0.84, 0.0)),
        j("elbow.R", "shoulder.R", (-0.26, 0.84, 0.0)),
        j("wrist.R", "elbow.R", (-0.38, 0.84, 0.0)),
        j("hand.R", "wrist.R", (-0.42, 0.84, 0.0)),
        j("hip.L", "hips", (0.09, 0.52, 0.0)),
        j("knee.L", "hip.L", (0.10, 0.28, 0.0)),
        j("ankle.L", "knee.L", (0.108, 0.096, 0.0)),
        j("foot.L", "ankle.L", (0.11, 0.05, 0.0)),
        j("toes.L", "foot.L", (0.1115, 0.0155, 0.0)),
        j("hip.R", "hips", (-0.09, 0.52, 0.0)),
        j("knee.R", "hip.R", (-0.10, 0.28, 0.0)),
        j("ankle.R", "knee.R", (-0.108, 0.096, 0.0)),
        j("foot.R", "ankle.R", (-0.11, 0.05, 0.0)),
        j("toes.R", "foot.R", (-0.1115, 0.0155, 0.0)),
    ]
    pairs = [
        ("clavicle.L", "clavicle.R"),
        ("shoulder.L", "shoulder.R"),
        ("elbow.L", "elbow.R"),
        ("wrist.L", "wrist.R"),
        ("hand.L", "hand.R"),
        ("hip.L", "hip.R"),
        ("knee.L", "knee.R"),
        ("ankle.L", "ankle.R"),
        ("foot.L", "foot.R"),
        ("toes.L", "toes.R"),
    ]
    skeleton = Skeleton(TRACKING_SKELETON_ID, joints, pairs)
    assert len(skeleton.joints) == 28
    return skeleton


@dataclass(frozen=True)
class MapEntry:
    rigging_joint: str
    weight: float  # position along parent(rigging_joint) -> rigging_joint; >1 extrapolates


@dataclass
class SkeletonMap:
    """Total map from tracking joints to points on rigging bones."""

    entries: dict[str, MapEntry]
    source: Skeleton = field(default_factory=rigging_skeleton)
    target: Skeleton = field(default_factory=tracking_skeleton)

    def validate(self) -> None:
        for name in self.target.names:
            if name not in self.entries:
                raise ValueError(f"skeleton map missing tracking joint {name}")
        for name in self.target.names:
            parent = self.target.parent_of(name)
            if parent is None:
                continue
            child_rj = self.entries[name].rigging_joint
            parent_rj = self.entries[parent].rigging_joint
            if not self.source.is_ancestor_or_self(parent_rj, child_rj):
                raise ValueError(
                    f"map not hierarchy-consistent: {parent}->{parent_rj} is not an "
                    f"ancestor of {name}->{child_rj}"
                )
            if parent_rj == child_rj and self.entries[parent].weight > self.entries[name].weight:
                raise ValueError(f"map weights out of order along bone at {name}")

    def place(self, positions: dict[str, np.ndarray], tracking_joint: str) -> np.ndarray:
        """Interpolated position of a tracking joint given rigging joint positions."""
        entry = self.entries[tracking_joint]
        joint = entry.rigging_joint
        parent = self.source.parent_of(joint)
        tip = positions[joint]
        base = positions[parent] if parent is not None else tip
        return base + entry.weight * (tip - base)


def default_skeleton_map() -> SkeletonMap:
    e = MapEntry
    entries = {
        "hips": e("pelvis", 1.0),
        "spine.1": e("spine", 0.5),
        "spine.2": e("spine", 1.0),
        "spine.3": e("chest", 0.5),
        "chest": e("chest", 1.0),
        "neck.1": e("neck", 1.0),
        "neck.2": e("head", 0.5),
        "head": e("head", 1.0),
        "clavicle.L": e("shoulder.L", 0.4),
        "shoulder.L": e("shoulder.L", 1.0),
        "elbow.L": e("elbow.L", 1.0),
        "wrist.L": e("hand.L", 0.75),
        "hand.L": e("hand.L", 1.0),
        "clavicle.R": e("shoulder.R", 0.4),
        "shoulder.R": e("shoulder.R", 1.0),
        "elbow.R": e("elbow.R", 1.0),
        "wrist.R": e("hand.R", 0.75),
        "hand.R": e("hand.R", 1.0),
        "hip.L": e("hip.L", 1.0),
        "knee.L": e("knee.L", 1.0),
        "ankle.L": e("foot.L", 0.8),
        "foot.L": e("foot.L", 1.0),
        "toes.L": e("foot.L", 1.15),
        "hip.R": e("hip.R", 1.0),
        "knee.R": e("knee.R", 1.0),
        "ankle.R": e("foot.R", 0.8),
        "foot.R": e("foot.R", 1.0),
        "toes.R": e("foot.R", 1.15),
    }
    skeleton_map = SkeletonMap(entries)
    skeleton_map.validate()
    return skeleton_map
