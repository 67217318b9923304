"""Clip retargeting across skeletons through a skeleton map.

Target joints that coincide with a source joint (weight 1) take its
rotation and translation verbatim; intermediate joints placed partway
along a source bone inherit a fraction of the bone's proximal-joint
rotation, slerped from identity by their interpolation weight.
"""
from __future__ import annotations

from ..rigging.skeleton import SkeletonMap
from . import quat
from .clip import AnimationClip, ClipError, JointTransform, PoseFrame


class UnmappedJoint(ClipError):
    pass


def retarget(clip: AnimationClip, skeleton_map: SkeletonMap) -> AnimationClip:
    """Transfer a clip from the map's source skeleton to its target."""
    source = skeleton_map.source
    target = skeleton_map.target
    if clip.skeleton_id != source.skeleton_id:
        raise UnmappedJoint(
            f"clip skeleton {clip.skeleton_id!r} does not match map source "
            f"{source.skeleton_id!r}"
        )
    frames = []
    for frame in clip.frames:
        transforms: dict[str, JointTransform] = {}
        for name in target.names:
            entry = skeleton_map.entries.get(name)
            if entry is None:
                raise UnmappedJoint(f"tracking joint {name} has no map entry")
            if entry.weight >= 1.0:
                src = frame.transforms.get(entry.rigging_joint)
                if src is not None:
                    transforms[name] = src
                continue
            proximal = source.parent_of(entry.rigging_joint)
            if proximal is None:
                continue
            src = frame.transforms.get(proximal)
            if src is None:
                continue
            rotation = quat.slerp(quat.IDENTITY, src.rotation, entry.weight)
            transforms[name] = JointTransform(rotation=rotation)
        frames.append(PoseFrame(timestamp=frame.timestamp, transforms=transforms))
    return AnimationClip(
        name=clip.name, skeleton_id=target.skeleton_id, frames=frames
    )
