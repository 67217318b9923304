from . import quat
from .clip import (
    AnimationClip,
    ClipError,
    EmptyRecording,
    JointTransform,
    PoseFrame,
    PoseSource,
    SkeletonMismatch,
    clip_from_obj,
    clip_json_bytes,
    clip_pose_source,
    clip_to_obj,
    frame_iterator,
    load_clip,
    record,
    sample,
    save_clip,
    scripted_pose_source,
)
from .retarget import UnmappedJoint, retarget
from .skinning import apply_pose, bone_matrices, joint_world_transforms

__all__ = [
    "AnimationClip",
    "ClipError",
    "EmptyRecording",
    "JointTransform",
    "PoseFrame",
    "PoseSource",
    "SkeletonMismatch",
    "UnmappedJoint",
    "apply_pose",
    "bone_matrices",
    "clip_from_obj",
    "clip_json_bytes",
    "clip_pose_source",
    "clip_to_obj",
    "frame_iterator",
    "joint_world_transforms",
    "load_clip",
    "quat",
    "record",
    "retarget",
    "sample",
    "save_clip",
    "scripted_pose_source",
]
