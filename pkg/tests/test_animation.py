import json
import math

import numpy as np
import pytest

from capy.animation import (
    AnimationClip,
    EmptyRecording,
    JointTransform,
    PoseFrame,
    SkeletonMismatch,
    UnmappedJoint,
    apply_pose,
    clip_json_bytes,
    load_clip,
    quat,
    record,
    retarget,
    sample,
    save_clip,
    scripted_pose_source,
)
from capy.procgen import humanoid_mesh
from capy.rigging import default_skeleton_map, rig


def wave_transforms(t: float) -> dict[str, JointTransform]:
    angle = math.sin(2 * math.pi * t) * math.radians(45)
    return {
        "shoulder.L": JointTransform(rotation=quat.from_axis_angle((0, 0, 1), angle)),
        "shoulder.R": JointTransform(rotation=quat.from_axis_angle((0, 0, 1), -angle)),
    }


@pytest.fixture(scope="module")
def wave_clip():
    source = scripted_pose_source(wave_transforms, duration=2.0)
    return record(source, name="wave", skeleton_id="tracking-28", sample_hz=20)


@pytest.fixture(scope="module")
def rigged():
    return rig(humanoid_mesh(resolution=48), voxel_resolution=32)


# --- record -----------------------------------------------------------------


def test_record_two_seconds_at_20hz(wave_clip):
    assert len(wave_clip.frames) == 40
    assert wave_clip.duration == 1.95


def test_record_empty_source_raises():
    source = scripted_pose_source(wave_transforms, duration=0.0)
    with pytest.raises(EmptyRecording):
        record(source, name="empty", skeleton_id="tracking-28")


def test_record_normalizes_quaternions():
    def source(t):
        if t >= 0.2:
            return None
        return {"head": JointTransform(rotation=(0.0, 0.0, 0.6, 1.2))}

    clip = record(source, name="n", skeleton_id="tracking-28")
    for frame in clip.frames:
        assert abs(quat.norm(frame.transforms["head"].rotation) - 1.0) <= 1e-6


# --- persistence ---------------------------------------------------------------


def test_save_load_roundtrip(tmp_path, wave_clip):
    path = tmp_path / "wave.json"
    save_clip(wave_clip, path)
    loaded, warnings = load_clip(path)
    assert warnings == []
    assert loaded.name == wave_clip.name
    assert loaded.skeleton_id == wave_clip.skeleton_id
    assert len(loaded.frames) == len(wave_clip.frames)
    for a, b in zip(wave_clip.frames, loaded.frames):
        assert a.timestamp == b.timestamp
        assert a.transforms == b.transforms  # bit-exact after record quantization


def test_save_is_byte_stable(tmp_path, wave_clip):
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    save_clip(wave_clip, p1)
    loaded, _ = load_clip(p1)
    save_clip(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_normalizes_non_unit_quaternion_with_warning(tmp_path):
    doc = {
        "version": 1,
        "name": "x",
        "skeleton_id": "tracking-28",
        "frames": [
            {"t": 0.0, "joints": {"head": {"q": [0.0, 0.0, 0.0, 0.9], "p": [0, 0, 0]}}}
        ],
    }
    path = tmp_path / "clip.json"
    path.write_text(json.dumps(doc))
    clip, warnings = load_clip(path)
    assert len(warnings) == 1
    assert abs(quat.norm(clip.frames[0].transforms["head"].rotation) - 1.0) <= 1e-9


def test_load_skeleton_mismatch(tmp_path, wave_clip):
    path = tmp_path / "wave.json"
    save_clip(wave_clip, path)
    with pytest.raises(SkeletonMismatch):
        load_clip(path, expected_skeleton_id="rigging-17")


def test_clip_json_schema_shape(wave_clip):
    obj = json.loads(clip_json_bytes(wave_clip))
    assert obj["version"] == 1
    assert obj["skeleton_id"] == "tracking-28"
    frame = obj["frames"][1]
    assert set(frame.keys()) == {"t", "joints"}
    joint = frame["joints"]["shoulder.L"]
    assert len(joint["q"]) == 4 and len(joint["p"]) == 3


# --- sampling -------------------------------------------------------------------


def test_sample_at_exact_timestamp(wave_clip):
    frame = sample(wave_clip, wave_clip.frames[7].timestamp)
    assert frame.transforms == wave_clip.frames[7].transforms


def test_sample_clamps_past_end(wave_clip):
    frame = sample(wave_clip, wave_clip.duration + 5.0)
    assert frame.transforms == wave_clip.frames[-1].transforms


def test_sample_slerp_midpoint():
    a = quat.from_axis_angle((0, 1, 0), 0.0)
    b = quat.from_axis_angle((0, 1, 0), math.radians(90))
    clip = AnimationClip(
        name="turn",
        skeleton_id="s",
        frames=[
            PoseFrame(0.0, {"j": JointTransform(rotation=a)}),
            PoseFrame(1.0, {"j": JointTransform(rotation=b)}),
        ],
    )
    mid = sample(clip, 0.5).transforms["j"].rotation
    expected = quat.from_axis_angle((0, 1, 0), math.radians(45))
    assert quat.angle_between(mid, expected) < 1e-9


def test_sample_interpolation_continuity(wave_clip):
    previous = None
    for k in range(0, 80):
        frame = sample(wave_clip, k * 0.025)
        value = frame.transforms["shoulder.L"].rotation
        if previous is not None:
            assert quat.angle_between(previous, value) < 0.2
        previous = value


# --- skinning --------------------------------------------------------------------


def test_identity_frame_reproduces_bind_pose(rigged):
    deformed = apply_pose(rigged, PoseFrame(0.0, {}))
    assert np.array_equal(deformed, rigged.mesh.vertices)


def test_rotating_arm_moves_only_arm_vertices(rigged):
    frame = PoseFrame(
        0.0,
        {"shoulder.L": JointTransform(rotation=quat.from_axis_angle((0, 0, 1), 0.3))},
    )
    deformed = apply_pose(rigged, frame)
    moved = np.linalg.norm(deformed - rigged.mesh.vertices, axis=1) > 1e-9
    subtree_bones = {"elbow.L", "wrist.L", "hand.L"}
    dense = rigged.weights.dense()
    names = rigged.weights.bone_names
    subtree_weight = sum(dense[:, names.index(b)] for b in subtree_bones)
    # every moved vertex carries weight on the rotated subtree
    assert np.all(subtree_weight[moved] > 1e-12)
    # and vertices with substantial subtree weight moved
    assert np.all(moved[subtree_weight > 0.5])


def test_lbs_blend_is_linear_in_weights(rigged):
    frame = PoseFrame(
        0.0,
        {"hips": JointTransform(rotation=quat.from_axis_angle((0, 1, 0), 0.7))},
    )
    from capy.animation.skinning import bone_images

    vertex = rigged.mesh.vertices[:1]
    images = bone_images(rigged, frame, vertex)
    # a 50/50 blend of two bones lands exactly on the average of the two
    # single-bone images
    blend = vertex + 0.5 * (images["spine.1"] - vertex) + 0.5 * (images["knee.L"] - vertex)
    direct = 0.5 * (images["spine.1"] + images["knee.L"])
    assert np.allclose(blend, direct)


def test_apply_pose_unknown_joint_raises(rigged):
    frame = PoseFrame(0.0, {"tail": JointTransform()})
    with pytest.raises(SkeletonMismatch):
        apply_pose(rigged, frame)


def test_volume_ratio_within_bounds(rigged, wave_clip):
    bind_lo, bind_hi = rigged.mesh.bounds()
    bind_volume = float(np.prod(bind_hi - bind_lo))
    for t in (0.0, 0.25, 0.5, 1.0, 1.9):
        deformed = apply_pose(rigged, sample(wave_clip, t))
        lo = deformed.min(axis=0)
        hi = deformed.max(axis=0)
        ratio = float(np.prod(hi - lo)) / bind_volume
        assert 0.25 <= ratio <= 4.0, (t, ratio)


# --- retarget ----------------------------------------------------------------------


def rigging_clip():
    angle = math.radians(60)
    return AnimationClip(
        name="elbow-only",
        skeleton_id="rigging-17",
        frames=[
            PoseFrame(0.0, {"elbow.L": JointTransform(rotation=quat.IDENTITY)}),
            PoseFrame(
                1.0,
                {"elbow.L": JointTransform(rotation=quat.from_axis_angle((0, 0, 1), angle))},
            ),
        ],
    )


def test_retarget_transfers_mapped_joints():
    clip = rigging_clip()
    out = retarget(clip, default_skeleton_map())
    assert out.skeleton_id == "tracking-28"
    # elbow.L maps at weight 1 -> rotation verbatim
    assert out.frames[1].transforms["elbow.L"].rotation == clip.frames[1].transforms[
        "elbow.L"
    ].rotation


def test_retarget_wrist_inherits_fraction_of_elbow():
    clip = rigging_clip()
    skeleton_map = default_skeleton_map()
    out = retarget(clip, skeleton_map)
    weight = skeleton_map.entries["wrist.L"].weight
    elbow_rotation = clip.frames[1].transforms["elbow.L"].rotation
    expected = quat.slerp(quat.IDENTITY, elbow_rotation, weight)
    actual = out.frames[1].transforms["wrist.L"].rotation
    assert quat.angle_between(expected, actual) < 1e-9


def test_retarget_rejects_wrong_skeleton(wave_clip):
    with pytest.raises(UnmappedJoint):
        retarget(wave_clip, default_skeleton_map())


def test_retarget_identity_weight_joints_roundtrip():
    # joints mapped at weight 1 transfer rotations verbatim, so a clip
    # touching only those joints survives a retarget unchanged
    skeleton_map = default_skeleton_map()
    clip = AnimationClip(
        name="spin",
        skeleton_id="rigging-17",
        frames=[
            PoseFrame(
                0.0,
                {
                    "elbow.L": JointTransform(
                        rotation=quat.from_axis_angle((1, 0, 0), 0.4),
                        translation=(0.0, 0.1, 0.0),
                    )
                },
            )
        ],
    )
    out = retarget(clip, skeleton_map)
    assert out.frames[0].transforms["elbow.L"] == clip.frames[0].transforms["elbow.L"]
