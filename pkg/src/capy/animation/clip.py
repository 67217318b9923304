"""Animation clips: recording, persistence, and sampling.

A clip is a sequence of timestamped frames of local joint transforms for a
named skeleton. Clips serialize to JSON with floats at 9 significant
digits; record() quantizes to that precision up front so a recorded clip,
its file, and its reload are transform-for-transform identical.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from . import quat

QUAT_NORM_TOLERANCE = 1e-6


class ClipError(ValueError):
    pass


class EmptyRecording(ClipError):
    pass


class SkeletonMismatch(ClipError):
    pass


def quantize(value: float) -> float:
    """Round to the 9-significant-digit on-disk precision.

    Negative zero folds to zero: JSON offers no signed integer zero, so the
    sign would not survive a round-trip.
    """
    rounded = float(f"{value:.9g}")
    return 0.0 if rounded == 0.0 else rounded


@dataclass(frozen=True)
class JointTransform:
    rotation: tuple[float, float, float, float] = quat.IDENTITY  # x, y, z, w
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def quantized(self) -> "JointTransform":
        rotation = quat.normalize(self.rotation)
        return JointTransform(
            rotation=tuple(quantize(v) for v in rotation),
            translation=tuple(quantize(v) for v in self.translation),
        )


@dataclass
class PoseFrame:
    timestamp: float
    transforms: dict[str, JointTransform] = field(default_factory=dict)

    def validate(self) -> None:
        for name, transform in self.transforms.items():
            n = quat.norm(transform.rotation)
            if abs(n - 1.0) > QUAT_NORM_TOLERANCE:
                raise ClipError(f"joint {name} rotation is not unit (norm {n})")

    def quantized(self) -> "PoseFrame":
        return PoseFrame(
            timestamp=quantize(self.timestamp),
            transforms={name: t.quantized() for name, t in self.transforms.items()},
        )


@dataclass
class AnimationClip:
    name: str
    skeleton_id: str
    frames: list[PoseFrame]

    def __post_init__(self) -> None:
        if not self.frames:
            raise ClipError("clip needs at least one frame")
        times = [f.timestamp for f in self.frames]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ClipError("frame timestamps must strictly increase")

    @property
    def duration(self) -> float:
        return self.frames[-1].timestamp

    def joint_names(self) -> list[str]:
        seen: list[str] = []
        for frame in self.frames:
            for name in frame.transforms:
                if name not in seen:
                    seen.append(name)
        return seen

    def validate(self) -> None:
        for frame in self.frames:
            frame.validate()


PoseSource = Callable[[float], dict[str, JointTransform] | None]
"""A pose source maps a sample time (seconds) to joint transforms.

Returning None ends the stream. Clip playback, timeline edits, and
scripted generators all fit this shape.
"""


def clip_pose_source(clip: AnimationClip) -> PoseSource:
    def source(t: float) -> dict[str, JointTransform] | None:
        if t > clip.duration + 1e-9:
            return None
        return sample(clip, t).transforms

    return source


def scripted_pose_source(
    fn: Callable[[float], dict[str, JointTransform]], duration: float
) -> PoseSource:
    def source(t: float) -> dict[str, JointTransform] | None:
        if t >= duration:
            return None
        return fn(t)

    return source


def record(
    source: PoseSource,
    name: str,
    skeleton_id: str,
    sample_hz: int = 20,
    max_seconds: float = 60.0,
) -> AnimationClip:
    """Sample a pose source into a clip; quaternions are normalized and all
    values quantized to the persisted precision."""
    frames: list[PoseFrame] = []
    step = 1.0 / sample_hz
    index = 0
    while index * step < max_seconds - 1e-9:
        t = index * step
        transforms = source(t)
        if transforms is None:
            break
        frame = PoseFrame(timestamp=t, transforms=dict(transforms)).quantized()
        frames.append(frame)
        index += 1
    if not frames:
        raise EmptyRecording("pose source yielded no frames")
    clip = AnimationClip(name=name, skeleton_id=skeleton_id, frames=frames)
    clip.validate()
    return clip


# --- persistence ---------------------------------------------------------------


def clip_to_obj(clip: AnimationClip) -> dict:
    return {
        "version": 1,
        "name": clip.name,
        "skeleton_id": clip.skeleton_id,
        "frames": [
            {
                "t": frame.timestamp,
                "joints": {
                    name: {"q": list(t.rotation), "p": list(t.translation)}
                    for name, t in sorted(frame.transforms.items())
                },
            }
            for frame in clip.frames
        ],
    }


def _format_value(value) -> str:
    if isinstance(value, float):
        return f"{0.0 if value == 0.0 else value:.9g}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_format_value(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ",".join(f"{json.dumps(k)}:{_format_value(v)}" for k, v in value.items()) + "}"
    return json.dumps(value)


def clip_json_bytes(clip: AnimationClip) -> bytes:
    return _format_value(clip_to_obj(clip)).encode("utf-8")


def save_clip(clip: AnimationClip, path: str | Path) -> None:
    Path(path).write_bytes(clip_json_bytes(clip) + b"\n")


def clip_from_obj(obj: dict, expected_skeleton_id: str | None = None) -> AnimationClip:
    warnings: list[str] = []
    return _clip_from_obj(obj, expected_skeleton_id, warnings)


def load_clip(
    path: str | Path, expected_skeleton_id: str | None = None
) -> tuple[AnimationClip, list[str]]:
    """Load a clip; returns (clip, warnings). Non-unit quaternions are
    normalized with a warning diagnostic."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ClipError(f"invalid clip JSON: {exc.msg}") from exc
    warnings: list[str] = []
    clip = _clip_from_obj(obj, expected_skeleton_id, warnings)
    return clip, warnings


def _clip_from_obj(
    obj: dict, expected_skeleton_id: str | None, warnings: list[str]
) -> AnimationClip:
    if not isinstance(obj, dict):
        raise ClipError("clip document must be an object")
    if obj.get("version", 1) != 1:
        raise ClipError(f"unsupported clip version {obj.get('version')!r}")
    for key in ("name", "skeleton_id", "frames"):
        if key not in obj:
            raise ClipError(f"clip missing field {key!r}")
    skeleton_id = obj["skeleton_id"]
    if expected_skeleton_id is not None and skeleton_id != expected_skeleton_id:
        raise SkeletonMismatch(
            f"clip is for skeleton {skeleton_id!r}, expected {expected_skeleton_id!r}"
        )
    frames = []
    for i, frame_obj in enumerate(obj["frames"]):
        try:
            transforms = {}
            for name, joint in frame_obj["joints"].items():
                rotation = tuple(float(v) for v in joint["q"])
                translation = tuple(float(v) for v in joint.get("p", (0.0, 0.0, 0.0)))
                if len(rotation) != 4 or len(translation) != 3:
                    raise ClipError(f"frame {i} joint {name} has malformed transform")
                n = quat.norm(rotation)
                if n == 0.0:
                    raise ClipError(f"frame {i} joint {name} has a zero rotation")
                if abs(n - 1.0) > QUAT_NORM_TOLERANCE:
                    warnings.append(
                        f"frame {i} joint {name}: rotation norm {n:.6g} normalized"
                    )
                    rotation = quat.normalize(rotation)
                transforms[name] = JointTransform(rotation=rotation, translation=translation)
            frames.append(PoseFrame(timestamp=float(frame_obj["t"]), transforms=transforms))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ClipError):
                raise
            raise ClipError(f"malformed frame {i}: {exc}") from exc
    clip = AnimationClip(name=str(obj["name"]), skeleton_id=str(skeleton_id), frames=frames)
    clip.validate()
    return clip


# --- sampling -------------------------------------------------------------------


def sample(clip: AnimationClip, t: float) -> PoseFrame:
    """Pose at time t: exact frame at a frame timestamp, slerp between
    frames, clamped to the last frame beyond the end (non-looping)."""
    if t < 0:
        raise ClipError("sample time must be non-negative")
    frames = clip.frames
    if t <= frames[0].timestamp:
        return PoseFrame(timestamp=t, transforms=dict(frames[0].transforms))
    if t >= frames[-1].timestamp:
        return PoseFrame(timestamp=t, transforms=dict(frames[-1].transforms))
    lo, hi = 0, len(frames) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if frames[mid].timestamp <= t:
            lo = mid
        else:
            hi = mid
    before, after = frames[lo], frames[hi]
    if math.isclose(t, before.timestamp, rel_tol=0.0, abs_tol=1e-12):
        return PoseFrame(timestamp=t, transforms=dict(before.transforms))
    u = (t - before.timestamp) / (after.timestamp - before.timestamp)
    names = set(before.transforms) | set(after.transforms)
    transforms = {}
    for name in sorted(names):
        a = before.transforms.get(name, JointTransform())
        b = after.transforms.get(name, JointTransform())
        rotation = quat.slerp(a.rotation, b.rotation, u)
        translation = tuple(
            (1.0 - u) * av + u * bv for av, bv in zip(a.translation, b.translation)
        )
        transforms[name] = JointTransform(rotation=rotation, translation=translation)
    return PoseFrame(timestamp=t, transforms=transforms)


def frame_iterator(clip: AnimationClip, sample_hz: int) -> Iterator[PoseFrame]:
    step = 1.0 / sample_hz
    count = int(math.floor(clip.duration / step + 1e-9)) + 1
    for k in range(count):
        yield sample(clip, k * step)
