"""The simulated physical world.

All poses live on an integer lattice (millimeters / millidegrees); the
on-disk scene format uses meters as floats and is converted on load with
round-half-even. Zones are lettered A-Z in creation order and extrude a
rectangle on a plane into a 3D collision box.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..objects import OBJECT_CLASS_SET
from .geometry import degrees_to_mdeg, displacement_mm, meters_to_mm, normalize_mdeg

DEFAULT_ZONE_HEIGHT_MM = 500
DEFAULT_CHARACTER_HALF_EXTENTS_MM = (150, 150, 150)
MAX_ZONES = 26


class SceneFormatError(ValueError):
    pass


class UnknownZone(KeyError):
    pass


class ZoneLimitReached(RuntimeError):
    pass


class OffPlane(ValueError):
    pass


@dataclass(frozen=True)
class Plane:
    id: str
    origin: tuple[int, int, int]  # mm
    normal: tuple[float, float, float]
    half_extents: tuple[int, int]  # mm, along X/Z

    @property
    def is_horizontal(self) -> bool:
        return abs(self.normal[1]) > 0.999

    def contains_xz(self, x: int, z: int) -> bool:
        return (
            abs(x - self.origin[0]) <= self.half_extents[0]
            and abs(z - self.origin[2]) <= self.half_extents[1]
        )


@dataclass
class ConfidenceProfile:
    """Step function tick -> confidence; constant when a single step."""

    steps: tuple[tuple[int, float], ...] = ((0, 1.0),)

    def at(self, tick: int) -> float:
        value = self.steps[0][1]
        for start, conf in self.steps:
            if tick >= start:
                value = conf
            else:
                break
        return value

    @staticmethod
    def constant(value: float) -> "ConfidenceProfile":
        return ConfidenceProfile(((0, float(value)),))


@dataclass
class PhysicalObject:
    class_name: str
    position: tuple[int, int, int]  # mm, box center
    yaw_mdeg: int
    half_extents: tuple[int, int, int]  # mm
    confidence: ConfidenceProfile = field(default_factory=ConfidenceProfile)

    def __post_init__(self) -> None:
        if self.class_name not in OBJECT_CLASS_SET:
            raise SceneFormatError(f"object class {self.class_name!r} not in the catalog")

    def box(self) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
        p, h = self.position, self.half_extents
        return (
            (p[0] - h[0], p[1] - h[1], p[2] - h[2]),
            (p[0] + h[0], p[1] + h[1], p[2] + h[2]),
        )


@dataclass
class Zone:
    label: str
    plane_id: str
    center: tuple[int, int, int]  # mm, on the plane surface
    half_extents: tuple[int, int]  # mm, along X/Z
    height: int = DEFAULT_ZONE_HEIGHT_MM  # mm, extruded up from the plane

    def box(self) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
        c, h = self.center, self.half_extents
        return (
            (c[0] - h[0], c[1], c[2] - h[1]),
            (c[0] + h[0], c[1] + self.height, c[2] + h[1]),
        )


@dataclass
class CameraSpec:
    position: tuple[int, int, int]  # mm
    look_at: tuple[int, int, int]  # mm
    up: tuple[float, float, float] = (0.0, 1.0, 0.0)
    fov_deg: float = 60.0
    resolution: tuple[int, int] = (1000, 1000)

    def __post_init__(self) -> None:
        if not 0.0 < self.fov_deg < 180.0:
            raise SceneFormatError("camera fov must be in (0, 180)")
        if self.resolution[0] <= 0 or self.resolution[1] <= 0:
            raise SceneFormatError("camera resolution must be positive")


@dataclass
class Keyframe:
    tick: int
    position: tuple[int, int, int]
    yaw_mdeg: int


@dataclass
class ScriptedMotion:
    """Hold-previous keyframed motion for an object or the camera."""

    target: str  # "object:<index>" or "camera"
    keyframes: list[Keyframe]

    def pose_at(self, tick: int) -> Keyframe:
        current = self.keyframes[0]
        for kf in self.keyframes:
            if kf.tick <= tick:
                current = kf
            else:
                break
        return current


@dataclass
class Spawn:
    position: tuple[int, int, int]  # mm, character AABB center
    yaw_mdeg: int = 0


@dataclass
class SceneDescription:
    planes: list[Plane] = field(default_factory=list)
    objects: list[PhysicalObject] = field(default_factory=list)
    zones: list[Zone] = field(default_factory=list)
    camera: CameraSpec | None = None
    spawn: Spawn = field(default_factory=lambda: Spawn((0, 150, 0)))
    scripted_motion: list[ScriptedMotion] = field(default_factory=list)

    def validate_structure(self) -> None:
        if not any(p.is_horizontal for p in self.planes):
            raise SceneFormatError("scene needs at least one horizontal plane")
        if not any(
            p.is_horizontal and p.contains_xz(self.spawn.position[0], self.spawn.position[2])
            for p in self.planes
        ):
            raise SceneFormatError("spawn does not lie on any horizontal plane")
        labels = [z.label for z in self.zones]
        if len(labels) != len(set(labels)):
            raise SceneFormatError("zone labels must be unique")

    def plane_by_id(self, plane_id: str) -> Plane:
        for plane in self.planes:
            if plane.id == plane_id:
                return plane
        raise SceneFormatError(f"unknown plane {plane_id!r}")

    def zone_by_label(self, label: str) -> Zone:
        for zone in self.zones:
            if zone.label == label:
                return zone
        raise UnknownZone(label)

    def zone_labels(self) -> list[str]:
        return [z.label for z in self.zones]


# --- zone authoring ----------------------------------------------------------


def create_zone(
    scene: SceneDescription,
    plane_id: str,
    center_xz: tuple[int, int],
    half_extents: tuple[int, int],
    height: int = DEFAULT_ZONE_HEIGHT_MM,
) -> Zone:
    """Create the next alphabetically-labeled zone, placed on the plane."""
    if len(scene.zones) >= MAX_ZONES:
        raise ZoneLimitReached(f"cannot create more than {MAX_ZONES} zones")
    label = chr(ord("A") + len(scene.zones))
    plane = scene.plane_by_id(plane_id)
    zone = Zone(
        label=label,
        plane_id=plane_id,
        center=(center_xz[0], plane.origin[1], center_xz[1]),
        half_extents=half_extents,
        height=height,
    )
    zone = _snapped(plane, zone)
    scene.zones.append(zone)
    return zone


def select_zone(scene: SceneDescription, label: str) -> Zone:
    return scene.zone_by_label(label)


def place_zone(
    scene: SceneDescription,
    label: str,
    center: tuple[int, int, int],
    half_extents: tuple[int, int] | None = None,
) -> Zone:
    """Move a zone: snap its center to the plane surface, clamp to its rect."""
    zone = scene.zone_by_label(label)
    plane = scene.plane_by_id(zone.plane_id)
    updated = replace(
        zone,
        center=(center[0], plane.origin[1], center[2]),
        half_extents=half_extents if half_extents is not None else zone.half_extents,
    )
    updated = _snapped(plane, updated)
    scene.zones[scene.zones.index(zone)] = updated
    return updated


def _snapped(plane: Plane, zone: Zone) -> Zone:
    cx = min(max(zone.center[0], plane.origin[0] - plane.half_extents[0]),
             plane.origin[0] + plane.half_extents[0])
    cz = min(max(zone.center[2], plane.origin[2] - plane.half_extents[1]),
             plane.origin[2] + plane.half_extents[1])
    hx = min(
        zone.half_extents[0],
        plane.half_extents[0] - abs(cx - plane.origin[0]),
    )
    hz = min(
        zone.half_extents[1],
        plane.half_extents[1] - abs(cz - plane.origin[2]),
    )
    if hx <= 0 or hz <= 0:
        raise OffPlane(f"zone {zone.label} does not fit on plane {plane.id}")
    return replace(zone, center=(cx, plane.origin[1], cz), half_extents=(hx, hz))


# --- mutable run state --------------------------------------------------------


@dataclass
class Character:
    position: tuple[int, int, int]  # mm, AABB center
    yaw_mdeg: int
    half_extents: tuple[int, int, int] = DEFAULT_CHARACTER_HALF_EXTENTS_MM

    def box(self) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
        p, h = self.position, self.half_extents
        return (
            (p[0] - h[0], p[1] - h[1], p[2] - h[2]),
            (p[0] + h[0], p[1] + h[1], p[2] + h[2]),
        )


@dataclass
class Detection:
    bbox: tuple[float, float, float, float] | None  # px (x0, y0, x1, y1)
    confidence: float
    status: str  # searching | found | touched


@dataclass
class PerceptionState:
    last_refresh_tick: int = -1
    detections: dict[str, Detection] = field(default_factory=dict)
    zone_touches: dict[str, bool] = field(default_factory=dict)

    def object_status(self, class_name: str) -> str:
        det = self.detections.get(class_name)
        return det.status if det is not None else "searching"

    def object_touched(self, class_name: str) -> bool:
        return self.object_status(class_name) == "touched"

    def zone_touched(self, label: str) -> bool:
        return self.zone_touches.get(label, False)


@dataclass
class SceneState:
    description: SceneDescription
    character: Character
    worn: set[str] = field(default_factory=set)
    trail_active: bool = False
    trail: list[tuple[int, int, int]] = field(default_factory=list)
    active_animation: str | None = None
    perception: PerceptionState = field(default_factory=PerceptionState)
    tick: int = 0

    @staticmethod
    def from_description(description: SceneDescription) -> "SceneState":
        description.validate_structure()
        spawn = description.spawn
        return SceneState(
            description=description,
            character=Character(position=spawn.position, yaw_mdeg=normalize_mdeg(spawn.yaw_mdeg)),
        )

    # -- scripted motion ------------------------------------------------------

    def object_pose(self, index: int) -> PhysicalObject:
        """Object with scripted motion applied for the current tick."""
        obj = self.description.objects[index]
        for motion in self.description.scripted_motion:
            if motion.target == f"object:{index}":
                kf = motion.pose_at(self.tick)
                return replace(obj, position=kf.position, yaw_mdeg=kf.yaw_mdeg)
        return obj

    def camera_pose(self) -> CameraSpec | None:
        cam = self.description.camera
        if cam is None:
            return None
        for motion in self.description.scripted_motion:
            if motion.target == "camera":
                kf = motion.pose_at(self.tick)
                return replace(cam, position=kf.position)
        return cam

    # -- kinematics ------------------------------------------------------------

    def move_character_to(self, position: tuple[int, int, int]) -> bool:
        moved = position != self.character.position
        self.character.position = position
        if moved and self.trail_active:
            self.trail.append(position)
        return moved

    def turn_character_by(self, mdeg: int) -> None:
        self.character.yaw_mdeg = normalize_mdeg(self.character.yaw_mdeg + mdeg)

    def forward_target(self, origin: tuple[int, int, int], distance_mm: int) -> tuple[int, int, int]:
        dx, dz = displacement_mm(distance_mm, self.character.yaw_mdeg)
        return (origin[0] + dx, origin[1], origin[2] + dz)

    def set_trail(self, active: bool) -> None:
        self.trail_active = active

    def set_wear(self, accessory: str, on: bool) -> bool:
        """Returns True when the worn set changed."""
        if on:
            if accessory in self.worn:
                return False
            self.worn.add(accessory)
            return True
        if accessory not in self.worn:
            return False
        self.worn.discard(accessory)
        return True

    # -- hashing / snapshots -----------------------------------------------------

    def hash_obj(self) -> dict:
        return {
            "tick": self.tick,
            "pos": list(self.character.position),
            "yaw": self.character.yaw_mdeg,
            "worn": sorted(self.worn),
            "trail_active": self.trail_active,
            "trail": [list(p) for p in self.trail],
            "animation": self.active_animation,
            "objects": [
                [list(self.object_pose(i).position), self.object_pose(i).yaw_mdeg]
                for i in range(len(self.description.objects))
            ],
            "perception": {
                "last": self.perception.last_refresh_tick,
                "objects": {
                    name: det.status for name, det in sorted(self.perception.detections.items())
                },
                "zones": dict(sorted(self.perception.zone_touches.items())),
            },
        }

    def scene_hash(self) -> str:
        payload = json.dumps(self.hash_obj(), separators=(",", ":"), sort_keys=True)
        return hashlib.blake2b(payload.encode("utf-8"), digest_size=8).hexdigest()

    def snapshot_obj(self) -> dict:
        return {
            "character": {
                "position": list(self.character.position),
                "yaw_mdeg": self.character.yaw_mdeg,
                "half_extents": list(self.character.half_extents),
            },
            "worn": sorted(self.worn),
            "trail_active": self.trail_active,
            "trail": [list(p) for p in self.trail],
            "active_animation": self.active_animation,
            "tick": self.tick,
            "perception": {
                "last_refresh_tick": self.perception.last_refresh_tick,
                "detections": {
                    name: {
                        "bbox": list(det.bbox) if det.bbox else None,
                        "confidence": det.confidence,
                        "status": det.status,
                    }
                    for name, det in sorted(self.perception.detections.items())
                },
                "zone_touches": dict(sorted(self.perception.zone_touches.items())),
            },
        }

    @staticmethod
    def restore(description: SceneDescription, obj: dict) -> "SceneState":
        state = SceneState.from_description(description)
        ch = obj["character"]
        state.character = Character(
            position=tuple(ch["position"]),
            yaw_mdeg=ch["yaw_mdeg"],
            half_extents=tuple(ch["half_extents"]),
        )
        state.worn = set(obj["worn"])
        state.trail_active = obj["trail_active"]
        state.trail = [tuple(p) for p in obj["trail"]]
        state.active_animation = obj["active_animation"]
        state.tick = obj["tick"]
        perc = obj["perception"]
        state.perception = PerceptionState(
            last_refresh_tick=perc["last_refresh_tick"],
            detections={
                name: Detection(
                    bbox=tuple(d["bbox"]) if d["bbox"] else None,
                    confidence=d["confidence"],
                    status=d["status"],
                )
                for name, d in perc["detections"].items()
            },
            zone_touches=dict(perc["zone_touches"]),
        )
        return state


# --- on-disk format -----------------------------------------------------------


def _mm3(values) -> tuple[int, int, int]:
    if not isinstance(values, (list, tuple)) or len(values) != 3:
        raise SceneFormatError(f"expected [x, y, z], got {values!r}")
    return tuple(meters_to_mm(float(v)) for v in values)


def _profile_from_obj(obj) -> ConfidenceProfile:
    if isinstance(obj, (int, float)):
        return ConfidenceProfile.constant(float(obj))
    if isinstance(obj, list):
        steps = tuple(sorted((int(e["tick"]), float(e["value"])) for e in obj))
        if not steps:
            raise SceneFormatError("confidence profile needs at least one step")
        return ConfidenceProfile(steps)
    raise SceneFormatError(f"bad confidence profile {obj!r}")


def scene_from_obj(doc: dict) -> SceneDescription:
    try:
        planes = [
            Plane(
                id=str(p.get("id", f"plane{i}")),
                origin=_mm3(p["origin"]),
                normal=tuple(float(v) for v in p.get("normal", (0.0, 1.0, 0.0))),
                half_extents=(
                    meters_to_mm(float(p["extents"][0])),
                    meters_to_mm(float(p["extents"][1])),
                ),
            )
            for i, p in enumerate(doc.get("planes", []))
        ]
        objects = [
            PhysicalObject(
                class_name=str(o["class"]),
                position=_mm3(o["position"]),
                yaw_mdeg=degrees_to_mdeg(float(o.get("yaw_deg", 0.0))),
                half_extents=_mm3(o["half_extents"]),
                confidence=_profile_from_obj(o.get("confidence", 1.0)),
            )
            for o in doc.get("objects", [])
        ]
        zones = [
            Zone(
                label=str(z["label"]),
                plane_id=str(z["plane"]),
                center=_mm3(z["center"]),
                half_extents=(
                    meters_to_mm(float(z["half_extents"][0])),
                    meters_to_mm(float(z["half_extents"][1])),
                ),
                height=meters_to_mm(float(z.get("height", 0.5))),
            )
            for z in doc.get("zones", [])
        ]
        camera = None
        if "camera" in doc:
            c = doc["camera"]
            camera = CameraSpec(
                position=_mm3(c["position"]),
                look_at=_mm3(c["look_at"]),
                up=tuple(float(v) for v in c.get("up", (0.0, 1.0, 0.0))),
                fov_deg=float(c.get("fov_deg", 60.0)),
                resolution=tuple(int(v) for v in c.get("resolution", (1000, 1000))),
            )
        spawn_doc = doc.get("spawn", {"position": [0.0, 0.15, 0.0]})
        spawn = Spawn(
            position=_mm3(spawn_doc["position"]),
            yaw_mdeg=degrees_to_mdeg(float(spawn_doc.get("yaw_deg", 0.0))),
        )
        motions = [
            ScriptedMotion(
                target=str(m["target"]),
                keyframes=sorted(
                    (
                        Keyframe(
                            tick=int(k["tick"]),
                            position=_mm3(k["position"]),
                            yaw_mdeg=degrees_to_mdeg(float(k.get("yaw_deg", 0.0))),
                        )
                        for k in m["keyframes"]
                    ),
                    key=lambda kf: kf.tick,
                ),
            )
            for m in doc.get("scripted_motion", [])
        ]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SceneFormatError):
            raise
        raise SceneFormatError(f"malformed scene: {exc}") from exc
    scene = SceneDescription(
        planes=planes,
        objects=objects,
        zones=zones,
        camera=camera,
        spawn=spawn,
        scripted_motion=motions,
    )
    scene.validate_structure()
    return scene


def load_scene(path: str | Path) -> SceneDescription:
    with open(path, "r", encoding="utf-8") as fh:
        return scene_from_obj(json.load(fh))


def scene_to_obj(scene: SceneDescription) -> dict:
    def m3(mm):
        return [mm[0] / 1000.0, mm[1] / 1000.0, mm[2] / 1000.0]

    doc: dict = {
        "planes": [
            {
                "id": p.id,
                "origin": m3(p.origin),
                "normal": list(p.normal),
                "extents": [p.half_extents[0] / 1000.0, p.half_extents[1] / 1000.0],
            }
            for p in scene.planes
        ],
        "objects": [
            {
                "class": o.class_name,
                "position": m3(o.position),
                "yaw_deg": o.yaw_mdeg / 1000.0,
                "half_extents": m3(o.half_extents),
                "confidence": [{"tick": t, "value": v} for t, v in o.confidence.steps],
            }
            for o in scene.objects
        ],
        "zones": [
            {
                "label": z.label,
                "plane": z.plane_id,
                "center": m3(z.center),
                "half_extents": [z.half_extents[0] / 1000.0, z.half_extents[1] / 1000.0],
                "height": z.height / 1000.0,
            }
            for z in scene.zones
        ],
        "spawn": {
            "position": m3(scene.spawn.position),
            "yaw_deg": scene.spawn.yaw_mdeg / 1000.0,
        },
    }
    if scene.camera is not None:
        doc["camera"] = {
            "position": m3(scene.camera.position),
            "look_at": m3(scene.camera.look_at),
            "up": list(scene.camera.up),
            "fov_deg": scene.camera.fov_deg,
            "resolution": list(scene.camera.resolution),
        }
    if scene.scripted_motion:
        doc["scripted_motion"] = [
            {
                "target": m.target,
                "keyframes": [
                    {"tick": k.tick, "position": m3(k.position), "yaw_deg": k.yaw_mdeg / 1000.0}
                    for k in m.keyframes
                ],
            }
            for m in scene.scripted_motion
        ]
    return doc


def save_scene(scene: SceneDescription, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene_to_obj(scene), fh, indent=2)
        fh.write("\n")
