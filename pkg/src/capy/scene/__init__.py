from .geometry import (
    boxes_overlap,
    cos_sin_q30,
    degrees_to_mdeg,
    displacement_mm,
    meters_to_mm,
    mm_to_meters,
    normalize_mdeg,
    ray_aabb_entry,
    ray_oriented_box_entry,
)
from .model import (
    CameraSpec,
    Character,
    ConfidenceProfile,
    Detection,
    Keyframe,
    OffPlane,
    PerceptionState,
    PhysicalObject,
    Plane,
    SceneDescription,
    SceneFormatError,
    SceneState,
    ScriptedMotion,
    Spawn,
    UnknownZone,
    Zone,
    ZoneLimitReached,
    create_zone,
    load_scene,
    place_zone,
    save_scene,
    scene_from_obj,
    scene_to_obj,
    select_zone,
)
from .perception import (
    project_object,
    rays_hit_character_first,
    refresh_perception,
    touches_object,
    touches_zone,
)

__all__ = [
    "CameraSpec",
    "Character",
    "ConfidenceProfile",
    "Detection",
    "Keyframe",
    "OffPlane",
    "PerceptionState",
    "PhysicalObject",
    "Plane",
    "SceneDescription",
    "SceneFormatError",
    "SceneState",
    "ScriptedMotion",
    "Spawn",
    "UnknownZone",
    "Zone",
    "ZoneLimitReached",
    "boxes_overlap",
    "cos_sin_q30",
    "create_zone",
    "degrees_to_mdeg",
    "displacement_mm",
    "load_scene",
    "meters_to_mm",
    "mm_to_meters",
    "normalize_mdeg",
    "place_zone",
    "project_object",
    "ray_aabb_entry",
    "ray_oriented_box_entry",
    "rays_hit_character_first",
    "refresh_perception",
    "save_scene",
    "scene_from_obj",
    "scene_to_obj",
    "select_zone",
    "touches_object",
    "touches_zone",
]
