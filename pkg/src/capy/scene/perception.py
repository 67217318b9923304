"""Simulated object detection and the two touch predicates.

The detector stand-in projects each object's 3D box through a pinhole
camera into a 2D bounding box and gates it on a per-object confidence
profile. Object touches are decided by casting rays from a 5x5 grid of
points inside the detection's 2D box and checking whether the character's
AABB is hit before the object; zone touches are closed-interval overlap of
the character's AABB with the zone's extruded box.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import boxes_overlap, mm_to_meters, ray_aabb_entry, ray_oriented_box_entry
from .model import (
    CameraSpec,
    Detection,
    PerceptionState,
    PhysicalObject,
    SceneState,
)

SAMPLE_GRID = 5
NEAR_PLANE_M = 1e-4


@dataclass(frozen=True)
class CameraBasis:
    origin: tuple[float, float, float]  # meters
    right: tuple[float, float, float]
    up: tuple[float, float, float]
    forward: tuple[float, float, float]
    focal_px: float
    width: int
    height: int


def _norm(v):
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if n == 0.0:
        raise ValueError("zero-length vector")
    return (v[0] / n, v[1] / n, v[2] / n)


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def camera_basis(camera: CameraSpec) -> CameraBasis:
    origin = tuple(mm_to_meters(v) for v in camera.position)
    target = tuple(mm_to_meters(v) for v in camera.look_at)
    fwd = _norm(_sub(target, origin))
    up_hint = camera.up
    if abs(_dot(fwd, _norm(up_hint))) > 0.999:
        up_hint = (1.0, 0.0, 0.0)  # looking straight along up: pick another hint
    right = _norm(_cross(fwd, up_hint))
    up = _cross(right, fwd)
    focal = (camera.resolution[1] / 2.0) / math.tan(math.radians(camera.fov_deg) / 2.0)
    return CameraBasis(
        origin=origin,
        right=right,
        up=up,
        forward=fwd,
        focal_px=focal,
        width=camera.resolution[0],
        height=camera.resolution[1],
    )


def _project_point(basis: CameraBasis, point_m) -> tuple[float, float, float]:
    """Returns (px, py, depth); depth <= 0 means at/behind the camera."""
    rel = _sub(point_m, basis.origin)
    depth = _dot(rel, basis.forward)
    if depth <= 0.0:
        return (0.0, 0.0, depth)
    px = basis.width / 2.0 + basis.focal_px * _dot(rel, basis.right) / depth
    py = basis.height / 2.0 - basis.focal_px * _dot(rel, basis.up) / depth
    return (px, py, depth)


_BOX_EDGES = (
    (0, 1), (0, 2), (0, 4), (1, 3), (1, 5), (2, 3),
    (2, 6), (3, 7), (4, 5), (4, 6), (5, 7), (6, 7),
)


def _object_corners_m(obj: PhysicalObject) -> list[tuple[float, float, float]]:
    cx, cy, cz = (mm_to_meters(v) for v in obj.position)
    hx, hy, hz = (mm_to_meters(v) for v in obj.half_extents)
    yaw = math.radians(obj.yaw_mdeg / 1000.0)
    c, s = math.cos(yaw), math.sin(yaw)
    corners = []
    for ix in (0, 1):
        for iy in (0, 1):
            for iz in (0, 1):
                lx = -hx if ix == 0 else hx
                ly = -hy if iy == 0 else hy
                lz = -hz if iz == 0 else hz
                # engine yaw: +X maps to (cos, 0, sin)
                wx = cx + c * lx - s * lz
                wz = cz + s * lx + c * lz
                corners.append((wx, cy + ly, wz))
    return corners


def project_object(
    camera: CameraSpec, obj: PhysicalObject, tick: int = 0
) -> tuple[tuple[float, float, float, float], float] | None:
    """2D pixel bbox of the object's box, clipped to the image, plus confidence.

    Returns None when the object is entirely behind the camera or out of
    frame.
    """
    basis = camera_basis(camera)
    corners = _object_corners_m(obj)
    depths = [_dot(_sub(c, basis.origin), basis.forward) for c in corners]
    points: list[tuple[float, float]] = []
    for corner, depth in zip(corners, depths):
        if depth > NEAR_PLANE_M:
            px, py, _ = _project_point(basis, corner)
            points.append((px, py))
    for a, b in _BOX_EDGES:
        da, db = depths[a], depths[b]
        if (da > NEAR_PLANE_M) != (db > NEAR_PLANE_M):
            t = (NEAR_PLANE_M - da) / (db - da)
            mid = (
                corners[a][0] + t * (corners[b][0] - corners[a][0]),
                corners[a][1] + t * (corners[b][1] - corners[a][1]),
                corners[a][2] + t * (corners[b][2] - corners[a][2]),
            )
            # nudge to stay in front of the near plane
            px, py, depth = _project_point(basis, mid)
            if depth > 0.0:
                points.append((px, py))
    if not points:
        return None
    x0 = max(0.0, min(p[0] for p in points))
    y0 = max(0.0, min(p[1] for p in points))
    x1 = min(float(basis.width), max(p[0] for p in points))
    y1 = min(float(basis.height), max(p[1] for p in points))
    if x0 >= x1 or y0 >= y1:
        return None
    return (x0, y0, x1, y1), obj.confidence.at(tick)


def _pixel_ray(basis: CameraBasis, px: float, py: float) -> tuple[float, float, float]:
    f, r, u = basis.forward, basis.right, basis.up
    sx = (px - basis.width / 2.0) / basis.focal_px
    sy = (basis.height / 2.0 - py) / basis.focal_px
    return (
        f[0] + sx * r[0] + sy * u[0],
        f[1] + sx * r[1] + sy * u[1],
        f[2] + sx * r[2] + sy * u[2],
    )


def _box_m(box_mm) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    lo, hi = box_mm
    return (
        tuple(mm_to_meters(v) for v in lo),
        tuple(mm_to_meters(v) for v in hi),
    )


def rays_hit_character_first(
    camera: CameraSpec,
    bbox: tuple[float, float, float, float],
    character_box_mm,
    obj: PhysicalObject,
    fractions: list[float] | None = None,
) -> bool:
    """True when any sample ray through the bbox hits the character before the object.

    `fractions` are bbox-relative sample coordinates in [0, 1]; the default
    is the 5x5 cell-center grid.
    """
    basis = camera_basis(camera)
    char_lo, char_hi = _box_m(character_box_mm)
    obj_center = tuple(mm_to_meters(v) for v in obj.position)
    obj_half = tuple(mm_to_meters(v) for v in obj.half_extents)
    obj_yaw = math.radians(obj.yaw_mdeg / 1000.0)
    x0, y0, x1, y1 = bbox
    if fractions is None:
        fractions = [(i + 0.5) / SAMPLE_GRID for i in range(SAMPLE_GRID)]
    for fx in fractions:
        px = x0 + fx * (x1 - x0)
        for fy in fractions:
            py = y0 + fy * (y1 - y0)
            direction = _pixel_ray(basis, px, py)
            t_char = ray_aabb_entry(basis.origin, direction, char_lo, char_hi)
            if t_char is None:
                continue
            t_obj = ray_oriented_box_entry(
                basis.origin, direction, obj_center, obj_yaw, obj_half
            )
            if t_obj is None or t_char <= t_obj:
                return True
    return False


def touches_object(state: SceneState, class_name: str) -> bool:
    """Ray-sampled collision between the character and a found detection."""
    det = state.perception.detections.get(class_name)
    if det is None or det.bbox is None or det.status == "searching":
        return False
    camera = state.camera_pose()
    if camera is None:
        return False
    obj = _detected_object(state, class_name)
    if obj is None:
        return False
    hit = rays_hit_character_first(camera, det.bbox, state.character.box(), obj)
    if hit:
        det.status = "touched"
    return hit


def _detected_object(state: SceneState, class_name: str) -> PhysicalObject | None:
    best: PhysicalObject | None = None
    best_conf = -1.0
    for index in range(len(state.description.objects)):
        obj = state.object_pose(index)
        if obj.class_name != class_name:
            continue
        conf = obj.confidence.at(state.tick)
        if conf > best_conf:
            best = obj
            best_conf = conf
    return best


def touches_zone(state: SceneState, label: str) -> bool:
    """Closed-interval AABB overlap with the zone's extruded box."""
    zone = state.description.zone_by_label(label)
    zone_lo, zone_hi = zone.box()
    char_lo, char_hi = state.character.box()
    return boxes_overlap(char_lo, char_hi, zone_lo, zone_hi)


def refresh_perception(
    state: SceneState,
    requested_objects: list[str],
    requested_zones: list[str],
    tick: int,
    confidence_threshold: float,
) -> PerceptionState:
    """Recompute the full perception snapshot at a refresh tick.

    Detections at or above the confidence threshold become found; a found
    detection whose sample rays hit the character first becomes touched.
    Zone overlap booleans are frozen here for condition reads between
    refreshes.
    """
    camera = state.camera_pose()
    perception = PerceptionState(last_refresh_tick=tick)
    for class_name in requested_objects:
        detection = Detection(bbox=None, confidence=0.0, status="searching")
        if camera is not None:
            best: tuple[tuple[float, float, float, float], float] | None = None
            chosen: PhysicalObject | None = None
            for index in range(len(state.description.objects)):
                obj = state.object_pose(index)
                if obj.class_name != class_name:
                    continue
                projected = project_object(camera, obj, tick)
                if projected is None:
                    continue
                if best is None or projected[1] > best[1]:
                    best = projected
                    chosen = obj
            if best is not None and best[1] >= confidence_threshold:
                detection = Detection(bbox=best[0], confidence=best[1], status="found")
                if rays_hit_character_first(camera, best[0], state.character.box(), chosen):
                    detection.status = "touched"
        perception.detections[class_name] = detection
    for label in requested_zones:
        perception.zone_touches[label] = touches_zone(state, label)
    state.perception = perception
    return perception
