"""Persisted catalog of characters, accessories, and animation clips.

Assets live under `<root>/assets/<kind>/<id>/` with the payload file plus
a meta.json; the catalog indexes them by id and display name. Seeding
installs the default capybara character, a starter accessory set, and two
starter clips so the bundled example programs validate out of the box.
"""
from __future__ import annotations

import json
import math
import shutil
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from ..animation import JointTransform, quat, record, scripted_pose_source
from ..procgen import capybara_mesh, prop_mesh
from ..rigging.mesh import obj_bytes
from ..rigging.skeleton import TRACKING_SKELETON_ID
from .generation import utc_timestamp

ASSET_KINDS = ("character", "accessory", "clip")


class AssetNotFound(KeyError):
    pass


@dataclass
class AssetRecord:
    id: str
    kind: str
    display_name: str
    origin_prompt: str
    file_path: str  # relative to the library root
    created_at: str

    def to_obj(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "display_name": self.display_name,
            "origin_prompt": self.origin_prompt,
            "file_path": self.file_path,
            "created_at": self.created_at,
        }

    @staticmethod
    def from_obj(obj: dict) -> "AssetRecord":
        return AssetRecord(**obj)


class AssetLibrary:
    def __init__(self, root: str | Path, clock: Callable[[], float] = time.time):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.clock = clock
        self._catalog_path = self.root / "catalog.json"
        self._records: dict[str, AssetRecord] = {}
        self._counter = 0
        self._load()

    def _load(self) -> None:
        if not self._catalog_path.exists():
            return
        doc = json.loads(self._catalog_path.read_text(encoding="utf-8"))
        self._counter = doc.get("counter", 0)
        for obj in doc.get("records", []):
            record_obj = AssetRecord.from_obj(obj)
            self._records[record_obj.id] = record_obj

    def _save(self) -> None:
        doc = {
            "counter": self._counter,
            "records": [r.to_obj() for r in self._records.values()],
        }
        self._catalog_path.write_text(
            json.dumps(doc, indent=2) + "\n", encoding="utf-8"
        )

    def add(
        self,
        kind: str,
        display_name: str,
        payload: bytes,
        extension: str,
        origin_prompt: str = "",
    ) -> AssetRecord:
        if kind not in ASSET_KINDS:
            raise ValueError(f"unknown asset kind {kind!r}")
        self._counter += 1
        asset_id = f"{kind}-{self._counter:04d}"
        asset_dir = self.root / "assets" / kind / asset_id
        asset_dir.mkdir(parents=True, exist_ok=True)
        file_name = f"{'mesh' if kind != 'clip' else 'clip'}{extension}"
        file_path = asset_dir / file_name
        file_path.write_bytes(payload)
        meta = {
            "id": asset_id,
            "kind": kind,
            "display_name": display_name,
            "origin_prompt": origin_prompt,
        }
        (asset_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        record_obj = AssetRecord(
            id=asset_id,
            kind=kind,
            display_name=display_name,
            origin_prompt=origin_prompt,
            file_path=str(file_path.relative_to(self.root)),
            created_at=utc_timestamp(self.clock),
        )
        self._records[asset_id] = record_obj
        self._save()
        return record_obj

    def list(self, kind: str | None = None) -> list[AssetRecord]:
        records = list(self._records.values())
        if kind is not None:
            records = [r for r in records if r.kind == kind]
        return sorted(records, key=lambda r: r.id)

    def get(self, asset_id: str) -> AssetRecord:
        if asset_id not in self._records:
            raise AssetNotFound(asset_id)
        return self._records[asset_id]

    def by_display_name(self, kind: str, display_name: str) -> AssetRecord:
        for record_obj in self.list(kind):
            if record_obj.display_name == display_name:
                return record_obj
        raise AssetNotFound(f"{kind} named {display_name!r}")

    def delete(self, asset_id: str) -> None:
        record_obj = self.get(asset_id)
        asset_dir = (self.root / record_obj.file_path).parent
        if asset_dir.is_dir():
            shutil.rmtree(asset_dir)
        del self._records[asset_id]
        self._save()

    def path_of(self, asset_id: str) -> Path:
        return self.root / self.get(asset_id).file_path

    # names used by program validation
    def accessory_names(self) -> set[str]:
        return {r.display_name for r in self.list("accessory")}

    def clip_names(self) -> set[str]:
        return {r.display_name for r in self.list("clip")}

    def character_names(self) -> set[str]:
        return {r.display_name for r in self.list("character")}

    # --- seeding ---------------------------------------------------------------

    STARTER_ACCESSORIES = ("cowboy hat", "apple", "banana", "cherry", "wizard hat")
    STARTER_CLIPS = ("wave", "greet")

    def seed_defaults(self) -> list[AssetRecord]:
        """Install the default capybara, starter accessories, and clips."""
        created = []
        if "capybara" not in self.character_names():
            created.append(
                self.add("character", "capybara", obj_bytes(capybara_mesh()), ".obj")
            )
        for i, name in enumerate(self.STARTER_ACCESSORIES):
            if name not in self.accessory_names():
                created.append(
                    self.add("accessory", name, obj_bytes(prop_mesh(i)), ".obj")
                )
        for name in self.STARTER_CLIPS:
            if name not in self.clip_names():
                created.append(self.add("clip", name, _starter_clip_bytes(name), ".json"))
        return created


def _starter_clip_bytes(name: str) -> bytes:
    from ..animation.clip import clip_json_bytes

    if name == "wave":
        def pose(t: float) -> dict[str, JointTransform]:
            angle = math.sin(2 * math.pi * t) * math.radians(40)
            return {
                "shoulder.L": JointTransform(rotation=quat.from_axis_angle((0, 0, 1), angle)),
                "elbow.L": JointTransform(
                    rotation=quat.from_axis_angle((0, 0, 1), angle / 2)
                ),
            }

        duration = 2.0
    else:  # greet: a small bow with one arm raised
        def pose(t: float) -> dict[str, JointTransform]:
            bow = math.sin(math.pi * min(t, 1.0)) * math.radians(25)
            lift = math.sin(math.pi * min(t, 1.0)) * math.radians(70)
            return {
                "spine.1": JointTransform(rotation=quat.from_axis_angle((1, 0, 0), bow)),
                "shoulder.R": JointTransform(
                    rotation=quat.from_axis_angle((0, 0, 1), -lift)
                ),
            }

        duration = 1.5
    clip = record(
        scripted_pose_source(pose, duration),
        name=name,
        skeleton_id=TRACKING_SKELETON_ID,
        sample_hz=20,
    )
    return clip_json_bytes(clip) + b"\n"
