"""Canonical JSON form of a program: the storage and wire format.

encode_json/decode_json are lossless inverses; decode validates against the
closed schema and reports failures with a JSON-pointer path.
"""
from __future__ import annotations

import json
from typing import Any

from .ast import (
    BLOCK_KINDS,
    CONDITION_KINDS,
    MAX_DEGREES,
    MAX_NESTING_DEPTH,
    MAX_REPEAT,
    MAX_STEPS,
    Block,
    BlockProgram,
    Condition,
    Script,
    is_identifier,
)
from .errors import SchemaError

SCHEMA_VERSION = 1

_PARAM_FIELDS = {
    "forward": ("steps",),
    "turn": ("degrees",),
    "start_trail": (),
    "stop_trail": (),
    "start_wear": ("accessory",),
    "stop_wear": ("accessory",),
    "start_animation": ("clip",),
    "repeat": ("count",),
    "forever": (),
    "if_cond": ("condition",),
}

_INT_RANGES = {
    "steps": (0, MAX_STEPS),
    "degrees": (-MAX_DEGREES, MAX_DEGREES),
    "count": (0, MAX_REPEAT),
}


def block_to_obj(block: Block) -> dict[str, Any]:
    obj: dict[str, Any] = {"kind": block.kind}
    for name in _PARAM_FIELDS[block.kind]:
        if name == "condition":
            cond = block.condition
            obj["condition"] = {"kind": cond.kind, "target": cond.target}
        else:
            obj[name] = getattr(block, name)
    if block.is_container:
        obj["children"] = [block_to_obj(c) for c in block.children]
    return obj


def program_to_obj(program: BlockProgram) -> dict[str, Any]:
    return {
        "version": SCHEMA_VERSION,
        "metadata": dict(sorted(program.metadata.items())),
        "scripts": [
            {"event": s.event, "body": [block_to_obj(b) for b in s.body]} for s in program.scripts
        ],
    }


def encode_json(program: BlockProgram) -> bytes:
    return json.dumps(program_to_obj(program), separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def _require(obj: Any, key: str, ptr: str) -> Any:
    if not isinstance(obj, dict):
        raise SchemaError("expected object", ptr)
    if key not in obj:
        raise SchemaError(f"missing field {key!r}", ptr)
    return obj[key]


def _int_field(obj: dict, key: str, ptr: str) -> int:
    value = _require(obj, key, ptr)
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaError(f"{key} must be an integer", f"{ptr}/{key}")
    lo, hi = _INT_RANGES[key]
    if not lo <= value <= hi:
        raise SchemaError(f"{key} {value} out of range [{lo}, {hi}]", f"{ptr}/{key}")
    return value


def _name_field(obj: dict, key: str, ptr: str) -> str:
    value = _require(obj, key, ptr)
    if not isinstance(value, str) or not is_identifier(value):
        raise SchemaError(f"{key} must be a valid identifier", f"{ptr}/{key}")
    return value


def block_from_obj(obj: Any, ptr: str, depth: int = 1) -> Block:
    if depth > MAX_NESTING_DEPTH:
        raise SchemaError(f"blocks nested deeper than {MAX_NESTING_DEPTH}", ptr)
    kind = _require(obj, "kind", ptr)
    if kind not in BLOCK_KINDS:
        raise SchemaError(f"unknown block kind {kind!r}", f"{ptr}/kind")
    block = Block(kind)
    if kind == "forward":
        block.steps = _int_field(obj, "steps", ptr)
    elif kind == "turn":
        block.degrees = _int_field(obj, "degrees", ptr)
    elif kind in ("start_wear", "stop_wear"):
        block.accessory = _name_field(obj, "accessory", ptr)
    elif kind == "start_animation":
        block.clip = _name_field(obj, "clip", ptr)
    elif kind == "repeat":
        block.count = _int_field(obj, "count", ptr)
    elif kind == "if_cond":
        cond_obj = _require(obj, "condition", ptr)
        cond_kind = _require(cond_obj, "kind", f"{ptr}/condition")
        if cond_kind not in CONDITION_KINDS:
            raise SchemaError(f"unknown condition kind {cond_kind!r}", f"{ptr}/condition/kind")
        target = _name_field(cond_obj, "target", f"{ptr}/condition")
        block.condition = Condition(kind=cond_kind, target=target)
    if kind in ("repeat", "forever", "if_cond"):
        children = _require(obj, "children", ptr)
        if not isinstance(children, list):
            raise SchemaError("children must be an array", f"{ptr}/children")
        block.children = [
            block_from_obj(c, f"{ptr}/children/{i}", depth + 1) for i, c in enumerate(children)
        ]
    return block


def program_from_obj(obj: Any) -> BlockProgram:
    if not isinstance(obj, dict):
        raise SchemaError("expected top-level object", "")
    version = obj.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported version {version!r}", "/version")
    metadata = obj.get("metadata", {})
    if not isinstance(metadata, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()
    ):
        raise SchemaError("metadata must map strings to strings", "/metadata")
    scripts_obj = _require(obj, "scripts", "")
    if not isinstance(scripts_obj, list):
        raise SchemaError("scripts must be an array", "/scripts")
    scripts = []
    for i, script_obj in enumerate(scripts_obj):
        ptr = f"/scripts/{i}"
        event = _require(script_obj, "event", ptr)
        if event != "when_touched":
            raise SchemaError(f"unknown event {event!r}", f"{ptr}/event")
        body_obj = _require(script_obj, "body", ptr)
        if not isinstance(body_obj, list):
            raise SchemaError("body must be an array", f"{ptr}/body")
        body = [block_from_obj(b, f"{ptr}/body/{j}") for j, b in enumerate(body_obj)]
        scripts.append(Script(event=event, body=body))
    return BlockProgram(scripts=scripts, metadata=dict(metadata))


def decode_json(data: bytes | str) -> BlockProgram:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", "") from exc
    return program_from_obj(obj)
