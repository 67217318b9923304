"""Static validation of a program against a scene and asset library.

A program that validates ok references only zones present in the scene,
object classes from the fixed catalog, and accessories/clips present in
the library.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from ..objects import OBJECT_CLASS_SET
from .ast import Block, BlockProgram, Span, ZONE_LABEL_RE

E_UNKNOWN_OBJECT = "E_UNKNOWN_OBJECT"
E_ZONE_LABEL = "E_ZONE_LABEL"
E_UNKNOWN_ZONE = "E_UNKNOWN_ZONE"
E_UNKNOWN_ACCESSORY = "E_UNKNOWN_ACCESSORY"
E_UNKNOWN_CLIP = "E_UNKNOWN_CLIP"
W_UNREACHABLE = "W_UNREACHABLE"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    span: Span
    code: str
    message: str


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)

    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    def to_obj(self) -> dict:
        return {
            "ok": self.ok,
            "diagnostics": [
                {
                    "severity": d.severity,
                    "line": d.span.line,
                    "col": d.span.col,
                    "code": d.code,
                    "message": d.message,
                }
                for d in self.diagnostics
            ],
        }


def _zone_labels(scene) -> set[str]:
    if scene is None:
        return set()
    zones = getattr(scene, "zones", None)
    if zones is None:
        return set()
    return {getattr(z, "label", z) for z in zones}


def _names(library, kind: str) -> set[str]:
    if library is None:
        return set()
    getter = getattr(library, f"{kind}_names", None)
    if callable(getter):
        return set(getter())
    return set(getattr(library, kind, ()))


def validate(program: BlockProgram, scene=None, library=None) -> ValidationReport:
    """Check every asset reference and flag unreachable blocks.

    `scene` needs a `zones` iterable (each with a `label`); `library` needs
    `accessory_names()` / `clip_names()` or plain `accessories` / `clips`
    sets. scene=None means no zones exist; library=None skips the
    accessory/clip checks entirely (no library attached to the run).
    """
    report = ValidationReport()
    zone_labels = _zone_labels(scene)
    check_assets = library is not None
    accessories = _names(library, "accessories") | _names(library, "accessory")
    clips = _names(library, "clips") | _names(library, "clip")

    def err(span: Span, code: str, message: str) -> None:
        report.diagnostics.append(Diagnostic("error", span, code, message))

    def warn(span: Span, code: str, message: str) -> None:
        report.diagnostics.append(Diagnostic("warning", span, code, message))

    def check_sequence(blocks: Iterable[Block]) -> None:
        after_forever = False
        for block in blocks:
            if after_forever:
                warn(block.span, W_UNREACHABLE, f"{block.kind} is unreachable after forever")
            check_block(block)
            if block.kind == "forever":
                after_forever = True

    def check_block(block: Block) -> None:
        if (
            check_assets
            and block.kind in ("start_wear", "stop_wear")
            and block.accessory not in accessories
        ):
            err(
                block.span,
                E_UNKNOWN_ACCESSORY,
                f"accessory {block.accessory!r} is not in the library",
            )
        if check_assets and block.kind == "start_animation" and block.clip not in clips:
            err(block.span, E_UNKNOWN_CLIP, f"animation clip {block.clip!r} is not in the library")
        cond = block.condition
        if cond is not None:
            if cond.kind == "touches_object" and cond.target not in OBJECT_CLASS_SET:
                err(
                    cond.span,
                    E_UNKNOWN_OBJECT,
                    f"object class {cond.target!r} is not in the detectable catalog",
                )
            elif cond.kind == "touches_zone":
                if not ZONE_LABEL_RE.match(cond.target):
                    err(
                        cond.span,
                        E_ZONE_LABEL,
                        f"zone label {cond.target!r} must be a single letter A-Z",
                    )
                elif cond.target not in zone_labels:
                    err(cond.span, E_UNKNOWN_ZONE, f"zone {cond.target!r} is not in the scene")
        check_sequence(block.children)

    for script in program.scripts:
        check_sequence(script.body)
    return report
