"""Tick-based virtual machine for block programs.

One step() is one tick. Within a tick each armed script runs instantaneous
blocks until it reaches a motion block (which consumes one per-tick motion
quantum), a loop boundary re-check, or the end of the script. Perception
refreshes only on ticks divisible by the perception period; conditions read
the value frozen at the last refresh. Identical inputs produce
byte-identical trace streams.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..blocklang import Block, BlockProgram, validate
from ..blocklang.jsoncodec import program_from_obj, program_to_obj
from ..scene import SceneDescription, SceneState, refresh_perception, scene_from_obj, scene_to_obj
from ..scene.geometry import displacement_mm, normalize_mdeg

TOUCH = "touch_character"
TAP = "tap_character"
DETECTION_UPDATE = "detection_script_update"
EVENT_KINDS = (TOUCH, TAP, DETECTION_UPDATE)

IDLE = "idle"
RUNNING = "running"
STOPPED = "stopped"
FINISHED = "finished"


class ValidationFailed(ValueError):
    def __init__(self, report):
        super().__init__("program failed validation: " + "; ".join(
            d.message for d in report.errors()
        ))
        self.report = report


@dataclass(frozen=True)
class SessionConfig:
    tick_hz: int = 20
    move_rate: int = 2  # steps per tick
    turn_rate: int = 6  # degrees per tick
    step_length_mm: int = 10
    perception_period: int = 10  # ticks between detector refreshes
    confidence_threshold: float = 0.6
    max_ticks: int = 2000

    def __post_init__(self) -> None:
        for name in ("tick_hz", "move_rate", "turn_rate", "step_length_mm",
                     "perception_period", "max_ticks"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold must be in (0, 1]")

    def to_obj(self) -> dict:
        return {
            "tick_hz": self.tick_hz,
            "move_rate": self.move_rate,
            "turn_rate": self.turn_rate,
            "step_length_mm": self.step_length_mm,
            "perception_period": self.perception_period,
            "confidence_threshold": self.confidence_threshold,
            "max_ticks": self.max_ticks,
        }

    @staticmethod
    def from_obj(obj: dict) -> "SessionConfig":
        return SessionConfig(**obj)


@dataclass
class MotionState:
    kind: str  # forward | turn
    total: int  # steps or absolute degrees
    sign: int  # +1 / -1, turn direction
    consumed: int
    origin: tuple[int, int, int]  # character position at block start
    origin_yaw: int  # yaw (mdeg) at block start

    def to_obj(self) -> dict:
        return {
            "kind": self.kind,
            "total": self.total,
            "sign": self.sign,
            "consumed": self.consumed,
            "origin": list(self.origin),
            "origin_yaw": self.origin_yaw,
        }

    @staticmethod
    def from_obj(obj: dict) -> "MotionState":
        return MotionState(
            kind=obj["kind"],
            total=obj["total"],
            sign=obj["sign"],
            consumed=obj["consumed"],
            origin=tuple(obj["origin"]),
            origin_yaw=obj["origin_yaw"],
        )


@dataclass
class FrameLevel:
    """One nesting level: a block sequence plus the cursor into it.

    `path` addresses the owning container from the script body (empty for
    the body itself) so levels can be serialized and re-bound to the AST.
    """

    path: tuple[int, ...]
    index: int = 0
    iterations: int = 0  # completed repeat iterations at this level

    def to_obj(self) -> dict:
        return {"path": list(self.path), "index": self.index, "iterations": self.iterations}

    @staticmethod
    def from_obj(obj: dict) -> "FrameLevel":
        return FrameLevel(tuple(obj["path"]), obj["index"], obj["iterations"])


@dataclass
class ScriptFrame:
    script_index: int
    stack: list[FrameLevel] = field(default_factory=list)
    motion: MotionState | None = None
    finished: bool = False

    def to_obj(self) -> dict:
        return {
            "script_index": self.script_index,
            "stack": [level.to_obj() for level in self.stack],
            "motion": self.motion.to_obj() if self.motion else None,
            "finished": self.finished,
        }

    @staticmethod
    def from_obj(obj: dict) -> "ScriptFrame":
        return ScriptFrame(
            script_index=obj["script_index"],
            stack=[FrameLevel.from_obj(o) for o in obj["stack"]],
            motion=MotionState.from_obj(obj["motion"]) if obj["motion"] else None,
            finished=obj["finished"],
        )


@dataclass
class TickTrace:
    tick: int
    effects: list[dict]
    scene_hash: str

    def to_obj(self) -> dict:
        return {"tick": self.tick, "effects": self.effects, "scene_hash": self.scene_hash}

    def to_json_line(self) -> str:
        return json.dumps(self.to_obj(), separators=(",", ":"), ensure_ascii=False)


class Session:
    """Single-threaded stepper binding a program to a scene."""

    def __init__(
        self,
        program: BlockProgram,
        description: SceneDescription,
        config: SessionConfig | None = None,
        library=None,
        skip_validation: bool = False,
    ):
        self.config = config or SessionConfig()
        if not skip_validation:
            report = validate(program, description, library)
            if not report.ok:
                raise ValidationFailed(report)
        self.program = program
        self.scene = SceneState.from_description(description)
        self.status = IDLE
        self.tick = 0
        self.frames: list[ScriptFrame] = []
        self.pending_events: list[str] = []
        self.event_log: list[dict] = []
        self._force_refresh = False
        targets = program.condition_targets()
        self.requested_objects = [t for k, t in targets if k == "touches_object"]
        self.requested_zones = [t for k, t in targets if k == "touches_zone"]
        self._refresh(tick=0)

    # -- event handling --------------------------------------------------------

    def inject_event(self, event: str) -> None:
        if event not in EVENT_KINDS:
            raise ValueError(f"unknown event {event!r}")
        if event == TOUCH and self.status in (IDLE, FINISHED, STOPPED):
            # touch arms immediately at the tick boundary
            self._arm()
            self.event_log.append({"tick": self.tick, "event": event, "applied": True})
            return
        self.pending_events.append(event)

    def _arm(self) -> None:
        self.status = RUNNING
        self.frames = [
            ScriptFrame(script_index=i, stack=[FrameLevel(path=())])
            for i in range(len(self.program.scripts))
        ]

    def _drain_events(self, effects: list[dict]) -> None:
        force_refresh = False
        for event in self.pending_events:
            applied = False
            if event == TAP and self.status == RUNNING:
                self.status = STOPPED
                applied = True
            elif event == TOUCH and self.status in (IDLE, FINISHED, STOPPED):
                self._arm()
                applied = True
            elif event == DETECTION_UPDATE:
                force_refresh = True
                applied = True
            effects.append({"kind": "event", "event": event, "applied": applied})
            self.event_log.append({"tick": self.tick, "event": event, "applied": applied})
        self.pending_events.clear()
        self._force_refresh = force_refresh

    # -- perception --------------------------------------------------------------

    def _refresh(self, tick: int) -> None:
        refresh_perception(
            self.scene,
            self.requested_objects,
            self.requested_zones,
            tick,
            self.config.confidence_threshold,
        )

    def _refresh_effects(self) -> list[dict]:
        effects = []
        for name in self.requested_objects:
            effects.append(
                {
                    "kind": "detection_update",
                    "target": name,
                    "target_kind": "object",
                    "status": self.scene.perception.object_status(name),
                }
            )
        for label in self.requested_zones:
            touched = self.scene.perception.zone_touched(label)
            effects.append(
                {
                    "kind": "detection_update",
                    "target": label,
                    "target_kind": "zone",
                    "status": "touched" if touched else "placed",
                }
            )
        return effects

    # -- stepping -----------------------------------------------------------------

    def step(self) -> TickTrace:
        if self.status != RUNNING and not self.pending_events:
            raise RuntimeError(f"cannot step a session in status {self.status!r}")
        effects: list[dict] = []
        self._drain_events(effects)
        self.tick += 1
        self.scene.tick = self.tick
        if self.status == RUNNING:
            if self.tick % self.config.perception_period == 0 or self._force_refresh:
                self._refresh(self.tick)
                effects.extend(self._refresh_effects())
            for frame in self.frames:
                self._tick_frame(frame, effects)
            if all(frame.finished for frame in self.frames):
                self.status = FINISHED
        return TickTrace(self.tick, effects, self.scene.scene_hash())

    # -- frame machinery -------------------------------------------------------------

    def _blocks_at(self, script_index: int, path: tuple[int, ...]) -> list[Block]:
        blocks = self.program.scripts[script_index].body
        for index in path:
            blocks = blocks[index].children
        return blocks

    def _container_at(self, script_index: int, path: tuple[int, ...]) -> Block:
        blocks = self.program.scripts[script_index].body
        for index in path[:-1]:
            blocks = blocks[index].children
        return blocks[path[-1]]

    def _tick_frame(self, frame: ScriptFrame, effects: list[dict]) -> None:
        if frame.finished:
            return
        if frame.motion is not None:
            self._advance_motion(frame, effects)
            return
        while True:
            level = frame.stack[-1]
            blocks = self._blocks_at(frame.script_index, level.path)
            if level.index >= len(blocks):
                if len(frame.stack) == 1:
                    frame.finished = True
                    return
                owner = self._container_at(frame.script_index, level.path)
                if owner.kind == "forever":
                    level.index = 0
                    return  # loop boundary re-check ends the tick
                if owner.kind == "repeat":
                    level.iterations += 1
                    if level.iterations < (owner.count or 0):
                        level.index = 0
                    else:
                        frame.stack.pop()
                        frame.stack[-1].index += 1
                    return  # loop boundary re-check ends the tick
                # if_cond body exits instantaneously
                frame.stack.pop()
                frame.stack[-1].index += 1
                continue
            block = blocks[level.index]
            kind = block.kind
            if kind in ("forward", "turn"):
                self._start_motion(frame, block)
                self._advance_motion(frame, effects)
                return
            if kind == "start_trail":
                self.scene.set_trail(True)
                effects.append({"kind": "trail_started", "script": frame.script_index})
                level.index += 1
                continue
            if kind == "stop_trail":
                self.scene.set_trail(False)
                effects.append({"kind": "trail_stopped", "script": frame.script_index})
                level.index += 1
                continue
            if kind == "start_wear":
                changed = self.scene.set_wear(block.accessory, True)
                effects.append(
                    {
                        "kind": "wear",
                        "script": frame.script_index,
                        "accessory": block.accessory,
                        "changed": changed,
                    }
                )
                level.index += 1
                continue
            if kind == "stop_wear":
                changed = self.scene.set_wear(block.accessory, False)
                effects.append(
                    {
                        "kind": "unwear",
                        "script": frame.script_index,
                        "accessory": block.accessory,
                        "changed": changed,
                    }
                )
                level.index += 1
                continue
            if kind == "start_animation":
                self.scene.active_animation = block.clip
                effects.append(
                    {"kind": "animation_started", "script": frame.script_index, "clip": block.clip}
                )
                level.index += 1
                continue
            if kind == "repeat":
                if (block.count or 0) <= 0:
                    level.index += 1
                    continue
                frame.stack.append(FrameLevel(path=level.path + (level.index,)))
                continue
            if kind == "forever":
                frame.stack.append(FrameLevel(path=level.path + (level.index,)))
                continue
            if kind == "if_cond":
                value = self._evaluate(block, frame, effects)
                if value:
                    frame.stack.append(FrameLevel(path=level.path + (level.index,)))
                else:
                    level.index += 1
                continue
            raise AssertionError(f"unhandled block kind {kind}")

    def _evaluate(self, block: Block, frame: ScriptFrame, effects: list[dict]) -> bool:
        cond = block.condition
        if cond.kind == "touches_object":
            value = self.scene.perception.object_touched(cond.target)
        else:
            value = self.scene.perception.zone_touched(cond.target)
        effects.append(
            {
                "kind": "condition_evaluated",
                "script": frame.script_index,
                "condition": cond.kind,
                "target": cond.target,
                "value": value,
            }
        )
        return value

    def _start_motion(self, frame: ScriptFrame, block: Block) -> None:
        if block.kind == "forward":
            frame.motion = MotionState(
                kind="forward",
                total=block.steps or 0,
                sign=1,
                consumed=0,
                origin=self.scene.character.position,
                origin_yaw=self.scene.character.yaw_mdeg,
            )
        else:
            degrees = block.degrees or 0
            frame.motion = MotionState(
                kind="turn",
                total=abs(degrees),
                sign=1 if degrees >= 0 else -1,
                consumed=0,
                origin=self.scene.character.position,
                origin_yaw=self.scene.character.yaw_mdeg,
            )

    def _advance_motion(self, frame: ScriptFrame, effects: list[dict]) -> None:
        motion = frame.motion
        rate = self.config.move_rate if motion.kind == "forward" else self.config.turn_rate
        quantum = min(rate, motion.total - motion.consumed)
        motion.consumed += quantum
        if motion.kind == "forward":
            distance = motion.consumed * self.config.step_length_mm
            dx, dz = displacement_mm(distance, motion.origin_yaw)
            target = (motion.origin[0] + dx, motion.origin[1], motion.origin[2] + dz)
            moved = self.scene.move_character_to(target)
            effects.append(
                {
                    "kind": "moved",
                    "script": frame.script_index,
                    "steps": quantum,
                    "position": list(target),
                }
            )
            if moved and self.scene.trail_active:
                effects.append(
                    {
                        "kind": "trail_point",
                        "script": frame.script_index,
                        "position": list(target),
                    }
                )
        else:
            yaw = normalize_mdeg(motion.origin_yaw + motion.sign * motion.consumed * 1000)
            self.scene.character.yaw_mdeg = yaw
            effects.append(
                {
                    "kind": "turned",
                    "script": frame.script_index,
                    "degrees": motion.sign * quantum,
                    "yaw_mdeg": yaw,
                }
            )
        if motion.consumed >= motion.total:
            frame.motion = None
            frame.stack[-1].index += 1
            self._unwind_if_ended(frame)

    def _unwind_if_ended(self, frame: ScriptFrame) -> None:
        """Finish the frame when a completed motion was the script's last block.

        Only if-bodies unwind here; loop boundaries keep their next-tick
        re-check.
        """
        while True:
            level = frame.stack[-1]
            blocks = self._blocks_at(frame.script_index, level.path)
            if level.index < len(blocks):
                return
            if len(frame.stack) == 1:
                frame.finished = True
                return
            owner = self._container_at(frame.script_index, level.path)
            if owner.kind != "if_cond":
                return
            frame.stack.pop()
            frame.stack[-1].index += 1

    # -- snapshots ----------------------------------------------------------------------

    def snapshot(self) -> dict:
        return {
            "version": 1,
            "program": program_to_obj(self.program),
            "scene_description": scene_to_obj(self.scene.description),
            "config": self.config.to_obj(),
            "status": self.status,
            "tick": self.tick,
            "scene": self.scene.snapshot_obj(),
            "frames": [frame.to_obj() for frame in self.frames],
            "pending_events": list(self.pending_events),
            "event_log": list(self.event_log),
        }

    @staticmethod
    def restore(snapshot: dict) -> "Session":
        program = program_from_obj(snapshot["program"])
        description = scene_from_obj(snapshot["scene_description"])
        session = Session(
            program,
            description,
            SessionConfig.from_obj(snapshot["config"]),
            skip_validation=True,
        )
        session.status = snapshot["status"]
        session.tick = snapshot["tick"]
        session.scene = SceneState.restore(description, snapshot["scene"])
        session.frames = [ScriptFrame.from_obj(o) for o in snapshot["frames"]]
        session.pending_events = list(snapshot["pending_events"])
        session.event_log = list(snapshot["event_log"])
        return session


def create_session(
    program: BlockProgram,
    description: SceneDescription,
    config: SessionConfig | None = None,
    library=None,
) -> Session:
    return Session(program, description, config, library)


@dataclass
class ScheduledEvent:
    tick: int
    event: str


def run(
    session: Session,
    max_ticks: int | None = None,
    auto_touch: bool = False,
    events: list[ScheduledEvent] | None = None,
) -> list[TickTrace]:
    """Step until every script finishes, a stop event lands, or the tick cap.

    Scheduled events fire at the boundary after the named tick. Programs
    still running at the cap are stopped.
    """
    limit = max_ticks if max_ticks is not None else session.config.max_ticks
    schedule = sorted(events or [], key=lambda e: (e.tick, e.event))
    if auto_touch:
        schedule.insert(0, ScheduledEvent(tick=session.tick, event=TOUCH))
    traces: list[TickTrace] = []
    pending = list(schedule)
    while True:
        while pending and pending[0].tick <= session.tick:
            session.inject_event(pending.pop(0).event)
        if session.status != RUNNING and not session.pending_events:
            if pending:
                # idle/finished sessions cannot advance ticks; deliver now
                session.inject_event(pending.pop(0).event)
                continue
            break
        if session.tick >= limit:
            if session.status == RUNNING:
                session.status = STOPPED
            break
        traces.append(session.step())
    return traces


def write_trace(traces: list[TickTrace], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for trace in traces:
            fh.write(trace.to_json_line())
            fh.write("\n")
