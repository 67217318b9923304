"""HTTP/JSON service: programs, scenes, sessions, rig and generation jobs,
and a live tick-trace stream.

Each session is owned by one actor object; request handlers talk to it
under its lock and all mutations land at tick boundaries, so streamed
traces are exactly the traces a headless run would produce. Sessions are
namespaced by an opaque workspace key (X-Workspace header).
"""
from __future__ import annotations

import json
import queue
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, Header, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from ..blocklang import SchemaError, program_from_obj, program_to_obj, validate
from ..gateway import Gateway, JobNotFound, ModerationRequired
from ..interpreter import RUNNING, Session, SessionConfig, ValidationFailed
from ..rigging import PreprocessFailed, load_mesh, rig as rig_mesh
from ..scene import SceneFormatError, scene_from_obj, scene_to_obj

MAX_REALTIME_RATE = 60


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details=None):
        self.status = status
        self.code = code
        self.message = message
        self.details = details or {}


@dataclass
class SessionActor:
    """Owns one interpreter session; every mutation goes through its lock."""

    id: str
    program_id: str
    scene_id: str
    session: Session
    lock: threading.RLock = field(default_factory=threading.RLock)
    history: list[str] = field(default_factory=list)  # JSON line per tick
    subscribers: list[queue.Queue] = field(default_factory=list)
    seen_client_ids: set[str] = field(default_factory=set)
    mode: str = "paused"  # paused | stepping | realtime
    realtime_rate: int = 20
    _runner: threading.Thread | None = None

    def snapshot_state(self) -> dict:
        with self.lock:
            return {
                "id": self.id,
                "program_id": self.program_id,
                "scene_id": self.scene_id,
                "status": self.session.status,
                "tick": self.session.tick,
                "mode": self.mode,
                "realtime_rate": self.realtime_rate,
                "scene": self.session.scene.snapshot_obj(),
                "scene_hash": self.session.scene.scene_hash(),
            }

    def inject(self, event: str, client_id: str | None) -> dict:
        with self.lock:
            if client_id is not None:
                if client_id in self.seen_client_ids:
                    return {"applied": False, "duplicate": True}
                self.seen_client_ids.add(client_id)
            self.session.inject_event(event)
            return {"applied": True, "duplicate": False}

    def step_ticks(self, ticks: int) -> dict:
        with self.lock:
            if self.session.status not in (RUNNING,) and not self.session.pending_events:
                raise ApiError(
                    409,
                    "not_running",
                    f"session is {self.session.status}; inject touch_character first",
                )
            produced = 0
            for _ in range(ticks):
                if self.session.status != RUNNING and not self.session.pending_events:
                    break
                if self.session.tick >= self.session.config.max_ticks:
                    if self.session.status == RUNNING:
                        self.session.status = "stopped"
                    break
                trace = self.session.step()
                self._publish(trace.to_json_line())
                produced += 1
            return {"ticks": produced, "status": self.session.status, "tick": self.session.tick}

    def _publish(self, line: str) -> None:
        self.history.append(line)
        for subscriber in list(self.subscribers):
            subscriber.put(line)

    def set_mode(self, mode: str, rate: int | None) -> dict:
        with self.lock:
            if mode not in ("paused", "stepping", "realtime"):
                raise ApiError(422, "bad_mode", f"unknown mode {mode!r}")
            if mode == "realtime":
                rate = rate or 20
                if not 1 <= rate <= MAX_REALTIME_RATE:
                    raise ApiError(
                        422, "bad_rate", f"realtime rate must be 1..{MAX_REALTIME_RATE}"
                    )
                self.realtime_rate = rate
            self.mode = mode
        if mode == "realtime":
            self._ensure_runner()
        return {"mode": mode, "realtime_rate": self.realtime_rate}

    def _ensure_runner(self) -> None:
        if self._runner is not None and self._runner.is_alive():
            return

        def loop() -> None:
            while True:
                with self.lock:
                    if self.mode != "realtime":
                        return
                    rate = self.realtime_rate
                    can_step = (
                        self.session.status == RUNNING or bool(self.session.pending_events)
                    ) and self.session.tick < self.session.config.max_ticks
                    if can_step:
                        trace = self.session.step()
                        self._publish(trace.to_json_line())
                    else:
                        self.mode = "paused"
                        return
                time.sleep(1.0 / rate)

        self._runner = threading.Thread(target=loop, daemon=True)
        self._runner.start()

    def stream(self, last_event_id: int | None):
        subscriber: queue.Queue = queue.Queue()
        with self.lock:
            start = 0 if last_event_id is None else last_event_id
            backlog = list(self.history[start:])
            self.subscribers.append(subscriber)
        try:
            for line in backlog:
                yield line
            while True:
                with self.lock:
                    idle = self.session.status != RUNNING and not self.session.pending_events
                    drained = subscriber.empty()
                if idle and drained and self.mode != "realtime":
                    return
                try:
                    yield subscriber.get(timeout=0.2)
                except queue.Empty:
                    continue
        finally:
            with self.lock:
                if subscriber in self.subscribers:
                    self.subscribers.remove(subscriber)


@dataclass
class RigJobState:
    id: str
    asset_id: str
    status: str = "pending"  # pending | running | succeeded | failed
    stage: str = ""
    progress: float = 0.0
    error: str | None = None
    report: dict | None = None
    result_path: str | None = None

    def to_obj(self) -> dict:
        return {
            "id": self.id,
            "asset_id": self.asset_id,
            "status": self.status,
            "stage": self.stage,
            "progress": self.progress,
            "error": self.error,
            "report": self.report,
            "result_path": self.result_path,
        }


class Workspace:
    def __init__(self, store_root: Path):
        self.programs: dict[str, dict] = {}
        self.scenes: dict[str, dict] = {}
        self.sessions: dict[str, SessionActor] = {}
        self.rig_jobs: dict[str, RigJobState] = {}
        self.counters = {"program": 0, "scene": 0, "session": 0, "rig": 0}
        self.lock = threading.RLock()
        self.gateway = Gateway(store_root)
        self.gateway.library.seed_defaults()
        self.store_root = store_root

    def next_id(self, kind: str) -> str:
        with self.lock:
            self.counters[kind] += 1
            return f"{kind}-{self.counters[kind]:04d}"


def create_app(store_root: str | Path = ".capy-store") -> FastAPI:
    app = FastAPI(title="capy service", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store_root = Path(store_root)
    workspaces: dict[str, Workspace] = {}
    workspaces_lock = threading.Lock()

    def workspace(key: str = "default") -> Workspace:
        with workspaces_lock:
            if key not in workspaces:
                workspaces[key] = Workspace(store_root / key)
            return workspaces[key]

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "details": exc.details},
        )

    def error(status: int, code: str, message: str, details=None) -> ApiError:
        return ApiError(status, code, message, details)

    # --- programs ------------------------------------------------------------

    @app.post("/programs", status_code=201)
    def create_program(
        body: dict = Body(...), x_workspace: str = Header(default="default")
    ) -> dict:
        ws = workspace(x_workspace)
        try:
            program = program_from_obj(body)
        except SchemaError as exc:
            raise error(422, "schema_error", str(exc), {"pointer": exc.pointer})
        program_id = ws.next_id("program")
        ws.programs[program_id] = program_to_obj(program)
        return {"id": program_id, "program": ws.programs[program_id]}

    @app.get("/programs")
    def list_programs(x_workspace: str = Header(default="default")) -> dict:
        ws = workspace(x_workspace)
        return {"programs": [{"id": pid} for pid in sorted(ws.programs)]}

    @app.get("/programs/{program_id}")
    def get_program(program_id: str, x_workspace: str = Header(default="default")) -> dict:
        ws = workspace(x_workspace)
        if program_id not in ws.programs:
            raise error(404, "not_found", f"program {program_id} not found")
        return {"id": program_id, "program": ws.programs[program_id]}

    @app.put("/programs/{program_id}")
    def put_program(
        program_id: str,
        body: dict = Body(...),
        x_workspace: str = Header(default="default"),
    ) -> dict:
        ws = workspace(x_workspace)
        program_obj = body.get("program", body)
        try:
            program = program_from_obj(program_obj)
        except SchemaError as exc:
            raise error(422, "schema_error", str(exc), {"pointer": exc.pointer})
        scene = None
        scene_id = body.get("scene_id")
        if scene_id is not None:
            if scene_id not in ws.scenes:
                raise error(404, "not_found", f"scene {scene_id} not found")
            scene = scene_from_obj(ws.scenes[scene_id])
        report = validate(program, scene, ws.gateway.library)
        if not report.ok:
            raise error(422, "validation_failed", "program failed validation",
                        report.to_obj())
        ws.programs[program_id] = program_to_obj(program)
        return {"id": program_id, "report": report.to_obj()}

    @app.delete("/programs/{program_id}")
    def delete_program(program_id: str, x_workspace: str = Header(default="default")) -> dict:
        ws = workspace(x_workspace)
        if program_id not in ws.programs:
            raise error(404, "not_found", f"program {program_id} not found")
        del ws.programs[program_id]
        return {"deleted": program_id}

    # --- scenes ----------------------------------------------------------------

    @app.post("/scenes", status_code=201)
    def create_scene(body: dict = Body(...), x_workspace: str = Header(default="default")) -> dict:
        ws = workspace(x_workspace)
        try:
            scene = scene_from_obj(body)
        except SceneFormatError as exc:
            raise error(422, "scene_error", str(exc))
        scene_id = ws.next_id("scene")
        ws.scenes[scene_id] = scene_to_obj(scene)
        return {"id": scene_id, "scene": ws.scenes[scene_id]}

    @app.get("/scenes/{scene_id}")
    def get_scene(scene_id: str, x_workspace: str = Header(default="default")) -> dict:
        ws = workspace(x_workspace)
        if scene_id not in ws.scenes:
            raise error(404, "not_found", f"scene {scene_id} not found")
        return {"id": scene_id, "scene": ws.scenes[scene_id]}

    @app.post("/scenes/{scene_id}/zones", status_code=201)
    def create_zone_endpoint(
        scene_id: str, body: dict = Body(...), x_workspace: str = Header(default="default")
    ) -> dict:
        from ..scene import OffPlane, ZoneLimitReached, create_zone

        ws = workspace(x_workspace)
        if scene_id not in ws.scenes:
            raise error(404, "not_found", f"scene {scene_id} not found")
        scene = scene_from_obj(ws.scenes[scene_id])
        try:
            zone = create_zone(
                scene,
                plane_id=body["plane"],
                center_xz=(int(body["center"][0] * 1000), int(body["center"][1] * 1000)),
                half_extents=(
                    int(body["half_extents"][0] * 1000),
                    int(body["half_extents"][1] * 1000),
                ),
            )
        except ZoneLimitReached as exc:
            raise error(409, "zone_limit", str(exc))
        except (OffPlane, SceneFormatError, KeyError) as exc:
            raise error(422, "zone_error", str(exc))
        ws.scenes[scene_id] = scene_to_obj(scene)
        return {"id": scene_id, "zone": {"label": zone.label}, "scene": ws.scenes[scene_id]}

    @app.put("/scenes/{scene_id}/zones/{label}")
    def place_zone_endpoint(
        scene_id: str,
        label: str,
        body: dict = Body(...),
        x_workspace: str = Header(default="default"),
    ) -> dict:
        from ..scene import OffPlane, UnknownZone, place_zone

        ws = workspace(x_workspace)
        if scene_id not in ws.scenes:
            raise error(404, "not_found", f"scene {scene_id} not found")
        scene = scene_from_obj(ws.scenes[scene_id])
        try:
            center = body["center"]
            half = body.get("half_extents")
            place_zone(
                scene,
                label,
                (int(center[0] * 1000), int(center[1] * 1000), int(center[2] * 1000)),
                (int(half[0] * 1000), int(half[1] * 1000)) if half else None,
            )
        except UnknownZone:
            raise error(404, "not_found", f"zone {label} not found")
        except (OffPlane, KeyError, TypeError) as exc:
            raise error(422, "zone_error", str(exc))
        ws.scenes[scene_id] = scene_to_obj(scene)
        return {"id": scene_id, "scene": ws.scenes[scene_id]}

    # --- sessions -----------------------------------------------------------------

    @app.post("/sessions", status_code=201)
    def create_session_endpoint(
        body: dict = Body(...), x_workspace: str = Header(default="default")
    ) -> dict:
        ws = workspace(x_workspace)
        program_id = body.get("program_id")
        scene_id = body.get("scene_id")
        if program_id not in ws.programs:
            raise error(404, "not_found", f"program {program_id} not found")
        if scene_id not in ws.scenes:
            raise error(404, "not_found", f"scene {scene_id} not found")
        config_obj = SessionConfig().to_obj()
        config_obj.update(body.get("config", {}))
        try:
            session = Session(
                program_from_obj(ws.programs[program_id]),
                scene_from_obj(ws.scenes[scene_id]),
                SessionConfig.from_obj(config_obj),
                library=ws.gateway.library,
            )
        except ValidationFailed as exc:
            raise error(422, "validation_failed", str(exc), exc.report.to_obj())
        session_id = ws.next_id("session")
        actor = SessionActor(
            id=session_id, program_id=program_id, scene_id=scene_id, session=session
        )
        ws.sessions[session_id] = actor
        return actor.snapshot_state()

    def get_actor(ws: Workspace, session_id: str) -> SessionActor:
        actor = ws.sessions.get(session_id)
        if actor is None:
            raise error(404, "not_found", f"session {session_id} not found")
        return actor

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str, x_workspace: str = Header(default="default")) -> dict:
        return get_actor(workspace(x_workspace), session_id).snapshot_state()

    @app.post("/sessions/{session_id}/events")
    def post_event(
        session_id: str,
        body: dict = Body(...),
        x_workspace: str = Header(default="default"),
    ) -> dict:
        actor = get_actor(workspace(x_workspace), session_id)
        event = body.get("type")
        if event not in ("touch_character", "tap_character", "detection_script_update"):
            raise error(422, "bad_event", f"unknown event type {event!r}")
        return actor.inject(event, body.get("client_id"))

    @app.post("/sessions/{session_id}/run")
    def run_ticks(
        session_id: str,
        body: dict = Body(default={}),
        x_workspace: str = Header(default="default"),
    ) -> dict:
        actor = get_actor(workspace(x_workspace), session_id)
        ticks = int(body.get("ticks", 1))
        if ticks < 1:
            raise error(422, "bad_ticks", "ticks must be positive")
        return actor.step_ticks(ticks)

    @app.post("/sessions/{session_id}/mode")
    def set_mode(
        session_id: str,
        body: dict = Body(...),
        x_workspace: str = Header(default="default"),
    ) -> dict:
        actor = get_actor(workspace(x_workspace), session_id)
        return actor.set_mode(body.get("mode", "paused"), body.get("rate"))

    @app.get("/sessions/{session_id}/stream")
    def stream(
        session_id: str,
        request: Request,
        x_workspace: str = Header(default="default"),
        last_event_id: str | None = Header(default=None),
    ):
        actor = get_actor(workspace(x_workspace), session_id)
        resume_from = None
        if last_event_id is not None:
            try:
                resume_from = int(last_event_id)
            except ValueError:
                raise error(422, "bad_header", "Last-Event-Id must be a tick number")

        def event_stream():
            for line in actor.stream(resume_from):
                tick = json.loads(line)["tick"]
                yield f"id: {tick}\ndata: {line}\n\n"

        return StreamingResponse(event_stream(), media_type="text/event-stream")

    # --- moderation + generation ------------------------------------------------------

    @app.post("/moderate")
    def moderate(body: dict = Body(...), x_workspace: str = Header(default="default")) -> dict:
        ws = workspace(x_workspace)
        text = body.get("text", "")
        try:
            outcome = ws.gateway.moderate(text)
        except ValueError as exc:
            raise error(422, "bad_prompt", str(exc))
        payload = {"verdict": outcome.verdict.to_obj()}
        if outcome.token:
            payload["token"] = outcome.token
        if outcome.provider_error:
            payload["provider_error"] = outcome.provider_error
        return payload

    @app.post("/generate", status_code=202)
    def generate(body: dict = Body(...), x_workspace: str = Header(default="default")) -> dict:
        ws = workspace(x_workspace)
        kind = body.get("kind")
        prompt = body.get("prompt", "")
        token = body.get("moderation_token", "")
        if kind not in ("character", "accessory"):
            raise error(422, "bad_kind", f"kind must be character or accessory, got {kind!r}")
        try:
            job = ws.gateway.submit_generation(prompt, kind, token)
        except ModerationRequired as exc:
            raise error(403, "moderation_required", str(exc))
        except ValueError as exc:
            raise error(422, "bad_prompt", str(exc))
        return {"job": job.to_obj()}

    @app.get("/generate/{job_id}")
    def poll_generation(job_id: str, x_workspace: str = Header(default="default")) -> dict:
        ws = workspace(x_workspace)
        try:
            job = ws.gateway.poll_job(job_id)
        except JobNotFound:
            raise error(404, "not_found", f"generation job {job_id} not found")
        return {"job": job.to_obj()}

    # --- library ----------------------------------------------------------------------

    @app.get("/library")
    def library(
        kind: str | None = None, x_workspace: str = Header(default="default")
    ) -> dict:
        ws = workspace(x_workspace)
        return {"assets": [r.to_obj() for r in ws.gateway.library.list(kind)]}

    @app.delete("/library/{asset_id}")
    def delete_asset(asset_id: str, x_workspace: str = Header(default="default")) -> dict:
        from ..gateway import AssetNotFound

        ws = workspace(x_workspace)
        try:
            ws.gateway.library.delete(asset_id)
        except AssetNotFound:
            raise error(404, "not_found", f"asset {asset_id} not found")
        return {"deleted": asset_id}

    @app.get("/library/{asset_id}/clip")
    def get_clip(asset_id: str, x_workspace: str = Header(default="default")) -> dict:
        from ..gateway import AssetNotFound

        ws = workspace(x_workspace)
        try:
            record = ws.gateway.library.get(asset_id)
        except AssetNotFound:
            raise error(404, "not_found", f"asset {asset_id} not found")
        if record.kind != "clip":
            raise error(422, "bad_kind", f"asset {asset_id} is not a clip")
        return json.loads(ws.gateway.library.path_of(asset_id).read_text())

    @app.post("/library/clips", status_code=201)
    def save_clip_endpoint(
        body: dict = Body(...), x_workspace: str = Header(default="default")
    ) -> dict:
        from ..animation import ClipError, clip_from_obj, clip_json_bytes

        ws = workspace(x_workspace)
        try:
            clip = clip_from_obj(body)
        except ClipError as exc:
            raise error(422, "bad_clip", str(exc))
        record = ws.gateway.library.add(
            "clip", clip.name, clip_json_bytes(clip) + b"\n", ".json"
        )
        return {"asset": record.to_obj()}

    # --- rigging ------------------------------------------------------------------------

    @app.post("/rigs", status_code=202)
    def create_rig_job(
        body: dict = Body(...), x_workspace: str = Header(default="default")
    ) -> dict:
        from ..gateway import AssetNotFound

        ws = workspace(x_workspace)
        asset_id = body.get("asset_id")
        resolution = int(body.get("resolution", 64))
        try:
            record = ws.gateway.library.get(asset_id)
        except AssetNotFound:
            raise error(404, "not_found", f"asset {asset_id} not found")
        if record.kind not in ("character", "accessory"):
            raise error(422, "bad_kind", "only mesh assets can be rigged")
        job_id = ws.next_id("rig")
        state = RigJobState(id=job_id, asset_id=asset_id, status="running")
        ws.rig_jobs[job_id] = state
        mesh_path = ws.gateway.library.path_of(asset_id)
        out_path = mesh_path.parent / "rig.json"

        def work() -> None:
            def progress(stage: str, fraction: float) -> None:
                state.stage = stage
                state.progress = fraction

            try:
                mesh = load_mesh(mesh_path)
                rigged = rig_mesh(mesh, voxel_resolution=resolution, progress=progress)
                rigged.save(out_path)
                state.result_path = str(out_path)
                state.status = "succeeded"
            except PreprocessFailed as exc:
                state.status = "failed"
                state.error = exc.report.summary()
                state.report = exc.report.to_obj()
            except Exception as exc:
                state.status = "failed"
                state.error = str(exc)

        threading.Thread(target=work, daemon=True).start()
        return {"job": state.to_obj()}

    @app.get("/rigs/{job_id}")
    def get_rig_job(job_id: str, x_workspace: str = Header(default="default")) -> dict:
        ws = workspace(x_workspace)
        state = ws.rig_jobs.get(job_id)
        if state is None:
            raise error(404, "not_found", f"rig job {job_id} not found")
        return {"job": state.to_obj()}

    return app
