"""Batch front door: validate and run programs, rig meshes, replay clips,
moderate prompts, and drive generation jobs from the shell.

Exit codes: 0 ok, 1 validation failure, 2 runtime failure, 3 provider
failure. `--json` switches stdout to machine-parseable JSON. Session
defaults can live in a capy.toml next to the working directory.
"""
from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from .blocklang import BlockSyntaxError, LimitExceeded, parse_program, validate
from .gateway import Gateway, InvalidMesh, gateway_from_env
from .interpreter import ScheduledEvent, Session, SessionConfig, ValidationFailed, run as run_session, write_trace
from .rigging import PreprocessFailed, RiggedCharacter, load_mesh, rig as rig_mesh
from .scene import SceneFormatError, load_scene

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_PROVIDER = 3


def _load_config(path: Path | None) -> SessionConfig:
    candidates = [path] if path else [Path("capy.toml")]
    for candidate in candidates:
        if candidate and candidate.exists():
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            doc = tomllib.loads(candidate.read_text(encoding="utf-8"))
            section = doc.get("session", {})
            defaults = SessionConfig().to_obj()
            defaults.update({k: section[k] for k in defaults if k in section})
            return SessionConfig.from_obj(defaults)
    return SessionConfig()


def _emit(payload: dict, as_json: bool, human: str) -> None:
    if as_json:
        click.echo(json.dumps(payload, separators=(",", ":")))
    else:
        click.echo(human)


def _parse_program_file(path: str):
    try:
        return parse_program(Path(path).read_text(encoding="utf-8"))
    except (BlockSyntaxError, LimitExceeded) as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


def _load_scene_file(path: str):
    try:
        return load_scene(path)
    except (SceneFormatError, OSError, ValueError) as exc:
        click.echo(f"scene error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


@click.group()
def main() -> None:
    """Deterministic engine for the block-programmable character."""


@main.command("validate")
@click.argument("program", type=click.Path(exists=True))
@click.option("--scene", "scene_file", type=click.Path(exists=True), required=True)
@click.option("--library", "library_root", type=click.Path(), default=None,
              help="Asset store root for accessory/clip checks.")
@click.option("--json", "as_json", is_flag=True)
def validate_cmd(program: str, scene_file: str, library_root: str | None, as_json: bool) -> None:
    parsed = _parse_program_file(program)
    scene = _load_scene_file(scene_file)
    library = Gateway(library_root).library if library_root else None
    report = validate(parsed, scene, library)
    _emit(
        report.to_obj(),
        as_json,
        "ok" if report.ok else "\n".join(
            f"{d.severity} {d.code} at {d.span.line}:{d.span.col}: {d.message}"
            for d in report.diagnostics
        ),
    )
    sys.exit(EXIT_OK if report.ok else EXIT_VALIDATION)


@main.command("run")
@click.argument("program", type=click.Path(exists=True))
@click.option("--scene", "scene_file", type=click.Path(exists=True), required=True)
@click.option("--max-ticks", type=int, default=None)
@click.option("--trace", "trace_file", type=click.Path(), default=None)
@click.option("--events", "events_file", type=click.Path(exists=True), default=None,
              help="JSON array of {tick, event} applied at tick boundaries.")
@click.option("--auto-touch", is_flag=True, help="Inject the touch event at tick 0.")
@click.option("--config", "config_file", type=click.Path(exists=True), default=None)
@click.option("--json", "as_json", is_flag=True)
def run_cmd(
    program: str,
    scene_file: str,
    max_ticks: int | None,
    trace_file: str | None,
    events_file: str | None,
    auto_touch: bool,
    config_file: str | None,
    as_json: bool,
) -> None:
    parsed = _parse_program_file(program)
    scene = _load_scene_file(scene_file)
    config = _load_config(Path(config_file) if config_file else None)
    events = []
    if events_file:
        for entry in json.loads(Path(events_file).read_text(encoding="utf-8")):
            events.append(ScheduledEvent(tick=int(entry["tick"]), event=str(entry["event"])))
    try:
        session = Session(parsed, scene, config)
    except ValidationFailed as exc:
        _emit(exc.report.to_obj(), as_json, str(exc))
        sys.exit(EXIT_VALIDATION)
    try:
        traces = run_session(session, max_ticks=max_ticks, auto_touch=auto_touch, events=events)
    except Exception as exc:
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    if trace_file:
        write_trace(traces, trace_file)
    summary = {
        "status": session.status,
        "ticks": session.tick,
        "trace_rows": len(traces),
        "final_position": list(session.scene.character.position),
        "final_yaw_mdeg": session.scene.character.yaw_mdeg,
        "worn": sorted(session.scene.worn),
        "scene_hash": session.scene.scene_hash(),
    }
    _emit(
        summary,
        as_json,
        f"{session.status} after {session.tick} ticks; "
        f"position {summary['final_position']} hash {summary['scene_hash']}",
    )
    sys.exit(EXIT_OK)


@main.command("rig")
@click.argument("mesh_file", type=click.Path(exists=True))
@click.option("--resolution", type=int, default=64, show_default=True)
@click.option("-o", "--output", type=click.Path(), required=True)
@click.option("--json", "as_json", is_flag=True)
def rig_cmd(mesh_file: str, resolution: int, output: str, as_json: bool) -> None:
    try:
        mesh = load_mesh(mesh_file)
    except Exception as exc:
        click.echo(f"mesh error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    try:
        rigged = rig_mesh(mesh, voxel_resolution=resolution)
    except PreprocessFailed as exc:
        _emit(exc.report.to_obj(), as_json, exc.report.summary())
        sys.exit(EXIT_VALIDATION)
    except Exception as exc:
        click.echo(f"rigging failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    rigged.save(output)
    _emit(
        {
            "skeleton_id": rigged.skeleton_id,
            "joints": len(rigged.joint_names),
            "vertices": len(rigged.mesh.vertices),
            "output": output,
        },
        as_json,
        f"rigged {len(rigged.mesh.vertices)} vertices onto {rigged.skeleton_id} -> {output}",
    )
    sys.exit(EXIT_OK)


@main.command("replay")
@click.argument("rig_file", type=click.Path(exists=True))
@click.argument("clip_file", type=click.Path(exists=True))
@click.option("--at", "at_time", type=float, default=0.0, show_default=True)
@click.option("-o", "--output", type=click.Path(), required=True)
@click.option("--json", "as_json", is_flag=True)
def replay_cmd(rig_file: str, clip_file: str, at_time: float, output: str, as_json: bool) -> None:
    from .animation import apply_pose, load_clip, sample

    try:
        rigged = RiggedCharacter.load(rig_file)
        clip, warnings = load_clip(clip_file, expected_skeleton_id=rigged.skeleton_id)
    except Exception as exc:
        click.echo(f"replay input error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    for warning in warnings:
        click.echo(f"warning: {warning}", err=True)
    try:
        frame = sample(clip, at_time)
        deformed = apply_pose(rigged, frame)
    except Exception as exc:
        click.echo(f"replay failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    payload = {
        "clip": clip.name,
        "t": at_time,
        "vertices": [[float(x) for x in v] for v in deformed],
    }
    Path(output).write_text(json.dumps(payload) + "\n", encoding="utf-8")
    _emit(
        {"clip": clip.name, "t": at_time, "vertices": len(deformed), "output": output},
        as_json,
        f"sampled {clip.name!r} at t={at_time}: {len(deformed)} vertices -> {output}",
    )
    sys.exit(EXIT_OK)


@main.command("moderate")
@click.argument("text")
@click.option("--store", "store_root", type=click.Path(), default=".capy-store", show_default=True)
@click.option("--json", "as_json", is_flag=True)
def moderate_cmd(text: str, store_root: str, as_json: bool) -> None:
    try:
        gateway = gateway_from_env(store_root)
        outcome = gateway.moderate(text)
    except Exception as exc:
        click.echo(f"moderation error: {exc}", err=True)
        sys.exit(EXIT_PROVIDER)
    payload = outcome.verdict.to_obj()
    if outcome.token:
        payload["token"] = outcome.token
    verdict = "inappropriate" if outcome.verdict.inappropriate_for_children else "appropriate"
    human = verdict if outcome.verdict.allowed else f"{verdict}: {outcome.verdict.reason}"
    _emit(payload, as_json, human)
    sys.exit(EXIT_OK if outcome.verdict.allowed else EXIT_PROVIDER)


@main.command("generate")
@click.argument("kind", type=click.Choice(["character", "accessory"]))
@click.argument("prompt")
@click.option("--provider", type=click.Choice(["mock", "live"]), default="mock", show_default=True)
@click.option("--store", "store_root", type=click.Path(), default=".capy-store", show_default=True)
@click.option("--timeout", "timeout_s", type=float, default=360.0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def generate_cmd(
    kind: str, prompt: str, provider: str, store_root: str, timeout_s: float, as_json: bool
) -> None:
    import os

    os.environ.setdefault("GATEWAY_PROVIDER", provider)
    try:
        gateway = gateway_from_env(store_root)
        outcome = gateway.moderate(prompt)
        if not outcome.verdict.allowed:
            _emit(
                outcome.verdict.to_obj(),
                as_json,
                f"blocked: {outcome.verdict.reason}",
            )
            sys.exit(EXIT_PROVIDER)
        job = gateway.submit_generation(prompt, kind, outcome.token)
        deadline = time.time() + timeout_s
        while True:
            job = gateway.poll_job(job.id)
            if job.status != "pending":
                break
            if time.time() > deadline:
                click.echo("generation timed out", err=True)
                sys.exit(EXIT_PROVIDER)
            time.sleep(0.2)
    except InvalidMesh as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_PROVIDER)
    except Exception as exc:
        click.echo(f"generation error: {exc}", err=True)
        sys.exit(EXIT_PROVIDER)
    if job.status == "failed":
        _emit(job.to_obj(), as_json, f"failed: {job.error}")
        sys.exit(EXIT_PROVIDER)
    _emit(
        job.to_obj(),
        as_json,
        f"succeeded: asset {job.asset_id} at {job.asset_uri}",
    )
    sys.exit(EXIT_OK)


@main.command("seed")
@click.option("--store", "store_root", type=click.Path(), default=".capy-store", show_default=True)
@click.option("--json", "as_json", is_flag=True)
def seed_cmd(store_root: str, as_json: bool) -> None:
    """Install the default character, accessories, and clips."""
    gateway = Gateway(store_root)
    created = gateway.library.seed_defaults()
    _emit(
        {"created": [r.id for r in created]},
        as_json,
        f"seeded {len(created)} assets" if created else "library already seeded",
    )
    sys.exit(EXIT_OK)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8734, show_default=True)
@click.option("--store", "store_root", type=click.Path(), default=".capy-store", show_default=True)
def serve_cmd(host: str, port: int, store_root: str) -> None:
    """Run the HTTP service for the studio frontend."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(store_root=store_root), host=host, port=port)


if __name__ == "__main__":
    main()
