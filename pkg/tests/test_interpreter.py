import pytest

from capy.blocklang import parse_program
from capy.interpreter import (
    FINISHED,
    IDLE,
    RUNNING,
    STOPPED,
    ScheduledEvent,
    Session,
    SessionConfig,
    ValidationFailed,
    create_session,
    run,
)
from capy.scene import (
    CameraSpec,
    ConfidenceProfile,
    PhysicalObject,
    Plane,
    SceneDescription,
    Spawn,
    Zone,
    meters_to_mm,
)

from .oracles import hand_walk


def ground(extent_m=10.0):
    e = meters_to_mm(extent_m)
    return Plane(id="ground", origin=(0, 0, 0), normal=(0.0, 1.0, 0.0), half_extents=(e, e))


def scene_with(objects=(), zones=(), camera=None, spawn=Spawn((0, 150, 0))):
    return SceneDescription(
        planes=[ground()], objects=list(objects), zones=list(zones), camera=camera, spawn=spawn
    )


def touched_session(source: str, scene=None, config=None) -> Session:
    session = create_session(parse_program(source), scene or scene_with(), config)
    session.inject_event("touch_character")
    return session


def effects_of(traces, kind):
    return [(t.tick, e) for t in traces for e in t.effects if e["kind"] == kind]


# --- lifecycle -----------------------------------------------------------------


def test_create_session_idle_at_spawn():
    session = create_session(parse_program("when touched { forward 10 }"), scene_with())
    assert session.status == IDLE
    assert session.tick == 0
    assert session.scene.character.position == (0, 150, 0)


def test_create_session_validation_failure():
    program = parse_program('when touched { if touches zone "Q" { } }')
    with pytest.raises(ValidationFailed):
        create_session(program, scene_with())


def test_touch_arms_session():
    session = touched_session("when touched { forward 10 }")
    assert session.status == RUNNING


def test_empty_program_finishes_on_first_touch():
    session = touched_session("")
    trace = session.step()
    assert session.status == FINISHED
    assert trace.effects == []


def test_retrigger_after_finished():
    session = touched_session("when touched { forward 2 }")
    session.step()
    assert session.status == FINISHED
    pos_after_first = session.scene.character.position
    session.inject_event("touch_character")
    assert session.status == RUNNING
    session.step()
    assert session.status == FINISHED
    assert session.scene.character.position == (
        pos_after_first[0] + 20,
        pos_after_first[1],
        pos_after_first[2],
    )


def test_tap_stops_forever_loop():
    session = touched_session("when touched { forever { forward 2 } }")
    for _ in range(5):
        session.step()
    session.inject_event("tap_character")
    trace = session.step()
    assert session.status == STOPPED
    stop_tick = trace.tick
    assert [e for e in trace.effects if e["kind"] != "event"] == []
    with pytest.raises(RuntimeError):
        session.step()
    assert stop_tick == 6


# --- motion timing ----------------------------------------------------------------


def test_forward_10_takes_5_ticks_and_exact_displacement():
    session = touched_session("when touched { forward 10 }")
    traces = run(session)
    moved = effects_of(traces, "moved")
    assert [t for t, _ in moved] == [1, 2, 3, 4, 5]
    assert session.status == FINISHED
    # 10 steps * 10mm, facing +X
    assert session.scene.character.position == (100, 150, 0)
    assert sum(e["steps"] for _, e in moved) == 10


def test_forward_remainder_on_final_tick():
    session = touched_session("when touched { forward 3 }")
    traces = run(session)
    moved = effects_of(traces, "moved")
    assert [e["steps"] for _, e in moved] == [2, 1]
    assert session.scene.character.position == (30, 150, 0)


def test_turn_90_takes_15_ticks():
    session = touched_session("when touched { turn 90 }")
    traces = run(session)
    turned = effects_of(traces, "turned")
    assert len(turned) == 15
    assert session.scene.character.yaw_mdeg == 90_000


def test_four_turns_net_zero_yaw():
    session = touched_session("when touched { turn 90 turn 90 turn 90 turn 90 }")
    run(session)
    assert session.scene.character.yaw_mdeg == 0


def test_negative_turn():
    session = touched_session("when touched { turn -90 }")
    run(session)
    assert session.scene.character.yaw_mdeg == 270_000


def test_repeat_zero_finishes_tick_one_no_effects():
    session = touched_session("when touched { repeat 0 { forward 10 } }")
    traces = run(session)
    assert session.status == FINISHED
    assert len(traces) == 1
    assert traces[0].effects == []


def test_forward_displacement_matches_hand_walk_oracle():
    config = SessionConfig()
    spawn = Spawn((0, 150, 0), yaw_mdeg=37_000)
    session = touched_session("when touched { forward 25 }", scene_with(spawn=spawn), config)
    traces = run(session)
    moved = effects_of(traces, "moved")
    oracle = hand_walk(
        session.scene, (0, 150, 0), 37_000, 25, config.move_rate, config.step_length_mm
    )
    assert [tuple(e["position"]) for _, e in moved] == oracle


def test_tick_conservation_off_axis():
    # sum of per-tick displacements equals the displacement of the full walk
    spawn = Spawn((0, 150, 0), yaw_mdeg=45_000)
    session = touched_session("when touched { forward 33 }", scene_with(spawn=spawn))
    traces = run(session)
    moved = effects_of(traces, "moved")
    final = tuple(moved[-1][1]["position"])
    from capy.scene import displacement_mm

    dx, dz = displacement_mm(33 * 10, 45_000)
    assert final == (dx, 150, dz)


# --- trail and looks -----------------------------------------------------------------


def test_trail_two_points_for_two_move_ticks():
    session = touched_session("when touched { start trail forward 4 }")
    traces = run(session)
    points = effects_of(traces, "trail_point")
    assert len(points) == 2
    assert session.scene.trail == [(20, 150, 0), (40, 150, 0)]


def test_stop_wear_of_unworn_records_noop():
    session = touched_session('when touched { stop wear "hat" }')
    traces = run(session)
    unwear = effects_of(traces, "unwear")
    assert len(unwear) == 1
    assert unwear[0][1]["changed"] is False


def test_wear_then_unwear():
    session = touched_session('when touched { start wear "hat" stop wear "hat" }')
    traces = run(session)
    assert effects_of(traces, "wear")[0][1]["changed"] is True
    assert effects_of(traces, "unwear")[0][1]["changed"] is True
    assert session.scene.worn == set()


def test_animation_started_effect():
    session = touched_session('when touched { start animation "wave" }')
    traces = run(session)
    started = effects_of(traces, "animation_started")
    assert [(t, e["clip"]) for t, e in started] == [(1, "wave")]
    assert session.scene.active_animation == "wave"


# --- perception cadence ------------------------------------------------------------------


def banana_scene():
    camera = CameraSpec(
        position=(meters_to_mm(1.0), meters_to_mm(3.0), 0),
        look_at=(meters_to_mm(1.0), 0, 0),
        fov_deg=60.0,
        resolution=(1000, 1000),
    )
    banana = PhysicalObject(
        class_name="banana",
        position=(meters_to_mm(1.0), 50, 0),
        yaw_mdeg=0,
        half_extents=(120, 50, 120),
        confidence=ConfidenceProfile.constant(0.9),
    )
    return scene_with(objects=[banana], camera=camera)


BANANA_PROGRAM = """
when touched {
  forward 80
}
when touched {
  forever {
    if touches object "banana" { start animation "wave" }
  }
}
"""


def test_refresh_ticks_are_multiples_of_period():
    session = touched_session(BANANA_PROGRAM, banana_scene())
    traces = [session.step() for _ in range(35)]
    refresh_ticks = sorted({t for t, _ in effects_of(traces, "detection_update")})
    assert refresh_ticks == [10, 20, 30]


def test_animation_fires_on_first_perception_tick_after_overlap():
    config = SessionConfig()
    session = touched_session(BANANA_PROGRAM, banana_scene(), config)
    traces = run(session, max_ticks=80)
    # hand-simulate overlap onset: walking +X from 0 at 2 steps/tick * 10mm,
    # banana footprint x in [880, 1120]; character half extent 150.
    # contact when char_x >= 880 - 150 = 730 => tick ceil(730/20) = 37.
    onset_tick = 37
    first_refresh_after = ((onset_tick + config.perception_period - 1)
                           // config.perception_period) * config.perception_period
    assert first_refresh_after == 40
    started = effects_of(traces, "animation_started")
    assert started, "expected the wave animation to start"
    # the detector script evaluates its condition every tick, so the
    # animation lands exactly on the refresh tick that saw the overlap
    assert started[0][0] == first_refresh_after
    evaluated = [
        (t, e["value"]) for t, e in effects_of(traces, "condition_evaluated")
    ]
    for tick, value in evaluated:
        if tick < first_refresh_after:
            assert value is False


def test_condition_reads_stale_perception_between_refreshes():
    config = SessionConfig()
    session = touched_session(BANANA_PROGRAM, banana_scene(), config)
    traces = run(session, max_ticks=60)
    evaluated = effects_of(traces, "condition_evaluated")
    refreshes = {t for t, _ in effects_of(traces, "detection_update")} | {0}
    # value at tick t must equal detection status at the latest refresh <= t
    status_at = {}
    last = "searching"
    for t in range(0, 61):
        if t in refreshes:
            for tick, e in effects_of(traces, "detection_update"):
                if tick == t and e["target"] == "banana":
                    last = e["status"]
        status_at[t] = last
    for tick, e in evaluated:
        assert e["value"] == (status_at[tick] == "touched")


# --- determinism and snapshots ----------------------------------------------------------


def trace_lines(traces):
    return [t.to_json_line() for t in traces]


def test_repeated_runs_byte_identical():
    def one_run():
        session = touched_session(BANANA_PROGRAM, banana_scene())
        return trace_lines(run(session, max_ticks=50))

    first = one_run()
    for _ in range(3):
        assert one_run() == first


def test_snapshot_resume_identical_traces():
    config = SessionConfig()
    base = touched_session(BANANA_PROGRAM, banana_scene(), config)
    full = trace_lines(run(base, max_ticks=50))

    session = touched_session(BANANA_PROGRAM, banana_scene(), config)
    prefix = trace_lines([session.step() for _ in range(17)])
    snapshot = session.snapshot()

    resumed = Session.restore(snapshot)
    rest = []
    while resumed.tick < 50 and resumed.status == RUNNING:
        rest.append(resumed.step())
    assert prefix + trace_lines(rest) == full


def test_snapshot_of_idle_session():
    session = create_session(parse_program("when touched { forward 2 }"), scene_with())
    snap = session.snapshot()
    assert snap["tick"] == 0
    assert snap["status"] == IDLE
    assert snap["scene"]["character"]["position"] == [0, 150, 0]


def test_snapshot_restore_preserves_hash():
    session = touched_session("when touched { forever { forward 2 turn 12 } }")
    for _ in range(9):
        session.step()
    snap = session.snapshot()
    restored = Session.restore(snap)
    assert restored.scene.scene_hash() == session.scene.scene_hash()
    assert restored.step().to_json_line() == session.step().to_json_line()


# --- run() driver ---------------------------------------------------------------------


def test_run_max_ticks_stops_forever_program():
    session = touched_session("when touched { forever { forward 2 } }")
    traces = run(session, max_ticks=40)
    assert session.status == STOPPED
    assert len(traces) == 40
    assert traces[-1].tick == 40


def test_run_with_scheduled_tap():
    session = create_session(
        parse_program("when touched { forever { forward 2 } }"), scene_with()
    )
    traces = run(
        session,
        max_ticks=100,
        events=[ScheduledEvent(0, "touch_character"), ScheduledEvent(20, "tap_character")],
    )
    assert session.status == STOPPED
    stop_tick = traces[-1].tick
    assert stop_tick == 21
    for trace in traces:
        for effect in trace.effects:
            assert trace.tick <= stop_tick


def test_stop_safety_no_effects_after_stop():
    session = touched_session("when touched { forever { start trail forward 2 } }")
    for _ in range(10):
        session.step()
    session.inject_event("tap_character")
    final = session.step()
    non_event = [e for e in final.effects if e["kind"] != "event"]
    assert non_event == []
    assert session.status == STOPPED


def test_two_scripts_interleave_in_order():
    source = "when touched { forward 4 } when touched { turn 12 }"
    session = touched_session(source)
    traces = run(session)
    tick1 = traces[0].effects
    kinds = [e["kind"] for e in tick1]
    assert kinds == ["moved", "turned"]
    assert session.status == FINISHED
