import json

import pytest

from capy.gateway import (
    ACCESSORY_STYLE_SUFFIX,
    CHARACTER_PROMPT_TEMPLATE,
    FAIL_CLOSED_REASON,
    MODERATION_SYSTEM_PROMPT,
    Gateway,
    InvalidMesh,
    JobNotFound,
    MockGen3DProvider,
    MockModerationProvider,
    ModerationRequired,
    TokenIssuer,
    compose_generation_prompt,
    moderate_prompt,
    parse_moderation_response,
)
from capy.gateway.moderation import ProviderTimeout
from capy.procgen import open_test_mesh
from capy.rigging import preprocess_mesh


class FakeClock:
    def __init__(self, start=1000.0):
        self.now = start

    def __call__(self):
        return self.now

    def advance(self, seconds):
        self.now += seconds


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture
def gateway(tmp_path, clock):
    return Gateway(
        tmp_path / "store",
        moderation_provider=MockModerationProvider(),
        gen3d_provider=MockGen3DProvider(clock=clock, mesh_resolution=32),
        clock=clock,
        token_secret=b"test-secret",
    )


# --- moderation --------------------------------------------------------------


def test_toy_weapon_blocked(gateway):
    outcome = gateway.moderate("a toy weapon")
    assert outcome.verdict.inappropriate_for_children
    assert outcome.verdict.reason
    assert outcome.token is None


def test_cowboy_hat_allowed(gateway):
    outcome = gateway.moderate("a cowboy hat")
    assert not outcome.verdict.inappropriate_for_children
    assert outcome.token


def test_rainbow_unicorn_allowed(gateway):
    outcome = gateway.moderate("a rainbow unicorn")
    assert outcome.verdict.allowed


def test_malformed_provider_response_fails_closed(tmp_path, clock):
    gateway = Gateway(
        tmp_path / "s",
        moderation_provider=MockModerationProvider(malformed_response="I think it's fine!"),
        clock=clock,
    )
    outcome = gateway.moderate("a nice flower")
    assert outcome.verdict.inappropriate_for_children
    assert outcome.verdict.reason == FAIL_CLOSED_REASON
    assert outcome.token is None


def test_provider_timeout_fails_closed_after_retries(tmp_path, clock):
    provider = MockModerationProvider(fail_with_timeout=True)
    gateway = Gateway(tmp_path / "s", moderation_provider=provider, clock=clock)
    outcome = gateway.moderate("a nice flower")
    assert outcome.verdict.inappropriate_for_children
    assert outcome.provider_error
    assert len(provider.calls) == 3  # initial try plus two retries


def test_moderation_sends_fixed_system_prompt(gateway):
    gateway.moderate("a garden gnome")
    system, user = gateway.moderation_provider.calls[-1]
    assert system == MODERATION_SYSTEM_PROMPT
    assert "content moderator expert" in system
    assert "toy weapon" in system
    assert user == "a garden gnome"


def test_moderate_rejects_empty_and_oversized(gateway):
    with pytest.raises(ValueError):
        gateway.moderate("")
    with pytest.raises(ValueError):
        gateway.moderate("x" * 2001)


@pytest.mark.parametrize(
    "raw,expected",
    [
        ('{"inappropriateForChildren": "true", "reason": "scary"}', True),
        ('{"inappropriateForChildren": "false", "reason": ""}', False),
        ('{"inappropriateForChildren": false, "reason": ""}', False),
        ('```json\n{"inappropriateForChildren": "false", "reason": ""}\n```', False),
        ('Sure! {"inappropriateForChildren": "true", "reason": "weapon"} hope that helps', True),
    ],
)
def test_parse_moderation_response_variants(raw, expected):
    verdict = parse_moderation_response(raw)
    assert verdict is not None
    assert verdict.inappropriate_for_children is expected


@pytest.mark.parametrize(
    "raw",
    ["", "not json", '{"reason": "no flag"}', '{"inappropriateForChildren": 3}', "[]"],
)
def test_parse_moderation_response_rejects_garbage(raw):
    assert parse_moderation_response(raw) is None


def test_token_expires_after_ten_minutes(clock):
    issuer = TokenIssuer(secret=b"k", clock=clock)
    token = issuer.issue("a hat")
    assert issuer.verify(token, "a hat")
    clock.advance(599)
    assert issuer.verify(token, "a hat")
    clock.advance(2)
    assert not issuer.verify(token, "a hat")


def test_token_bound_to_exact_text(clock):
    issuer = TokenIssuer(secret=b"k", clock=clock)
    token = issuer.issue("a hat")
    assert not issuer.verify(token, "a hat ")
    assert not issuer.verify(token, "a bat")
    assert not issuer.verify("garbage", "a hat")


# --- prompt composition -----------------------------------------------------------


def test_character_prompt_contains_template_fragments():
    composed = compose_generation_prompt("a cute panda", "character")
    assert "perfect T-pose" in composed.text
    assert "closed, connected mesh topology" in composed.text
    assert composed.text.startswith(CHARACTER_PROMPT_TEMPLATE)
    assert composed.text.endswith("a cute panda")
    assert composed.warnings == []


def test_accessory_prompt_has_style_suffix_no_tpose():
    composed = compose_generation_prompt("wizard hat", "accessory")
    assert "T-pose" not in composed.text
    assert composed.text == f"wizard hat, {ACCESSORY_STYLE_SUFFIX}"


def test_empty_user_text_template_alone_with_warning():
    composed = compose_generation_prompt("", "character")
    assert composed.text == CHARACTER_PROMPT_TEMPLATE
    assert composed.warnings


# --- generation jobs -----------------------------------------------------------------


def submit(gateway, text="a cute panda", kind="character"):
    outcome = gateway.moderate(text)
    assert outcome.token
    return gateway.submit_generation(text, kind, outcome.token)


def test_submit_without_token_rejected(gateway):
    with pytest.raises(ModerationRequired):
        gateway.submit_generation("a cute panda", "character", "not-a-token")


def test_submit_token_for_other_text_rejected(gateway):
    outcome = gateway.moderate("a cowboy hat")
    with pytest.raises(ModerationRequired):
        gateway.submit_generation("a cute panda", "character", outcome.token)


def test_job_completes_after_simulated_delay(gateway, clock):
    job = submit(gateway)
    assert job.status == "pending"
    assert gateway.poll_job(job.id).status == "pending"
    clock.advance(3.0)
    polled = gateway.poll_job(job.id)
    assert polled.status == "succeeded"
    assert polled.asset_uri
    mesh = gateway.fetch_asset(job.id)
    assert preprocess_mesh(mesh).ok
    record = gateway.library.get(polled.asset_id)
    assert record.kind == "character"
    assert record.origin_prompt == "a cute panda"


def test_poll_unknown_job(gateway):
    with pytest.raises(JobNotFound):
        gateway.poll_job("gen-9999")


def test_poll_is_idempotent(gateway, clock):
    job = submit(gateway)
    clock.advance(3.0)
    first = gateway.poll_job(job.id)
    second = gateway.poll_job(job.id)
    assert first.to_obj() == second.to_obj()
    assert len(gateway.library.list("character")) == 1


def test_open_mesh_fails_validation(tmp_path, clock):
    gateway = Gateway(
        tmp_path / "s",
        gen3d_provider=MockGen3DProvider(clock=clock, mesh_override=open_test_mesh()),
        clock=clock,
        token_secret=b"k",
    )
    job = submit(gateway, "a donut cloud", "accessory")
    clock.advance(3.0)
    polled = gateway.poll_job(job.id)
    assert polled.status == "failed"
    assert "try a different prompt" in polled.error
    with pytest.raises(InvalidMesh):
        gateway.fetch_asset(job.id)
    assert gateway.library.list("accessory") == []


def test_jobs_persist_across_restart(tmp_path, clock):
    root = tmp_path / "store"
    g1 = Gateway(root, clock=clock, token_secret=b"k")
    job = submit(g1)
    g2 = Gateway(root, clock=clock, token_secret=b"k")
    restored = g2.poll_job(job.id)
    assert restored.id == job.id
    assert restored.user_text == "a cute panda"


def test_job_status_never_moves_backward(gateway, clock):
    job = submit(gateway)
    clock.advance(3.0)
    assert gateway.poll_job(job.id).status == "succeeded"
    clock.advance(1000.0)
    assert gateway.poll_job(job.id).status == "succeeded"


def test_same_prompt_twice_distinct_records(gateway, clock):
    job1 = submit(gateway)
    # fresh token for the second submission
    job2 = submit(gateway)
    clock.advance(3.0)
    gateway.poll_job(job1.id)
    gateway.poll_job(job2.id)
    records = gateway.library.list("character")
    assert len(records) == 2
    assert records[0].id != records[1].id


# --- library ------------------------------------------------------------------------


def test_seed_defaults_installs_capybara(gateway):
    gateway.library.seed_defaults()
    names = gateway.library.character_names()
    assert "capybara" in names
    assert "cowboy hat" in gateway.library.accessory_names()
    assert {"wave", "greet"} <= gateway.library.clip_names()


def test_seed_defaults_idempotent(gateway):
    first = gateway.library.seed_defaults()
    second = gateway.library.seed_defaults()
    assert first
    assert second == []


def test_library_delete_then_get(gateway):
    gateway.library.seed_defaults()
    record = gateway.library.by_display_name("accessory", "apple")
    path = gateway.library.path_of(record.id)
    assert path.exists()
    gateway.library.delete(record.id)
    assert not path.exists()
    from capy.gateway import AssetNotFound

    with pytest.raises(AssetNotFound):
        gateway.library.get(record.id)


def test_seeded_clip_is_loadable(gateway, tmp_path):
    gateway.library.seed_defaults()
    from capy.animation import load_clip

    record = gateway.library.by_display_name("clip", "wave")
    clip, warnings = load_clip(gateway.library.path_of(record.id))
    assert warnings == []
    assert clip.skeleton_id == "tracking-28"
    assert clip.duration > 1.0


def test_library_files_exist_for_every_record(gateway):
    gateway.library.seed_defaults()
    for record in gateway.library.list():
        assert gateway.library.path_of(record.id).exists()
