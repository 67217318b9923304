"""Text-to-3D job protocol: compose, submit, poll, download, validate.

Character prompts are wrapped in a fixed template that pushes the provider
toward riggable output (T-pose, proportioned, closed connected topology);
accessory prompts get a lighter style suffix. Jobs persist across
restarts; polling is idempotent and marks a job succeeded only after its
mesh downloads and passes the closed/connected check.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Protocol

from ..procgen import mesh_for_prompt
from ..rigging.mesh import TriMesh, obj_bytes

CHARACTER_PROMPT_TEMPLATE = (
    "Generate a 3D character in a cartoonish style with a humanoid shape, "
    "standing in a perfect T-pose. The arms should be fully extended "
    "horizontally, forming a straight line with the shoulders. The character "
    "should have a balanced, well-proportioned body and a closed, connected "
    "mesh topology."
)

ACCESSORY_STYLE_SUFFIX = "cartoonish style, a single connected object"

KINDS = ("character", "accessory")


class GenerationFailed(RuntimeError):
    pass


class InvalidMesh(ValueError):
    """The generated mesh is not a single closed surface.

    Surfaced to users as "try a different prompt".
    """


class JobNotFound(KeyError):
    pass


@dataclass
class ComposedPrompt:
    text: str
    warnings: list[str] = field(default_factory=list)


def compose_generation_prompt(user_text: str, kind: str) -> ComposedPrompt:
    if kind not in KINDS:
        raise ValueError(f"unknown generation kind {kind!r}")
    cleaned = user_text.strip()
    warnings = []
    if not cleaned:
        warnings.append("empty description: generating from the template alone")
    if kind == "character":
        text = f"{CHARACTER_PROMPT_TEMPLATE} The character is: {cleaned}" if cleaned else (
            CHARACTER_PROMPT_TEMPLATE
        )
    else:
        text = f"{cleaned}, {ACCESSORY_STYLE_SUFFIX}" if cleaned else ACCESSORY_STYLE_SUFFIX
    return ComposedPrompt(text=text, warnings=warnings)


PENDING = "pending"
SUCCEEDED = "succeeded"
FAILED = "failed"


@dataclass
class GenerationJob:
    id: str
    kind: str
    user_text: str
    prompt: str  # the composed, post-moderation provider prompt
    status: str = PENDING
    asset_uri: str | None = None  # set exactly when status == succeeded
    asset_id: str | None = None  # library record once stored
    created_at: str = ""
    error: str | None = None
    provider_job_id: str | None = None

    def to_obj(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "user_text": self.user_text,
            "prompt": self.prompt,
            "status": self.status,
            "asset_uri": self.asset_uri,
            "asset_id": self.asset_id,
            "created_at": self.created_at,
            "error": self.error,
            "provider_job_id": self.provider_job_id,
        }

    @staticmethod
    def from_obj(obj: dict) -> "GenerationJob":
        return GenerationJob(**obj)


class Gen3DProvider(Protocol):
    def submit(self, prompt: str, kind: str) -> str:
        """Start a provider job; returns the provider's job id."""

    def status(self, provider_job_id: str) -> tuple[str, str | None]:
        """(status, detail): pending / succeeded+download-ref / failed+error."""

    def download(self, provider_job_id: str) -> bytes:
        """Mesh bytes (Wavefront OBJ) for a succeeded provider job."""


@dataclass
class MockGen3DProvider:
    """Offline provider: deterministic procedural meshes keyed by prompt.

    Completes after a simulated delay on an injectable clock, so tests step
    time without sleeping.
    """

    clock: Callable[[], float] = time.time
    delay_s: float = 3.0
    mesh_resolution: int = 48
    mesh_override: TriMesh | None = None
    fail_with: str | None = None
    _jobs: dict[str, tuple[str, str, float]] = field(default_factory=dict)
    _counter: int = 0

    def submit(self, prompt: str, kind: str) -> str:
        self._counter += 1
        job_id = f"mock-{self._counter:04d}"
        self._jobs[job_id] = (prompt, kind, self.clock())
        return job_id

    def status(self, provider_job_id: str) -> tuple[str, str | None]:
        if provider_job_id not in self._jobs:
            return (FAILED, "unknown provider job")
        if self.fail_with is not None:
            return (FAILED, self.fail_with)
        _, _, submitted = self._jobs[provider_job_id]
        if self.clock() - submitted >= self.delay_s:
            return (SUCCEEDED, f"mock://{provider_job_id}/mesh.obj")
        return (PENDING, None)

    def download(self, provider_job_id: str) -> bytes:
        prompt, kind, _ = self._jobs[provider_job_id]
        mesh = self.mesh_override or mesh_for_prompt(prompt, kind, self.mesh_resolution)
        return obj_bytes(mesh)


class HttpGen3DProvider:
    """Thin adapter for a hosted text-to-3D service.

    Contract: POST {endpoint}/jobs {"prompt":..., "kind":...} ->
    {"job_id":...}; GET {endpoint}/jobs/{id} -> {"status": "pending" |
    "succeeded" | "failed", "download_url":..., "error":...}; the download
    URL serves Wavefront OBJ bytes.
    """

    def __init__(self, endpoint: str, api_key: str | None = None, timeout_s: float = 60.0):
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key
        self.timeout_s = timeout_s
        self._download_urls: dict[str, str] = {}

    def _headers(self) -> dict:
        return {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}

    def submit(self, prompt: str, kind: str) -> str:
        import httpx

        response = httpx.post(
            f"{self.endpoint}/jobs",
            json={"prompt": prompt, "kind": kind},
            headers=self._headers(),
            timeout=self.timeout_s,
        )
        response.raise_for_status()
        return str(response.json()["job_id"])

    def status(self, provider_job_id: str) -> tuple[str, str | None]:
        import httpx

        response = httpx.get(
            f"{self.endpoint}/jobs/{provider_job_id}",
            headers=self._headers(),
            timeout=self.timeout_s,
        )
        response.raise_for_status()
        body = response.json()
        status = body.get("status")
        if status == SUCCEEDED:
            self._download_urls[provider_job_id] = body["download_url"]
            return (SUCCEEDED, body["download_url"])
        if status == FAILED:
            return (FAILED, body.get("error", "provider reported failure"))
        return (PENDING, None)

    def download(self, provider_job_id: str) -> bytes:
        import httpx

        url = self._download_urls.get(provider_job_id)
        if url is None:
            status, detail = self.status(provider_job_id)
            if status != SUCCEEDED:
                raise GenerationFailed(f"provider job not ready: {detail}")
            url = detail
        response = httpx.get(url, headers=self._headers(), timeout=self.timeout_s)
        response.raise_for_status()
        return response.content


def utc_timestamp(clock: Callable[[], float]) -> str:
    return datetime.fromtimestamp(clock(), tz=timezone.utc).isoformat()
