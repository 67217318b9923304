"""The gateway: moderation gate, generation jobs, and the asset library.

API shape enforces the safety contract: submitting a generation requires a
moderation token bound to the exact prompt text, so no generation is
reachable without an explicit pass verdict. Job state is persisted under
the store root and only ever moves forward (pending to succeeded or
failed); a provider result only counts as succeeded once its mesh has
downloaded and passed the closed/connected check.
"""
from __future__ import annotations

import io
import json
import os
import threading
import time
from pathlib import Path
from typing import Callable

from ..rigging.mesh import TriMesh, load_obj, preprocess_mesh
from .generation import (
    FAILED,
    PENDING,
    SUCCEEDED,
    ComposedPrompt,
    Gen3DProvider,
    GenerationJob,
    HttpGen3DProvider,
    InvalidMesh,
    JobNotFound,
    MockGen3DProvider,
    compose_generation_prompt,
    utc_timestamp,
)
from .library import AssetLibrary
from .moderation import (
    HttpModerationProvider,
    MockModerationProvider,
    ModerationOutcome,
    ModerationProvider,
    TokenIssuer,
    moderate_prompt,
)

RETRY_PROMPT_MESSAGE = "the generated mesh was not riggable; try a different prompt"


class ModerationRequired(PermissionError):
    """Submission without a valid moderation token for the exact text."""


class Gateway:
    def __init__(
        self,
        root: str | Path,
        moderation_provider: ModerationProvider | None = None,
        gen3d_provider: Gen3DProvider | None = None,
        clock: Callable[[], float] = time.time,
        token_secret: bytes | None = None,
    ):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.clock = clock
        self.moderation_provider = moderation_provider or MockModerationProvider()
        self.gen3d_provider = gen3d_provider or MockGen3DProvider(clock=clock)
        self.issuer = TokenIssuer(secret=token_secret, clock=clock)
        self.library = AssetLibrary(self.root, clock=clock)
        self._jobs_path = self.root / "jobs.json"
        self._jobs: dict[str, GenerationJob] = {}
        self._lock = threading.RLock()
        self._load_jobs()

    # --- persistence -----------------------------------------------------------

    def _load_jobs(self) -> None:
        if not self._jobs_path.exists():
            return
        doc = json.loads(self._jobs_path.read_text(encoding="utf-8"))
        for obj in doc.get("jobs", []):
            job = GenerationJob.from_obj(obj)
            self._jobs[job.id] = job

    def _save_jobs(self) -> None:
        doc = {"jobs": [job.to_obj() for job in self._jobs.values()]}
        self._jobs_path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    # --- moderation --------------------------------------------------------------

    def moderate(self, text: str) -> ModerationOutcome:
        return moderate_prompt(text, self.moderation_provider, self.issuer)

    # --- generation ----------------------------------------------------------------

    def submit_generation(self, user_text: str, kind: str, token: str) -> GenerationJob:
        """Start a generation job for moderated text.

        The token must have been issued for exactly `user_text` and not be
        expired; otherwise ModerationRequired.
        """
        if not self.issuer.verify(token, user_text):
            raise ModerationRequired(
                "generation requires a valid moderation token for this exact text"
            )
        composed: ComposedPrompt = compose_generation_prompt(user_text, kind)
        with self._lock:
            job_id = f"gen-{len(self._jobs) + 1:04d}"
            provider_job_id = self.gen3d_provider.submit(composed.text, kind)
            job = GenerationJob(
                id=job_id,
                kind=kind,
                user_text=user_text,
                prompt=composed.text,
                status=PENDING,
                created_at=utc_timestamp(self.clock),
                provider_job_id=provider_job_id,
            )
            self._jobs[job_id] = job
            self._save_jobs()
        return job

    def poll_job(self, job_id: str) -> GenerationJob:
        """Advance and return a job; idempotent once terminal."""
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                raise JobNotFound(job_id)
            if job.status != PENDING:
                return job
            status, detail = self.gen3d_provider.status(job.provider_job_id)
            if status == PENDING:
                return job
            if status == FAILED:
                job.status = FAILED
                job.error = detail or "provider reported failure"
                self._save_jobs()
                return job
            # provider finished: download, validate, store
            try:
                payload = self.gen3d_provider.download(job.provider_job_id)
                mesh = _parse_obj_bytes(payload)
                report = preprocess_mesh(mesh)
                if not report.ok:
                    raise InvalidMesh(f"{RETRY_PROMPT_MESSAGE} ({report.summary()})")
            except InvalidMesh as exc:
                job.status = FAILED
                job.error = str(exc)
                self._save_jobs()
                return job
            except Exception as exc:
                job.status = FAILED
                job.error = f"download failed: {exc}"
                self._save_jobs()
                return job
            record = self.library.add(
                job.kind,
                display_name=_display_name(job.user_text),
                payload=payload,
                extension=".obj",
                origin_prompt=job.user_text,
            )
            job.asset_id = record.id
            job.asset_uri = str(self.library.path_of(record.id))
            job.status = SUCCEEDED
            self._save_jobs()
            return job

    def fetch_asset(self, job_id: str) -> TriMesh:
        """Mesh of a succeeded job; raises InvalidMesh for unriggable output."""
        job = self.poll_job(job_id)
        if job.status == FAILED:
            if job.error and RETRY_PROMPT_MESSAGE in job.error:
                raise InvalidMesh(job.error)
            raise JobNotFound(f"job {job_id} failed: {job.error}")
        if job.status != SUCCEEDED:
            raise JobNotFound(f"job {job_id} still pending")
        return load_obj(self.library.path_of(job.asset_id))

    def jobs(self) -> list[GenerationJob]:
        with self._lock:
            return sorted(self._jobs.values(), key=lambda j: j.id)


def _parse_obj_bytes(payload: bytes) -> TriMesh:
    import tempfile

    with tempfile.NamedTemporaryFile(suffix=".obj", delete=False) as fh:
        fh.write(payload)
        path = fh.name
    try:
        return load_obj(path)
    finally:
        os.unlink(path)


def _display_name(user_text: str, limit: int = 40) -> str:
    cleaned = " ".join(user_text.split())
    return cleaned[:limit] if cleaned else "untitled"


def gateway_from_env(root: str | Path, clock: Callable[[], float] = time.time) -> Gateway:
    """Build a gateway from GATEWAY_PROVIDER / *_ENDPOINT environment."""
    provider = os.environ.get("GATEWAY_PROVIDER", "mock")
    if provider == "live":
        moderation = HttpModerationProvider(
            os.environ["MODERATION_ENDPOINT"],
            api_key=os.environ.get("MODERATION_API_KEY"),
        )
        gen3d = HttpGen3DProvider(
            os.environ["GEN3D_ENDPOINT"],
            api_key=os.environ.get("GEN3D_API_KEY"),
        )
    elif provider == "mock":
        moderation = MockModerationProvider()
        gen3d = MockGen3DProvider(clock=clock)
    else:
        raise ValueError(f"GATEWAY_PROVIDER must be 'mock' or 'live', got {provider!r}")
    secret_env = os.environ.get("GATEWAY_TOKEN_SECRET")
    secret = secret_env.encode("utf-8") if secret_env else None
    return Gateway(
        root,
        moderation_provider=moderation,
        gen3d_provider=gen3d,
        clock=clock,
        token_secret=secret,
    )
