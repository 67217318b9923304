/**
 * Generation dialog state machine: prompt entry, moderation, a friendly
 * refusal showing the verdict's reason, then job submission and polling.
 * A blocked prompt never creates a job.
 */
import { StudioApi } from "./api.js";
import type { AssetRecordJson, GenerationJobJson } from "./types.js";

export type DialogPhase =
  | "idle"
  | "moderating"
  | "blocked"
  | "generating"
  | "succeeded"
  | "failed";

export type DialogListener = (dialog: GenerateDialog) => void;

export class GenerateDialog {
  phase: DialogPhase = "idle";
  /** Child-readable refusal from the moderation verdict. */
  refusalReason: string | null = null;
  job: GenerationJobJson | null = null;
  library: AssetRecordJson[] = [];
  private listeners: DialogListener[] = [];

  constructor(
    private api: StudioApi,
    private pollIntervalMs = 500,
    private sleep: (ms: number) => Promise<void> = (ms) =>
      new Promise((resolve) => setTimeout(resolve, ms)),
  ) {}

  subscribe(listener: DialogListener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this);
  }

  async refreshLibrary(kind?: "character" | "accessory" | "clip"): Promise<void> {
    this.library = (await this.api.library(kind)).assets;
    this.notify();
  }

  /** Moderate, then submit only on an explicit pass; poll to completion. */
  async submit(kind: "character" | "accessory", prompt: string): Promise<void> {
    this.phase = "moderating";
    this.refusalReason = null;
    this.job = null;
    this.notify();

    const moderation = await this.api.moderate(prompt);
    if (moderation.verdict.inappropriateForChildren || !moderation.token) {
      this.phase = "blocked";
      this.refusalReason = moderation.verdict.reason || "That prompt is not allowed.";
      this.notify();
      return;
    }

    this.phase = "generating";
    this.notify();
    const submitted = await this.api.generate(kind, prompt, moderation.token);
    this.job = submitted.job;
    this.notify();

    while (this.job.status === "pending") {
      await this.sleep(this.pollIntervalMs);
      this.job = (await this.api.pollGeneration(this.job.id)).job;
      this.notify();
    }
    this.phase = this.job.status === "succeeded" ? "succeeded" : "failed";
    if (this.phase === "succeeded") {
      await this.refreshLibrary();
    }
    this.notify();
  }
}
