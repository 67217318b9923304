/**
 * Run controls and live readouts: touch/tap triggers, pause/step/realtime
 * modes, the tick counter, and the detection status badges. The rendered
 * tick counter always equals the latest streamed trace tick.
 */
import { StudioApi, parseSseBlock } from "./api.js";
import { applyTraceRow, badgeList, initialRunState, RunState } from "./runStore.js";
import type { SessionState, TraceRow } from "./types.js";

export interface RunControlElements {
  tickCounter: HTMLElement;
  statusLabel: HTMLElement;
  badges: HTMLElement;
}

export function renderTick(element: HTMLElement, state: RunState): void {
  element.textContent = String(state.tick);
}

export function renderStatus(element: HTMLElement, state: RunState): void {
  element.textContent = state.status;
}

export function renderBadges(element: HTMLElement, state: RunState): void {
  element.textContent = "";
  for (const badge of badgeList(state)) {
    const chip = document.createElement("span");
    chip.className = `badge badge-${badge.status}`;
    chip.dataset.target = badge.target;
    chip.dataset.kind = badge.targetKind;
    chip.textContent = badge.text;
    element.appendChild(chip);
  }
}

export class RunController {
  state: RunState;
  private stopStream: (() => void) | null = null;

  constructor(
    private api: StudioApi,
    private session: SessionState,
    private elements: RunControlElements,
    private onState: (state: RunState) => void = () => {},
  ) {
    this.state = initialRunState(session.scene, session.status);
    this.renderAll();
  }

  private renderAll(): void {
    renderTick(this.elements.tickCounter, this.state);
    renderStatus(this.elements.statusLabel, this.state);
    renderBadges(this.elements.badges, this.state);
    this.onState(this.state);
  }

  /** Fold a streamed row into the UI (also the test entry point). */
  ingest(row: TraceRow): void {
    applyTraceRow(this.state, row);
    this.renderAll();
  }

  async touch(): Promise<void> {
    await this.api.sendEvent(this.session.id, "touch_character", crypto.randomUUID());
    this.state.status = "running";
    this.renderAll();
  }

  async tap(): Promise<void> {
    await this.api.sendEvent(this.session.id, "tap_character", crypto.randomUUID());
  }

  async step(ticks = 1): Promise<void> {
    await this.api.runTicks(this.session.id, ticks);
  }

  async setMode(mode: "paused" | "stepping" | "realtime", rate?: number): Promise<void> {
    await this.api.setMode(this.session.id, mode, rate);
  }

  /** Consume the SSE stream over fetch; resumes from the last seen tick. */
  async startStream(): Promise<void> {
    const controller = new AbortController();
    this.stopStream = () => controller.abort();
    const response = await fetch(this.api.streamUrl(this.session.id), {
      signal: controller.signal,
      headers: this.state.tick > 0 ? { "Last-Event-Id": String(this.state.tick) } : {},
    });
    if (!response.body) return;
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { value, done } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let boundary = buffer.indexOf("\n\n");
      while (boundary >= 0) {
        const block = buffer.slice(0, boundary);
        buffer = buffer.slice(boundary + 2);
        const row = parseSseBlock(block);
        if (row) this.ingest(row);
        boundary = buffer.indexOf("\n\n");
      }
    }
  }

  disconnect(): void {
    this.stopStream?.();
    this.stopStream = null;
  }
}
