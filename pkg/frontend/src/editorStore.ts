/**
 * Editing session for one program: applies canvas edits locally, pushes
 * the canonical JSON to the server after every edit, and shows returned
 * diagnostics inline. Edits made while offline queue up and replay in
 * order once the connection returns.
 */
import { ApiError, StudioApi } from "./api.js";
import {
  BlockPath,
  insertBlock,
  moveBlock,
  removeBlock,
  updateBlock,
} from "./program.js";
import type { BlockJson, Diagnostic, ProgramJson } from "./types.js";

export type EditorListener = (editor: EditorStore) => void;

export class EditorStore {
  program: ProgramJson;
  diagnostics: Diagnostic[] = [];
  /** Edits not yet acknowledged by the server. */
  pendingEdits = 0;
  offline = false;
  private listeners: EditorListener[] = [];
  private flushChain: Promise<void> = Promise.resolve();

  constructor(
    private api: StudioApi,
    public programId: string,
    initial: ProgramJson,
    public sceneId?: string,
  ) {
    this.program = initial;
  }

  subscribe(listener: EditorListener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this);
  }

  // --- canvas edit operations -------------------------------------------------

  insert(sequencePath: BlockPath, index: number, block: BlockJson): void {
    this.apply(insertBlock(this.program, sequencePath, index, block));
  }

  move(from: BlockPath, toSequence: BlockPath, toIndex: number): void {
    this.apply(moveBlock(this.program, from, toSequence, toIndex));
  }

  /** Dragging a block off the canvas removes it. */
  remove(path: BlockPath): void {
    this.apply(removeBlock(this.program, path));
  }

  update(path: BlockPath, patch: Partial<BlockJson>): void {
    this.apply(updateBlock(this.program, path, patch));
  }

  private apply(next: ProgramJson): void {
    this.program = next;
    this.pendingEdits += 1;
    this.notify();
    this.flushChain = this.flushChain.then(() => this.push());
  }

  /** Push the latest program; offline failures keep the edit queued. */
  private async push(): Promise<void> {
    if (this.pendingEdits === 0) return;
    const toAck = this.pendingEdits;
    try {
      const result = await this.api.putProgram(this.programId, this.program, this.sceneId);
      this.diagnostics = result.report.diagnostics;
      this.offline = false;
      this.pendingEdits -= toAck;
    } catch (error) {
      if (error instanceof ApiError) {
        // the server rejected the edit: surface its diagnostics inline
        const details = error.body.details as { diagnostics?: Diagnostic[] } | undefined;
        this.diagnostics = details?.diagnostics ?? [
          {
            severity: "error",
            line: 0,
            col: 0,
            code: error.body.code,
            message: error.body.message,
          },
        ];
        this.offline = false;
        this.pendingEdits -= toAck;
      } else {
        // network failure: stay dirty and retry on the next flush
        this.offline = true;
      }
    }
    this.notify();
  }

  /** Replay queued edits (e.g. when connectivity returns). */
  async flush(): Promise<void> {
    await (this.flushChain = this.flushChain.then(() => this.push()));
  }
}
