/**
 * The block canvas: renders the program tree as nested block elements and
 * wires HTML5 drag-and-drop for palette drops, block moves, nesting into
 * container mouths, and delete-by-dragging-off-the-canvas.
 */
import { EditorStore } from "./editorStore.js";
import { categoryOf, PALETTE } from "./palette.js";
import type { BlockPath } from "./program.js";
import { isContainer } from "./program.js";
import type { BlockJson } from "./types.js";

interface DragPayload {
  source: "palette" | "canvas";
  paletteId?: string;
  fromPath?: BlockPath;
}

function encodePayload(payload: DragPayload): string {
  return JSON.stringify(payload);
}

function decodePayload(raw: string | undefined): DragPayload | null {
  if (!raw) return null;
  try {
    return JSON.parse(raw) as DragPayload;
  } catch {
    return null;
  }
}

function blockLabel(block: BlockJson): string {
  switch (block.kind) {
    case "forward":
      return `forward ${block.steps}`;
    case "turn":
      return `turn ${block.degrees}`;
    case "start_trail":
      return "start trail";
    case "stop_trail":
      return "stop trail";
    case "start_wear":
      return `start wear "${block.accessory}"`;
    case "stop_wear":
      return `stop wear "${block.accessory}"`;
    case "start_animation":
      return `start animation "${block.clip}"`;
    case "repeat":
      return `repeat ${block.count}`;
    case "forever":
      return "forever";
    case "if_cond":
      return `if touches ${block.condition?.kind === "touches_zone" ? "zone" : "object"} "${block.condition?.target}"`;
  }
}

export class CanvasView {
  constructor(
    private root: HTMLElement,
    private paletteRoot: HTMLElement,
    private editor: EditorStore,
  ) {
    editor.subscribe(() => this.render());
    this.renderPalette();
    this.render();
    // dropping outside any canvas target deletes canvas blocks
    document.body.addEventListener("dragover", (event) => event.preventDefault());
    document.body.addEventListener("drop", (event) => {
      const payload = decodePayload(event.dataTransfer?.getData("text/plain"));
      if (!payload) return;
      const target = event.target as HTMLElement;
      if (payload.source === "canvas" && payload.fromPath && !this.root.contains(target)) {
        event.preventDefault();
        this.editor.remove(payload.fromPath);
      }
    });
  }

  private renderPalette(): void {
    this.paletteRoot.textContent = "";
    for (const category of PALETTE) {
      const section = document.createElement("div");
      section.className = "palette-category";
      const heading = document.createElement("h3");
      heading.textContent = category.name;
      heading.style.color = category.color;
      section.appendChild(heading);
      for (const entry of category.entries) {
        const chip = document.createElement("div");
        chip.className = "palette-block";
        chip.textContent = entry.label;
        chip.style.background = category.color;
        if (entry.make) {
          chip.draggable = true;
          chip.addEventListener("dragstart", (event) => {
            event.dataTransfer?.setData(
              "text/plain",
              encodePayload({ source: "palette", paletteId: entry.id }),
            );
          });
        }
        section.appendChild(chip);
      }
      this.paletteRoot.appendChild(section);
    }
  }

  render(): void {
    this.root.textContent = "";
    this.editor.program.scripts.forEach((script, scriptIndex) => {
      const scriptEl = document.createElement("div");
      scriptEl.className = "script";
      const header = document.createElement("div");
      header.className = "block event-block";
      header.textContent = "when character is touched";
      header.style.background = categoryOf("when_touched").color;
      scriptEl.appendChild(header);
      scriptEl.appendChild(this.renderSequence(script.body, [scriptIndex]));
      this.root.appendChild(scriptEl);
    });
    const diagnostics = document.createElement("ul");
    diagnostics.id = "diagnostics";
    for (const diagnostic of this.editor.diagnostics) {
      const item = document.createElement("li");
      item.className = `diagnostic ${diagnostic.severity}`;
      item.textContent = `${diagnostic.code}: ${diagnostic.message}`;
      diagnostics.appendChild(item);
    }
    this.root.appendChild(diagnostics);
    if (this.editor.offline) {
      const note = document.createElement("div");
      note.id = "offline-note";
      note.textContent = `offline: ${this.editor.pendingEdits} edits queued`;
      this.root.appendChild(note);
    }
  }

  private renderSequence(blocks: BlockJson[], sequencePath: BlockPath): HTMLElement {
    const list = document.createElement("div");
    list.className = "sequence";
    const addDropSlot = (index: number) => {
      const slot = document.createElement("div");
      slot.className = "drop-slot";
      slot.addEventListener("dragover", (event) => event.preventDefault());
      slot.addEventListener("drop", (event) => {
        event.preventDefault();
        event.stopPropagation();
        this.handleDrop(event, sequencePath, index);
      });
      list.appendChild(slot);
    };
    addDropSlot(0);
    blocks.forEach((block, index) => {
      list.appendChild(this.renderBlock(block, [...sequencePath, index]));
      addDropSlot(index + 1);
    });
    return list;
  }

  private renderBlock(block: BlockJson, path: BlockPath): HTMLElement {
    const el = document.createElement("div");
    el.className = `block kind-${block.kind}`;
    el.draggable = true;
    el.style.background = categoryOf(block.kind).color;
    const label = document.createElement("span");
    label.textContent = blockLabel(block);
    el.appendChild(label);
    el.addEventListener("dragstart", (event) => {
      event.stopPropagation();
      event.dataTransfer?.setData(
        "text/plain",
        encodePayload({ source: "canvas", fromPath: path }),
      );
    });
    if (isContainer(block)) {
      el.appendChild(this.renderSequence(block.children ?? [], path));
    }
    return el;
  }

  private handleDrop(event: DragEvent, sequencePath: BlockPath, index: number): void {
    const payload = decodePayload(event.dataTransfer?.getData("text/plain"));
    if (!payload) return;
    if (payload.source === "palette" && payload.paletteId) {
      for (const category of PALETTE) {
        for (const entry of category.entries) {
          if (entry.id === payload.paletteId && entry.make) {
            this.editor.insert(sequencePath, index, entry.make());
            return;
          }
        }
      }
    }
    if (payload.source === "canvas" && payload.fromPath) {
      try {
        this.editor.move(payload.fromPath, sequencePath, index);
      } catch {
        // dropping a container into itself is refused, keep the tree as-is
      }
    }
  }
}
