/**
 * Program model for the canvas: an addressable block tree with the edit
 * operations the editor needs (insert, nest, move, update params, delete).
 * Every mutation returns a new canonical program object; a path addresses
 * a block as [scriptIndex, childIndex, childIndex, ...].
 */
import type { BlockJson, ProgramJson, ScriptJson } from "./types.js";

export type BlockPath = number[];

const CONTAINER_KINDS = new Set(["repeat", "forever", "if_cond"]);

export function emptyProgram(): ProgramJson {
  return { version: 1, metadata: {}, scripts: [{ event: "when_touched", body: [] }] };
}

export function cloneProgram(program: ProgramJson): ProgramJson {
  return JSON.parse(JSON.stringify(program)) as ProgramJson;
}

export function isContainer(block: BlockJson): boolean {
  return CONTAINER_KINDS.has(block.kind);
}

function sequenceAt(program: ProgramJson, path: BlockPath): BlockJson[] {
  const [scriptIndex, ...rest] = path;
  const script: ScriptJson | undefined = program.scripts[scriptIndex];
  if (!script) throw new Error(`no script at index ${scriptIndex}`);
  let sequence = script.body;
  for (const index of rest) {
    const block = sequence[index];
    if (!block) throw new Error(`no block at ${path.join("/")}`);
    if (!isContainer(block)) throw new Error(`${block.kind} has no children`);
    sequence = block.children ?? (block.children = []);
  }
  return sequence;
}

export function blockAt(program: ProgramJson, path: BlockPath): BlockJson {
  if (path.length < 2) throw new Error("a block path needs script and child indices");
  const sequence = sequenceAt(program, path.slice(0, -1));
  const block = sequence[path[path.length - 1]];
  if (!block) throw new Error(`no block at ${path.join("/")}`);
  return block;
}

/** Insert a block into the sequence addressed by `sequencePath` at `index`. */
export function insertBlock(
  program: ProgramJson,
  sequencePath: BlockPath,
  index: number,
  block: BlockJson,
): ProgramJson {
  const next = cloneProgram(program);
  const sequence = sequenceAt(next, sequencePath);
  const clamped = Math.max(0, Math.min(index, sequence.length));
  sequence.splice(clamped, 0, block);
  return next;
}

/** Remove the block at `path` (dragging it off the canvas deletes it). */
export function removeBlock(program: ProgramJson, path: BlockPath): ProgramJson {
  const next = cloneProgram(program);
  const sequence = sequenceAt(next, path.slice(0, -1));
  const index = path[path.length - 1];
  if (index < 0 || index >= sequence.length) throw new Error(`no block at ${path.join("/")}`);
  sequence.splice(index, 1);
  return next;
}

/** Move a block from one position to another (drag and drop). */
export function moveBlock(
  program: ProgramJson,
  from: BlockPath,
  toSequence: BlockPath,
  toIndex: number,
): ProgramJson {
  if (isPrefix(from, toSequence)) {
    throw new Error("cannot drop a block inside itself");
  }
  const block = blockAt(program, from);
  const removed = removeBlock(program, from);
  // removing earlier in the same sequence shifts the target index left
  const sameSequence =
    from.length - 1 === toSequence.length &&
    isPrefix(from.slice(0, -1), toSequence) &&
    toSequence.length === from.length - 1;
  let index = toIndex;
  if (sameSequence && from[from.length - 1] < toIndex) index -= 1;
  return insertBlock(removed, toSequence, index, JSON.parse(JSON.stringify(block)));
}

function isPrefix(prefix: BlockPath, path: BlockPath): boolean {
  return prefix.length <= path.length && prefix.every((v, i) => path[i] === v);
}

/** Update a block's parameters in place (slider / dropdown edits). */
export function updateBlock(
  program: ProgramJson,
  path: BlockPath,
  patch: Partial<BlockJson>,
): ProgramJson {
  const next = cloneProgram(program);
  const block = blockAt(next, path);
  Object.assign(block, patch);
  return next;
}

export interface ParamLimits {
  steps: [number, number];
  degrees: [number, number];
  count: [number, number];
}

export const PARAM_LIMITS: ParamLimits = {
  steps: [0, 1000],
  degrees: [-360, 360],
  count: [0, 100],
};

/** Structural problems a program has before it ever reaches the server. */
export function localDiagnostics(program: ProgramJson): string[] {
  const problems: string[] = [];
  const visit = (block: BlockJson, where: string) => {
    if (block.kind === "forward") {
      const [lo, hi] = PARAM_LIMITS.steps;
      if (block.steps == null || block.steps < lo || block.steps > hi) {
        problems.push(`${where}: steps must be ${lo}..${hi}`);
      }
    }
    if (block.kind === "turn") {
      const [lo, hi] = PARAM_LIMITS.degrees;
      if (block.degrees == null || block.degrees < lo || block.degrees > hi) {
        problems.push(`${where}: degrees must be ${lo}..${hi}`);
      }
    }
    if (block.kind === "repeat") {
      const [lo, hi] = PARAM_LIMITS.count;
      if (block.count == null || block.count < lo || block.count > hi) {
        problems.push(`${where}: count must be ${lo}..${hi}`);
      }
    }
    if (block.kind === "if_cond" && !block.condition?.target) {
      problems.push(`${where}: the if block needs a condition target`);
    }
    if ((block.kind === "start_wear" || block.kind === "stop_wear") && !block.accessory) {
      problems.push(`${where}: wear blocks need an accessory`);
    }
    if (block.kind === "start_animation" && !block.clip) {
      problems.push(`${where}: start animation needs a clip`);
    }
    (block.children ?? []).forEach((child, i) => visit(child, `${where}/${i}`));
  };
  program.scripts.forEach((script, s) => script.body.forEach((b, i) => visit(b, `${s}/${i}`)));
  return problems;
}
