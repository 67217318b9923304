/**
 * The block palette: five fixed categories, each with its signature color.
 */
import type { BlockJson, BlockKind } from "./types.js";

export type CategoryName = "Event" | "Motion" | "Looks" | "Control" | "Sensing";

export interface PaletteEntry {
  /** Block kind, or the event header pseudo-block. */
  id: BlockKind | "when_touched";
  label: string;
  /** Factory for a fresh block with sensible defaults (null for the event). */
  make: (() => BlockJson) | null;
}

export interface PaletteCategory {
  name: CategoryName;
  color: string;
  entries: PaletteEntry[];
}

export const PALETTE: PaletteCategory[] = [
  {
    name: "Event",
    color: "#f2c400", // yellow
    entries: [{ id: "when_touched", label: "when character is touched", make: null }],
  },
  {
    name: "Motion",
    color: "#1a3e8c", // dark blue
    entries: [
      { id: "forward", label: "forward", make: () => ({ kind: "forward", steps: 10 }) },
      { id: "turn", label: "turn", make: () => ({ kind: "turn", degrees: 90 }) },
    ],
  },
  {
    name: "Looks",
    color: "#8a4fc8", // purple
    entries: [
      { id: "start_trail", label: "start trail", make: () => ({ kind: "start_trail" }) },
      { id: "stop_trail", label: "stop trail", make: () => ({ kind: "stop_trail" }) },
      {
        id: "start_wear",
        label: "start wear",
        make: () => ({ kind: "start_wear", accessory: "cowboy hat" }),
      },
      {
        id: "stop_wear",
        label: "stop wear",
        make: () => ({ kind: "stop_wear", accessory: "cowboy hat" }),
      },
      {
        id: "start_animation",
        label: "start animation",
        make: () => ({ kind: "start_animation", clip: "wave" }),
      },
    ],
  },
  {
    name: "Control",
    color: "#e8842c", // orange
    entries: [
      { id: "repeat", label: "repeat", make: () => ({ kind: "repeat", count: 4, children: [] }) },
      { id: "forever", label: "forever", make: () => ({ kind: "forever", children: [] }) },
    ],
  },
  {
    name: "Sensing",
    color: "#5db8e8", // light blue
    entries: [
      {
        id: "if_cond",
        label: "if touches",
        make: () => ({
          kind: "if_cond",
          condition: { kind: "touches_object", target: "banana" },
          children: [],
        }),
      },
    ],
  },
];

export function categoryOf(kind: BlockKind | "when_touched"): PaletteCategory {
  for (const category of PALETTE) {
    if (category.entries.some((entry) => entry.id === kind)) return category;
  }
  throw new Error(`block kind ${kind} is not in the palette`);
}
