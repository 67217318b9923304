import { describe, expect, it } from "vitest";

import { categoryOf, PALETTE } from "../src/palette.js";

describe("palette", () => {
  it("has exactly the five categories with their colors", () => {
    expect(PALETTE.map((c) => c.name)).toEqual([
      "Event",
      "Motion",
      "Looks",
      "Control",
      "Sensing",
    ]);
    const colors = Object.fromEntries(PALETTE.map((c) => [c.name, c.color]));
    expect(colors.Event).toBe("#f2c400"); // yellow
    expect(colors.Motion).toBe("#1a3e8c"); // dark blue
    expect(colors.Looks).toBe("#8a4fc8"); // purple
    expect(colors.Control).toBe("#e8842c"); // orange
    expect(colors.Sensing).toBe("#5db8e8"); // light blue
  });

  it("category membership matches the block set exactly", () => {
    const membership = Object.fromEntries(
      PALETTE.map((c) => [c.name, c.entries.map((e) => e.id).sort()]),
    );
    expect(membership).toEqual({
      Event: ["when_touched"],
      Motion: ["forward", "turn"],
      Looks: ["start_animation", "start_trail", "start_wear", "stop_trail", "stop_wear"],
      Control: ["forever", "repeat"],
      Sensing: ["if_cond"],
    });
  });

  it("every non-event entry builds a fresh block of its own kind", () => {
    for (const category of PALETTE) {
      for (const entry of category.entries) {
        if (!entry.make) continue;
        const block = entry.make();
        expect(block.kind).toBe(entry.id);
        expect(categoryOf(block.kind).name).toBe(category.name);
      }
    }
  });
});
