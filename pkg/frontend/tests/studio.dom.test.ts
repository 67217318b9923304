// @vitest-environment jsdom
/**
 * Browser-environment conformance (jsdom): drives the real run-control
 * rendering over the scripted 200-tick session and the generation dialog
 * DOM wiring, asserting the rendered tick counter and badges match the
 * trace stream exactly and a blocked prompt shows its reason without
 * creating a job.
 */
import { readFileSync } from "node:fs";
import { beforeEach, describe, expect, it } from "vitest";

import { StudioApi } from "../src/api.js";
import { RunController, renderBadges } from "../src/runControls.js";
import { applyTraceRow, initialRunState } from "../src/runStore.js";
import { GenerateDialog } from "../src/generateDialog.js";
import type { SceneSnapshot, SessionState, TraceRow } from "../src/types.js";
import { fakeFetch } from "./helpers.js";

interface Fixture {
  initial: SceneSnapshot;
  traces: TraceRow[];
}

const fixture: Fixture = JSON.parse(
  readFileSync("tests/fixtures/trace200.json", "utf-8"),
);

function sessionState(): SessionState {
  return {
    id: "session-fixture",
    program_id: "prog-1",
    scene_id: "scene-1",
    status: "running",
    tick: 0,
    mode: "paused",
    realtime_rate: 20,
    scene: fixture.initial,
    scene_hash: "",
  };
}

beforeEach(() => {
  document.body.innerHTML = `
    <span id="tick-counter"></span>
    <span id="run-status"></span>
    <div id="badges"></div>
    <div id="refusal-reason"></div>
  `;
});

describe("studio DOM conformance over a scripted 200-tick session", () => {
  it("tick counter and badges track the stream exactly", () => {
    const api = new StudioApi("http://test", fakeFetch([]));
    const controller = new RunController(api, sessionState(), {
      tickCounter: document.getElementById("tick-counter")!,
      statusLabel: document.getElementById("run-status")!,
      badges: document.getElementById("badges")!,
    });

    // initial: tick 0, banana searching, zone A placed
    expect(document.getElementById("tick-counter")!.textContent).toBe("0");
    let texts = [...document.querySelectorAll(".badge")].map((b) => b.textContent);
    expect(texts).toContain("Searching for object");

    const expected = new Map<string, string>();
    for (const [name, det] of Object.entries(fixture.initial.perception.detections)) {
      expected.set(`object:${name}`, det.status);
    }
    for (const [label, touched] of Object.entries(fixture.initial.perception.zone_touches)) {
      expected.set(`zone:${label}`, touched ? "touched" : "placed");
    }

    for (const row of fixture.traces) {
      controller.ingest(row);
      // tick counter equals the latest streamed trace tick, always
      expect(document.getElementById("tick-counter")!.textContent).toBe(String(row.tick));
      // badges equal the independently tracked latest statuses
      for (const effect of row.effects) {
        if (effect.kind === "detection_update") {
          expected.set(`${effect.target_kind}:${effect.target}`, effect.status!);
        }
      }
      const rendered = new Map(
        [...document.querySelectorAll<HTMLElement>(".badge")].map((badge) => [
          `${badge.dataset.kind}:${badge.dataset.target}`,
          badge.className.replace("badge badge-", ""),
        ]),
      );
      expect(rendered).toEqual(expected);
    }
    expect(document.getElementById("tick-counter")!.textContent).toBe("200");

    // the badge progression hit all three object states, with exact strings
    const finalTexts = [...document.querySelectorAll(".badge")].map((b) => b.textContent);
    expect(finalTexts).toContain("Object touched");
  });

  it("badge strings render verbatim at each stage", () => {
    const state = initialRunState(fixture.initial, "running");
    const element = document.getElementById("badges")!;
    renderBadges(element, state);
    const textsFor = () => [...element.children].map((c) => c.textContent);
    expect(textsFor()).toContain("Searching for object");

    // ticks 1..40 take the banana through found (30) and touched (40)
    for (const row of fixture.traces.slice(0, 30)) applyTraceRow(state, row);
    renderBadges(element, state);
    expect(textsFor()).toContain("Object found");

    for (const row of fixture.traces.slice(30, 40)) applyTraceRow(state, row);
    renderBadges(element, state);
    expect(textsFor()).toContain("Object touched");
  });

  it("a blocked prompt shows the refusal reason and creates no job", async () => {
    const log: { method: string; path: string; body: unknown }[] = [];
    const routes = [
      {
        method: "POST",
        path: /^\/moderate$/,
        handler: () => ({
          body: {
            verdict: {
              inappropriateForChildren: true,
              reason: "A weapon is not a safe thing for young kids to play with.",
            },
          },
        }),
      },
    ];
    const api = new StudioApi("http://test", fakeFetch(routes, log));
    const dialog = new GenerateDialog(api, 0, async () => {});
    const reasonEl = document.getElementById("refusal-reason")!;
    dialog.subscribe(() => {
      reasonEl.textContent = dialog.phase === "blocked" ? (dialog.refusalReason ?? "") : "";
    });
    await dialog.submit("accessory", "a toy weapon");
    expect(reasonEl.textContent).toBe(
      "A weapon is not a safe thing for young kids to play with.",
    );
    expect(dialog.job).toBeNull();
    expect(log.filter((entry) => entry.path === "/generate")).toHaveLength(0);
  });
});
