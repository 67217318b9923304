import { describe, expect, it } from "vitest";

import { StudioApi } from "../src/api.js";
import { EditorStore } from "../src/editorStore.js";
import { emptyProgram } from "../src/program.js";
import type { ProgramJson } from "../src/types.js";
import { fakeFetch } from "./helpers.js";

function editorServer() {
  const puts: ProgramJson[] = [];
  const routes = [
    {
      method: "PUT",
      path: /^\/programs\/prog-1$/,
      handler: (body: any) => {
        puts.push(body.program);
        const hasUnknownZone = JSON.stringify(body.program).includes('"Q"');
        if (hasUnknownZone) {
          return {
            status: 422,
            body: {
              code: "validation_failed",
              message: "program failed validation",
              details: {
                ok: false,
                diagnostics: [
                  {
                    severity: "error", line: 1, col: 1,
                    code: "E_UNKNOWN_ZONE", message: "zone 'Q' is not in the scene",
                  },
                ],
              },
            },
          };
        }
        return { body: { id: "prog-1", report: { ok: true, diagnostics: [] } } };
      },
    },
  ];
  return { puts, routes };
}

describe("editor store", () => {
  it("posts canonical JSON after every edit", async () => {
    const { puts, routes } = editorServer();
    const api = new StudioApi("http://test", fakeFetch(routes));
    const editor = new EditorStore(api, "prog-1", emptyProgram());
    editor.insert([0], 0, { kind: "forward", steps: 10 });
    editor.insert([0], 1, { kind: "turn", degrees: 90 });
    await editor.flush();
    expect(puts.length).toBeGreaterThanOrEqual(1);
    const last = puts[puts.length - 1];
    expect(last.version).toBe(1);
    expect(last.scripts[0].body.map((b) => b.kind)).toEqual(["forward", "turn"]);
    expect(editor.pendingEdits).toBe(0);
    expect(editor.diagnostics).toEqual([]);
  });

  it("renders returned diagnostics inline on validation failure", async () => {
    const { routes } = editorServer();
    const api = new StudioApi("http://test", fakeFetch(routes));
    const editor = new EditorStore(api, "prog-1", emptyProgram());
    editor.insert([0], 0, {
      kind: "if_cond",
      condition: { kind: "touches_zone", target: "Q" },
      children: [],
    });
    await editor.flush();
    expect(editor.diagnostics).toHaveLength(1);
    expect(editor.diagnostics[0].code).toBe("E_UNKNOWN_ZONE");
  });

  it("queues offline edits and replays them when back online", async () => {
    const { puts, routes } = editorServer();
    let online = false;
    const realFetch = fakeFetch(routes);
    const flaky = async (input: string, init?: RequestInit) => {
      if (!online) throw new TypeError("fetch failed");
      return realFetch(input, init);
    };
    const api = new StudioApi("http://test", flaky);
    const editor = new EditorStore(api, "prog-1", emptyProgram());
    editor.insert([0], 0, { kind: "forward", steps: 10 });
    editor.insert([0], 1, { kind: "forward", steps: 20 });
    await editor.flush();
    expect(editor.offline).toBe(true);
    expect(editor.pendingEdits).toBe(2);
    expect(puts).toHaveLength(0);

    online = true;
    await editor.flush();
    expect(editor.offline).toBe(false);
    expect(editor.pendingEdits).toBe(0);
    const last = puts[puts.length - 1];
    expect(last.scripts[0].body.map((b) => b.steps)).toEqual([10, 20]);
  });
});
