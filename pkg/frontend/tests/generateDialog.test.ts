import { describe, expect, it } from "vitest";

import { StudioApi } from "../src/api.js";
import { GenerateDialog } from "../src/generateDialog.js";
import { fakeFetch } from "./helpers.js";

const REASON = "A weapon is not a safe thing for young kids to play with.";

function gatewayRoutes(log: { method: string; path: string; body: unknown }[]) {
  let polls = 0;
  return {
    log,
    routes: [
      {
        method: "POST",
        path: /^\/moderate$/,
        handler: (body: any) => {
          if (String(body.text).includes("weapon")) {
            return {
              body: { verdict: { inappropriateForChildren: true, reason: REASON } },
            };
          }
          return {
            body: {
              verdict: { inappropriateForChildren: false, reason: "" },
              token: "tok-1",
            },
          };
        },
      },
      {
        method: "POST",
        path: /^\/generate$/,
        handler: (body: any) => {
          if (body.moderation_token !== "tok-1") {
            return {
              status: 403,
              body: { code: "moderation_required", message: "token required" },
            };
          }
          return {
            status: 202,
            body: {
              job: {
                id: "gen-0001", kind: body.kind, user_text: body.prompt,
                prompt: body.prompt, status: "pending", asset_uri: null,
                asset_id: null, created_at: "", error: null,
              },
            },
          };
        },
      },
      {
        method: "GET",
        path: /^\/generate\/gen-0001$/,
        handler: () => {
          polls += 1;
          const done = polls >= 2;
          return {
            body: {
              job: {
                id: "gen-0001", kind: "accessory", user_text: "a hat",
                prompt: "a hat", status: done ? "succeeded" : "pending",
                asset_uri: done ? "store/x.obj" : null,
                asset_id: done ? "accessory-0009" : null,
                created_at: "", error: null,
              },
            },
          };
        },
      },
      {
        method: "GET",
        path: /^\/library/,
        handler: () => ({
          body: {
            assets: [
              {
                id: "character-0001", kind: "character", display_name: "capybara",
                origin_prompt: "", file_path: "", created_at: "",
              },
            ],
          },
        }),
      },
    ],
  };
}

describe("generate dialog", () => {
  it("a blocked prompt shows the verdict reason and creates no job", async () => {
    const log: { method: string; path: string; body: unknown }[] = [];
    const { routes } = gatewayRoutes(log);
    const api = new StudioApi("http://test", fakeFetch(routes, log));
    const dialog = new GenerateDialog(api, 0, async () => {});
    await dialog.submit("accessory", "a toy weapon");
    expect(dialog.phase).toBe("blocked");
    expect(dialog.refusalReason).toBe(REASON);
    expect(dialog.job).toBeNull();
    expect(log.some((entry) => entry.path === "/generate")).toBe(false);
  });

  it("an approved prompt submits and polls the job to success", async () => {
    const log: { method: string; path: string; body: unknown }[] = [];
    const { routes } = gatewayRoutes(log);
    const api = new StudioApi("http://test", fakeFetch(routes, log));
    const phases: string[] = [];
    const dialog = new GenerateDialog(api, 0, async () => {});
    dialog.subscribe(() => phases.push(dialog.phase));
    await dialog.submit("accessory", "a hat");
    expect(dialog.phase).toBe("succeeded");
    expect(dialog.job?.asset_id).toBe("accessory-0009");
    expect(phases).toContain("moderating");
    expect(phases).toContain("generating");
    // the library panel refreshes after success (default capybara included)
    expect(dialog.library.map((a) => a.display_name)).toContain("capybara");
  });

  it("library panel lists the default capybara on first load", async () => {
    const { routes } = gatewayRoutes([]);
    const api = new StudioApi("http://test", fakeFetch(routes));
    const dialog = new GenerateDialog(api);
    await dialog.refreshLibrary();
    expect(dialog.library.map((a) => a.display_name)).toContain("capybara");
  });
});
