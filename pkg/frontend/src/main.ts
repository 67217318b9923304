/**
 * Studio entry point: wires the palette/canvas editor, the 3D viewport,
 * run controls with live badges, the zone tool, and the generation dialog
 * against the engine service. The page is a pure client; reloading
 * reconstructs everything from server state.
 */
import { StudioApi } from "./api.js";
import { CanvasView } from "./canvasView.js";
import { EditorStore } from "./editorStore.js";
import { emptyProgram } from "./program.js";
import { GenerateDialog } from "./generateDialog.js";
import { RunController } from "./runControls.js";
import { PoseTimeline, TIMELINE_JOINTS, JointName } from "./timeline.js";
import { Viewport } from "./viewport.js";
import { ZoneTool } from "./zoneTool.js";
import type { SceneJson } from "./types.js";

const SERVICE_URL = (window as { CAPY_SERVICE_URL?: string }).CAPY_SERVICE_URL
  ?? "http://127.0.0.1:8734";

const DEFAULT_SCENE: SceneJson = {
  planes: [
    { id: "ground", origin: [0, 0, 0], normal: [0, 1, 0], extents: [2.5, 2.5] },
  ],
  objects: [
    {
      class: "banana",
      position: [1.0, 0.05, 0],
      yaw_deg: 0,
      half_extents: [0.12, 0.05, 0.12],
    },
  ],
  zones: [],
  camera: {
    position: [0.5, 3.0, 0],
    look_at: [0.5, 0, 0],
    fov_deg: 60,
    resolution: [1000, 1000],
  },
  spawn: { position: [0, 0.15, 0], yaw_deg: 0 },
};

function el<T extends HTMLElement>(id: string): T {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing #${id}`);
  return element as T;
}

async function boot(): Promise<void> {
  const api = new StudioApi(SERVICE_URL);

  const { id: programId } = await api.createProgram(emptyProgram());
  const { id: sceneId, scene } = await api.createScene(DEFAULT_SCENE);

  const editor = new EditorStore(api, programId, emptyProgram(), sceneId);
  new CanvasView(el("canvas"), el("palette"), editor);

  const viewport = new Viewport(el<HTMLCanvasElement>("viewport"));
  viewport.setScene(scene);

  const zoneTool = new ZoneTool(api, sceneId, scene, (updated) => {
    viewport.setScene(updated);
    void editor.flush();
    renderZoneList();
  });

  const zoneListEl = el("zone-list");
  function renderZoneList(): void {
    zoneListEl.textContent = "";
    for (const label of zoneTool.labels()) {
      const item = document.createElement("button");
      item.className = "zone-item" + (zoneTool.selected === label ? " selected" : "");
      item.textContent = label;
      item.addEventListener("click", () => {
        zoneTool.select(label);
        renderZoneList();
      });
      zoneListEl.appendChild(item);
    }
  }
  el("zone-create").addEventListener("click", () => {
    void zoneTool.create("ground", [Math.random() * 2 - 1, Math.random() * 2 - 1], [0.2, 0.2]);
  });
  renderZoneList();

  // run session
  let controller: RunController | null = null;
  el("session-start").addEventListener("click", () => {
    void (async () => {
      const session = await api.createSession(programId, sceneId);
      controller = new RunController(
        api,
        session,
        {
          tickCounter: el("tick-counter"),
          statusLabel: el("run-status"),
          badges: el("badges"),
        },
        (state) => viewport.render(state),
      );
      void controller.startStream();
      await controller.setMode("realtime", 20);
    })();
  });
  el("touch-button").addEventListener("click", () => void controller?.touch());
  el("tap-button").addEventListener("click", () => void controller?.tap());
  el("step-button").addEventListener("click", () => void controller?.step(1));
  el("pause-button").addEventListener("click", () => void controller?.setMode("paused"));
  el("play-button").addEventListener("click", () => void controller?.setMode("realtime", 20));

  // generation dialog
  const dialog = new GenerateDialog(api);
  const reasonEl = el("refusal-reason");
  const jobEl = el("generation-status");
  const libraryEl = el("library-panel");
  dialog.subscribe(() => {
    reasonEl.textContent = dialog.phase === "blocked" ? (dialog.refusalReason ?? "") : "";
    jobEl.textContent =
      dialog.phase === "generating"
        ? `generating (${dialog.job?.status ?? "submitting"})`
        : dialog.phase;
    libraryEl.textContent = "";
    for (const asset of dialog.library) {
      const card = document.createElement("div");
      card.className = `asset asset-${asset.kind}`;
      card.textContent = asset.display_name;
      libraryEl.appendChild(card);
    }
  });
  await dialog.refreshLibrary();
  el("generate-button").addEventListener("click", () => {
    const kind = el<HTMLSelectElement>("generate-kind").value as "character" | "accessory";
    const prompt = el<HTMLInputElement>("generate-prompt").value;
    void dialog.submit(kind, prompt);
  });

  // pose timeline
  const timeline = new PoseTimeline("my pose", 20);
  el("timeline-add").addEventListener("click", () => {
    const joint = el<HTMLSelectElement>("timeline-joint").value as JointName;
    const t = Number(el<HTMLInputElement>("timeline-time").value);
    const angle = (Number(el<HTMLInputElement>("timeline-angle").value) * Math.PI) / 180;
    timeline.addKeyframe(joint, { t, axis: [0, 0, 1], angleRad: angle });
    el("timeline-info").textContent =
      `${[...timeline.tracks.values()].reduce((n, track) => n + track.length, 0)} keyframes, ` +
      `${timeline.duration().toFixed(2)}s`;
  });
  el("timeline-save").addEventListener("click", () => {
    void api.saveClip(timeline.toClipJson()).then(() => dialog.refreshLibrary());
  });
  const jointSelect = el<HTMLSelectElement>("timeline-joint");
  for (const joint of TIMELINE_JOINTS) {
    const option = document.createElement("option");
    option.value = joint;
    option.textContent = joint;
    jointSelect.appendChild(option);
  }
}

void boot();
