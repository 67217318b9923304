/**
 * Zone workflow: create (the server assigns the next letter), select from
 * the lettered list, and place/resize on a plane. Every change goes
 * through the API and the fresh scene JSON comes back for the viewport
 * and for re-validating the open program.
 */
import { StudioApi } from "./api.js";
import type { SceneJson, SceneZoneJson } from "./types.js";

export type ZoneListener = (tool: ZoneTool) => void;

export class ZoneTool {
  scene: SceneJson;
  selected: string | null = null;
  private listeners: ZoneListener[] = [];

  constructor(
    private api: StudioApi,
    public sceneId: string,
    scene: SceneJson,
    /** Called after any scene change so the open program re-validates. */
    private onSceneChanged: (scene: SceneJson) => void = () => {},
  ) {
    this.scene = scene;
  }

  subscribe(listener: ZoneListener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this);
  }

  get zones(): SceneZoneJson[] {
    return this.scene.zones;
  }

  labels(): string[] {
    return this.scene.zones.map((zone) => zone.label);
  }

  async create(
    plane: string,
    center: [number, number],
    halfExtents: [number, number],
  ): Promise<string> {
    const result = await this.api.createZone(this.sceneId, plane, center, halfExtents);
    this.scene = result.scene;
    this.selected = result.zone.label;
    this.onSceneChanged(this.scene);
    this.notify();
    return result.zone.label;
  }

  select(label: string): void {
    if (!this.labels().includes(label)) {
      throw new Error(`zone ${label} does not exist`);
    }
    this.selected = label;
    this.notify();
  }

  async place(
    center: [number, number, number],
    halfExtents?: [number, number],
  ): Promise<void> {
    if (this.selected === null) throw new Error("select a zone first");
    const result = await this.api.placeZone(this.sceneId, this.selected, center, halfExtents);
    this.scene = result.scene;
    this.onSceneChanged(this.scene);
    this.notify();
  }
}
