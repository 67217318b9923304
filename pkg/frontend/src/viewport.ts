/**
 * Three.js viewport rendering the simulated scene: ground, zones,
 * detectable objects, the character with its facing marker, and the paint
 * trail. Purely a projection of RunState + scene JSON; no simulation here.
 */
import * as THREE from "three";

import type { RunState } from "./runStore.js";
import type { SceneJson } from "./types.js";

const MM = 0.001;

export class Viewport {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private character: THREE.Mesh;
  private facing: THREE.ArrowHelper;
  private trailLine: THREE.Line;
  private trailGeometry = new THREE.BufferGeometry();
  private zoneGroup = new THREE.Group();
  private objectGroup = new THREE.Group();

  constructor(canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setSize(canvas.clientWidth || 800, canvas.clientHeight || 500, false);
    this.camera = new THREE.PerspectiveCamera(55, 8 / 5, 0.01, 100);
    this.camera.position.set(0, 2.6, 3.2);
    this.camera.lookAt(0, 0, 0);

    this.scene.background = new THREE.Color(0xf4f1ea);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.7));
    const sun = new THREE.DirectionalLight(0xffffff, 1.0);
    sun.position.set(2, 4, 3);
    this.scene.add(sun);

    this.character = new THREE.Mesh(
      new THREE.BoxGeometry(0.3, 0.3, 0.3),
      new THREE.MeshStandardMaterial({ color: 0x8a5a2b }),
    );
    this.scene.add(this.character);
    this.facing = new THREE.ArrowHelper(
      new THREE.Vector3(1, 0, 0),
      new THREE.Vector3(),
      0.3,
      0xd33,
    );
    this.scene.add(this.facing);

    this.trailLine = new THREE.Line(
      this.trailGeometry,
      new THREE.LineBasicMaterial({ color: 0xf2c400 }),
    );
    this.scene.add(this.trailLine);
    this.scene.add(this.zoneGroup);
    this.scene.add(this.objectGroup);
  }

  setScene(sceneJson: SceneJson): void {
    this.zoneGroup.clear();
    this.objectGroup.clear();
    for (const plane of sceneJson.planes) {
      const mesh = new THREE.Mesh(
        new THREE.BoxGeometry(plane.extents[0] * 2, 0.01, plane.extents[1] * 2),
        new THREE.MeshStandardMaterial({ color: 0xded8c8 }),
      );
      mesh.position.set(plane.origin[0], plane.origin[1] - 0.005, plane.origin[2]);
      this.zoneGroup.add(mesh);
    }
    for (const zone of sceneJson.zones) {
      const mesh = new THREE.Mesh(
        new THREE.BoxGeometry(zone.half_extents[0] * 2, zone.height, zone.half_extents[1] * 2),
        new THREE.MeshStandardMaterial({ color: 0x5db8e8, transparent: true, opacity: 0.25 }),
      );
      mesh.position.set(zone.center[0], zone.center[1] + zone.height / 2, zone.center[2]);
      this.zoneGroup.add(mesh);
    }
    for (const object of sceneJson.objects) {
      const mesh = new THREE.Mesh(
        new THREE.BoxGeometry(
          object.half_extents[0] * 2,
          object.half_extents[1] * 2,
          object.half_extents[2] * 2,
        ),
        new THREE.MeshStandardMaterial({ color: 0x7a9a4a }),
      );
      mesh.position.set(object.position[0], object.position[1], object.position[2]);
      mesh.rotation.y = (object.yaw_deg * Math.PI) / 180;
      this.objectGroup.add(mesh);
    }
  }

  render(state: RunState): void {
    const [x, y, z] = state.characterPosition;
    this.character.position.set(x * MM, y * MM, z * MM);
    const yaw = (state.characterYawMdeg / 1000) * (Math.PI / 180);
    this.character.rotation.y = -yaw;
    this.facing.position.copy(this.character.position);
    this.facing.setDirection(new THREE.Vector3(Math.cos(yaw), 0, Math.sin(yaw)));

    const points = state.trail.map(
      (p) => new THREE.Vector3(p[0] * MM, p[1] * MM + 0.02, p[2] * MM),
    );
    this.trailGeometry.setFromPoints(points);

    this.renderer.render(this.scene, this.camera);
  }
}
