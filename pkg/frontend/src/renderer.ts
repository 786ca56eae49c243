// three.js scene construction and the verbatim-projection camera.

import {
  AmbientLight,
  BoxGeometry,
  Camera,
  Color,
  DirectionalLight,
  Group,
  Mesh,
  MeshBasicMaterial,
  MeshLambertMaterial,
  PlaneGeometry,
  QuadraticBezierCurve3,
  Scene,
  TubeGeometry,
  Vector3,
  WebGLRenderer,
} from "three";

import type { CityLayout, District } from "./net.js";
import type { WirePose } from "./protocol.js";

const SLAB_THICKNESS = 0.2;
const ARC_COLOR = 0xf2c029; // curved yellow pipes
const BUILDING_COLOR = 0x9a9a9a;
const GROUND_COLOR = 0x20242a;

// district slabs shade lighter green the deeper they nest
function districtColor(level: number): Color {
  const l = Math.min(0.28 + 0.1 * level, 0.62);
  return new Color().setHSL(0.35, 0.45, l);
}

/**
 * Overwrite the camera's projection with the sixteen server floats.
 * The wire array is column-major, exactly what Matrix4.fromArray expects;
 * nothing is recomputed, normalized, or aspect-corrected here.
 */
export function applyProjection(camera: Camera, m: number[]): void {
  camera.projectionMatrix.fromArray(m);
  camera.projectionMatrixInverse.copy(camera.projectionMatrix).invert();
}

/** Place the camera at a shared pose; wire quaternions are (w, x, y, z). */
export function applyPoseToCamera(camera: Camera, pose: WirePose): void {
  camera.position.set(pose.position[0], pose.position[1], pose.position[2]);
  camera.quaternion.set(
    pose.orientation[1],
    pose.orientation[2],
    pose.orientation[3],
    pose.orientation[0],
  );
  camera.updateMatrixWorld(true);
}

/**
 * Base height for a building: the top of the deepest district whose
 * footprint contains the building's center.
 */
export function buildingBaseY(
  districts: District[],
  centerX: number,
  centerZ: number,
): number {
  let best = -SLAB_THICKNESS; // bare ground if nothing contains it
  for (const d of districts) {
    const inside =
      centerX >= d.rect.x &&
      centerX <= d.rect.x + d.rect.width &&
      centerZ >= d.rect.z &&
      centerZ <= d.rect.z + d.rect.depth;
    if (inside && d.elevation > best) {
      best = d.elevation;
    }
  }
  return best + SLAB_THICKNESS;
}

/** Build the whole city as one Group: slabs, boxes, arc tubes. */
export function buildCity(layout: CityLayout): Group {
  const city = new Group();
  city.name = "city";

  for (const district of layout.districts) {
    const level = Math.round(district.elevation / SLAB_THICKNESS);
    const geometry = new BoxGeometry(district.rect.width, SLAB_THICKNESS, district.rect.depth);
    const mesh = new Mesh(
      geometry,
      new MeshLambertMaterial({ color: districtColor(level) }),
    );
    mesh.position.set(
      district.rect.x + district.rect.width / 2,
      district.elevation + SLAB_THICKNESS / 2,
      district.rect.z + district.rect.depth / 2,
    );
    mesh.name = `district:${district.packagePath}`;
    city.add(mesh);
  }

  for (const building of layout.buildings) {
    const cx = building.rect.x + building.rect.width / 2;
    const cz = building.rect.z + building.rect.depth / 2;
    const base = buildingBaseY(layout.districts, cx, cz);
    const geometry = new BoxGeometry(building.rect.width, building.height, building.rect.depth);
    const mesh = new Mesh(geometry, new MeshLambertMaterial({ color: BUILDING_COLOR }));
    mesh.position.set(cx, base + building.height / 2, cz);
    mesh.name = `building:${building.classFqn}`;
    city.add(mesh);
  }

  for (const arc of layout.arcs) {
    const [start, apex, end] = arc.controlPoints;
    if (!start || !apex || !end) continue;
    const curve = new QuadraticBezierCurve3(
      new Vector3(...start),
      new Vector3(...apex),
      new Vector3(...end),
    );
    const radius = Math.max(arc.width / 2, 0.03);
    const geometry = new TubeGeometry(curve, 24, radius, 8);
    const mesh = new Mesh(geometry, new MeshBasicMaterial({ color: ARC_COLOR }));
    mesh.name = `arc:${arc.sourceFqn}->${arc.targetFqn}`;
    city.add(mesh);
  }

  return city;
}

export interface Viewer {
  scene: Scene;
  camera: Camera;
  setCity(layout: CityLayout): void;
  render(): void;
  setVisible(visible: boolean): void;
}

/** Wire up renderer, scene, lights and resize handling for one canvas. */
export function createViewer(canvas: HTMLCanvasElement): Viewer {
  const renderer = new WebGLRenderer({ canvas, antialias: true });
  renderer.setPixelRatio(window.devicePixelRatio);

  const scene = new Scene();
  scene.background = new Color(0x0c0e12);
  scene.add(new AmbientLight(0xffffff, 0.55));
  const sun = new DirectionalLight(0xffffff, 1.1);
  sun.position.set(30, 60, 20);
  scene.add(sun);

  const ground = new Mesh(
    new PlaneGeometry(2000, 2000),
    new MeshLambertMaterial({ color: GROUND_COLOR }),
  );
  ground.rotation.x = -Math.PI / 2;
  ground.position.y = -0.01;
  scene.add(ground);

  // base Camera, not PerspectiveCamera: nothing may ever regenerate the
  // projection from fov/aspect behind our back
  const camera = new Camera();

  let city: Group | null = null;
  let visible = true;

  const resize = () => {
    renderer.setSize(window.innerWidth, window.innerHeight);
  };
  window.addEventListener("resize", resize);
  resize();

  return {
    scene,
    camera,
    setCity(layout: CityLayout) {
      if (city) scene.remove(city);
      city = buildCity(layout);
      scene.add(city);
    },
    render() {
      if (visible) renderer.render(scene, camera);
    },
    setVisible(v: boolean) {
      visible = v;
      if (!v) renderer.clear();
    },
  };
}
