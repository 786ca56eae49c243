// Input-to-pose mapping. Everything here is pure: given the same axes, pose
// and dt, the same pose comes out. Sampling (keyboard state, gamepad
// polling, pointer drags) only produces Axes values or pixel deltas.

import { Quaternion, Vector3 } from "three";

import type { Vec3, WireQuat } from "./protocol.js";

export interface PoseBody {
  position: Vec3;
  orientation: WireQuat; // (w, x, y, z), unit
}

export interface Axes {
  forward: number; // + moves along the view direction
  strafe: number;  // + moves to the camera's right
  lift: number;    // + moves up (world Y)
  yaw: number;     // + turns right
  pitch: number;   // + looks up
}

export const ZERO_AXES: Axes = { forward: 0, strafe: 0, lift: 0, yaw: 0, pitch: 0 };

export const MOVE_SPEED = 6.0;  // m/s at full deflection
export const TURN_SPEED = 1.6;  // rad/s at full deflection
export const LOOK_RADIANS_PER_PIXEL = 0.004;

const IDLE_EPS = 1e-3;
const DEADZONE = 0.15;

export function isIdle(axes: Axes): boolean {
  return (
    Math.abs(axes.forward) < IDLE_EPS &&
    Math.abs(axes.strafe) < IDLE_EPS &&
    Math.abs(axes.lift) < IDLE_EPS &&
    Math.abs(axes.yaw) < IDLE_EPS &&
    Math.abs(axes.pitch) < IDLE_EPS
  );
}

function toQuat(orientation: WireQuat): Quaternion {
  // wire order is (w, x, y, z); three wants (x, y, z, w)
  return new Quaternion(orientation[1], orientation[2], orientation[3], orientation[0]);
}

function fromQuat(q: Quaternion): WireQuat {
  return [q.w, q.x, q.y, q.z];
}

/** Advance a pose by dt seconds of flying at the given axis deflections. */
export function stepPose(pose: PoseBody, axes: Axes, dtSeconds: number): PoseBody {
  const dt = Math.max(0, dtSeconds);
  const q = toQuat(pose.orientation);

  // yaw about world up so the horizon stays level, pitch about the local
  // x axis; world rotations premultiply, local ones postmultiply
  const yawQ = new Quaternion().setFromAxisAngle(
    new Vector3(0, 1, 0),
    -axes.yaw * TURN_SPEED * dt,
  );
  const pitchQ = new Quaternion().setFromAxisAngle(
    new Vector3(1, 0, 0),
    axes.pitch * TURN_SPEED * dt,
  );
  const turned = yawQ.multiply(q).multiply(pitchQ).normalize();

  const forward = new Vector3(0, 0, -1).applyQuaternion(turned);
  const right = new Vector3(1, 0, 0).applyQuaternion(turned);
  const move = new Vector3()
    .addScaledVector(forward, axes.forward)
    .addScaledVector(right, axes.strafe)
    .addScaledVector(new Vector3(0, 1, 0), axes.lift)
    .multiplyScalar(MOVE_SPEED * dt);

  return {
    position: [
      pose.position[0] + move.x,
      pose.position[1] + move.y,
      pose.position[2] + move.z,
    ],
    orientation: fromQuat(turned),
  };
}

/** Turn a pointer drag (pixels) into a new orientation, position untouched. */
export function mouseLook(pose: PoseBody, dxPixels: number, dyPixels: number): PoseBody {
  const q = toQuat(pose.orientation);
  const yawQ = new Quaternion().setFromAxisAngle(
    new Vector3(0, 1, 0),
    -dxPixels * LOOK_RADIANS_PER_PIXEL,
  );
  const pitchQ = new Quaternion().setFromAxisAngle(
    new Vector3(1, 0, 0),
    -dyPixels * LOOK_RADIANS_PER_PIXEL,
  );
  return {
    position: pose.position,
    orientation: fromQuat(yawQ.multiply(q).multiply(pitchQ).normalize()),
  };
}

// ---- keyboard ----

const KEY_AXES: Record<string, Partial<Axes>> = {
  KeyW: { forward: 1 },
  KeyS: { forward: -1 },
  KeyA: { strafe: -1 },
  KeyD: { strafe: 1 },
  KeyR: { lift: 1 },
  KeyF: { lift: -1 },
  ArrowLeft: { yaw: -1 },
  ArrowRight: { yaw: 1 },
  ArrowUp: { pitch: 1 },
  ArrowDown: { pitch: -1 },
};

export function axesFromKeys(pressed: ReadonlySet<string>): Axes {
  const axes: Axes = { ...ZERO_AXES };
  for (const code of pressed) {
    const partial = KEY_AXES[code];
    if (!partial) continue;
    for (const [name, value] of Object.entries(partial)) {
      axes[name as keyof Axes] += value;
    }
  }
  return axes;
}

// ---- gamepad ----

/** The slice of the Gamepad API the mapping needs (easy to fake in tests). */
export interface PadLike {
  axes: ReadonlyArray<number>;
  buttons: ReadonlyArray<{ value: number }>;
}

function dead(value: number | undefined): number {
  const v = value ?? 0;
  return Math.abs(v) < DEADZONE ? 0 : v;
}

export function axesFromGamepad(pad: PadLike): Axes {
  // left stick moves, right stick looks, triggers lift; stick up is -1
  return {
    forward: -dead(pad.axes[1]),
    strafe: dead(pad.axes[0]),
    lift: (pad.buttons[7]?.value ?? 0) - (pad.buttons[6]?.value ?? 0),
    yaw: dead(pad.axes[2]),
    pitch: -dead(pad.axes[3]),
  };
}

export function combineAxes(a: Axes, b: Axes): Axes {
  const clamp = (v: number) => Math.max(-1, Math.min(1, v));
  return {
    forward: clamp(a.forward + b.forward),
    strafe: clamp(a.strafe + b.strafe),
    lift: clamp(a.lift + b.lift),
    yaw: clamp(a.yaw + b.yaw),
    pitch: clamp(a.pitch + b.pitch),
  };
}
