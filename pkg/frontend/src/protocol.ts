// Wire types shared with the room server. Sixteen-float projection arrays are
// column-major and must reach the renderer untouched.

export type Vec3 = [number, number, number];

// quaternion on the wire is (w, x, y, z)
export type WireQuat = [number, number, number, number];

export interface WirePose {
  position: Vec3;
  orientation: WireQuat;
  seq: number;
}

export type Role = "main" | "auxiliary";

export interface SelfJoinedFrame {
  event: "self_joined";
  role: Role;
  configId: string | null;
  projection: number[] | null;
  pose: WirePose | null;
}

export interface ConfigurationFrame {
  event: "configuration";
  configId: string | null;
  projection: number[] | null;
}

export interface PoseFrame extends WirePose {
  event: "pose";
}

export interface DeviceJoinedFrame {
  event: "device_joined";
  deviceId: string;
}

export interface DeviceLeftFrame {
  event: "device_left";
  deviceId: string;
}

export interface ErrorFrame {
  event: "error";
  code: string;
  detail: string;
}

export type ServerFrame =
  | SelfJoinedFrame
  | ConfigurationFrame
  | PoseFrame
  | DeviceJoinedFrame
  | DeviceLeftFrame
  | ErrorFrame;

export interface JoinFrame {
  event: "join";
  roomId: string;
  deviceId: string;
}

export interface PublishPoseFrame extends WirePose {
  event: "pose";
}

export interface SwitchConfigFrame {
  event: "switch_config";
  configId: string;
}

export interface LeaveFrame {
  event: "leave";
}

export type ClientFrame = JoinFrame | PublishPoseFrame | SwitchConfigFrame | LeaveFrame;

function isVec(value: unknown, length: number): boolean {
  return (
    Array.isArray(value) &&
    value.length === length &&
    value.every((c) => typeof c === "number" && Number.isFinite(c))
  );
}

function isProjection(value: unknown): value is number[] | null {
  return value === null || isVec(value, 16);
}

function isPoseBody(frame: Record<string, unknown>): boolean {
  return (
    isVec(frame.position, 3) &&
    isVec(frame.orientation, 4) &&
    typeof frame.seq === "number" &&
    Number.isInteger(frame.seq) &&
    frame.seq >= 0
  );
}

/** Parse one server message; null for anything malformed or unknown. */
export function parseServerFrame(raw: string): ServerFrame | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    return null;
  }
  const frame = data as Record<string, unknown>;
  switch (frame.event) {
    case "self_joined":
      if (
        (frame.role === "main" || frame.role === "auxiliary") &&
        (frame.configId === null || typeof frame.configId === "string") &&
        isProjection(frame.projection) &&
        (frame.pose === null || isPoseBody(frame.pose as Record<string, unknown>))
      ) {
        return frame as unknown as SelfJoinedFrame;
      }
      return null;
    case "configuration":
      if (
        (frame.configId === null || typeof frame.configId === "string") &&
        isProjection(frame.projection)
      ) {
        return frame as unknown as ConfigurationFrame;
      }
      return null;
    case "pose":
      return isPoseBody(frame) ? (frame as unknown as PoseFrame) : null;
    case "device_joined":
    case "device_left":
      return typeof frame.deviceId === "string"
        ? (frame as unknown as DeviceJoinedFrame | DeviceLeftFrame)
        : null;
    case "error":
      if (typeof frame.code === "string" && typeof frame.detail === "string") {
        return frame as unknown as ErrorFrame;
      }
      return null;
    default:
      return null;
  }
}
