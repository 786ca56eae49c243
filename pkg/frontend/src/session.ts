// Message-handling layer, kept free of DOM and renderer concerns so the
// protocol rules (stale rejection above all) are testable without a browser.

import type { Role, ServerFrame, WirePose } from "./protocol.js";

export interface SessionState {
  readonly roomId: string;
  readonly deviceId: string;
  role: Role;
  configId: string | null;
  /** Server-assigned matrix, stored exactly as received; never recomputed. */
  projection: number[] | null;
  pose: WirePose | null;
  /** Highest seq applied so far; -1 before any pose. Never decreases. */
  lastAppliedSeq: number;
  staleRejected: number;
  peers: Set<string>;
  lastError: { code: string; detail: string } | null;
}

/** What a handled frame changed, so the caller knows what to refresh. */
export interface Applied {
  poseChanged: boolean;
  projectionChanged: boolean;
  statusChanged: boolean;
}

const NOTHING: Applied = {
  poseChanged: false,
  projectionChanged: false,
  statusChanged: false,
};

export function createSession(roomId: string, deviceId: string): SessionState {
  return {
    roomId,
    deviceId,
    role: "auxiliary",
    configId: null,
    projection: null,
    pose: null,
    lastAppliedSeq: -1,
    staleRejected: 0,
    peers: new Set(),
    lastError: null,
  };
}

function applyPose(session: SessionState, pose: WirePose): boolean {
  if (pose.seq <= session.lastAppliedSeq) {
    session.staleRejected += 1;
    return false;
  }
  session.pose = pose;
  session.lastAppliedSeq = pose.seq;
  return true;
}

/**
 * Fold one server frame into the session. The session object is mutated
 * here and nowhere else; the returned flags say what changed.
 */
export function applyServerFrame(session: SessionState, frame: ServerFrame): Applied {
  switch (frame.event) {
    case "self_joined": {
      session.role = frame.role;
      session.configId = frame.configId;
      session.projection = frame.projection;
      const poseChanged =
        frame.pose !== null ? applyPose(session, frame.pose) : false;
      return { poseChanged, projectionChanged: true, statusChanged: true };
    }
    case "configuration":
      session.configId = frame.configId;
      session.projection = frame.projection;
      return { poseChanged: false, projectionChanged: true, statusChanged: true };
    case "pose": {
      const { event: _event, ...pose } = frame;
      return applyPose(session, pose)
        ? { poseChanged: true, projectionChanged: false, statusChanged: false }
        : NOTHING;
    }
    case "device_joined":
      session.peers.add(frame.deviceId);
      return { poseChanged: false, projectionChanged: false, statusChanged: true };
    case "device_left":
      session.peers.delete(frame.deviceId);
      return { poseChanged: false, projectionChanged: false, statusChanged: true };
    case "error":
      session.lastError = { code: frame.code, detail: frame.detail };
      return { poseChanged: false, projectionChanged: false, statusChanged: true };
  }
}

/**
 * Record a pose this instance authored itself (the main renders from its own
 * poses immediately instead of waiting for a server echo). Seq discipline
 * applies all the same.
 */
export function applyLocalPose(session: SessionState, pose: WirePose): boolean {
  return applyPose(session, pose);
}

/** True when this device has a slot in the active configuration. */
export function hasView(session: SessionState): boolean {
  return session.configId !== null && session.projection !== null;
}
