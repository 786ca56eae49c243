// Boot: read roomId/deviceId from the URL, fetch the city, join the room,
// then render forever. The main instance additionally runs the input loop
// and publishes poses at a fixed rate.

import {
  ZERO_AXES,
  axesFromGamepad,
  axesFromKeys,
  combineAxes,
  isIdle,
  mouseLook,
  stepPose,
  type Axes,
  type PoseBody,
} from "./input.js";
import { connect, fetchConfigIds, fetchLayout, wsUrl, type Channel } from "./net.js";
import { createOverlay } from "./overlay.js";
import type { ServerFrame, WirePose } from "./protocol.js";
import { applyPoseToCamera, applyProjection, createViewer } from "./renderer.js";
import {
  applyLocalPose,
  applyServerFrame,
  createSession,
  hasView,
  type SessionState,
} from "./session.js";

const POSE_RATE_HZ = 30;
const SPAWN: PoseBody = {
  position: [18, 10, 42],
  orientation: [1, 0, 0, 0],
};

function statusLine(session: SessionState): string {
  const config = session.configId ?? "none";
  const peers = session.peers.size;
  const view = hasView(session) ? "" : " | no view slot, standing by";
  return (
    `room ${session.roomId} | device ${session.deviceId} (${session.role})` +
    ` | config ${config} | ${peers} other device${peers === 1 ? "" : "s"}${view}`
  );
}

function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const roomId = params.get("roomId");
  const deviceId = params.get("deviceId");

  const root = document.getElementById("app");
  const canvas = document.getElementById("view") as HTMLCanvasElement | null;
  if (!root || !canvas) throw new Error("missing #app or #view");
  const overlay = createOverlay(root);

  if (!roomId || !deviceId) {
    overlay.showError(
      "missing roomId or deviceId query parameter, e.g. ?roomId=office&deviceId=left",
    );
    return;
  }

  const viewer = createViewer(canvas);
  const session = createSession(roomId, deviceId);
  overlay.setStatus(`room ${roomId} | device ${deviceId} | connecting`);

  fetchLayout()
    .then((layout) => viewer.setCity(layout))
    .catch((err) => overlay.showError(`layout fetch failed: ${err}`, () => boot()));

  let channel: Channel | null = null;
  let pickerLoaded = false;

  const refreshOverlay = () => {
    overlay.setStatus(statusLine(session));
    viewer.setVisible(hasView(session));
    if (session.role === "main" && !pickerLoaded) {
      pickerLoaded = true;
      fetchConfigIds()
        .then((ids) =>
          overlay.showConfigPicker(ids, session.configId, (id) => {
            channel?.send({ event: "switch_config", configId: id });
          }),
        )
        .catch(() => {
          pickerLoaded = false;
        });
    }
    if (session.role !== "main") overlay.hideConfigPicker();
  };

  const handleFrame = (frame: ServerFrame) => {
    const applied = applyServerFrame(session, frame);
    if (applied.projectionChanged && session.projection) {
      applyProjection(viewer.camera, session.projection);
    }
    if (applied.poseChanged && session.pose && session.role !== "main") {
      applyPoseToCamera(viewer.camera, session.pose);
    }
    if (applied.statusChanged) refreshOverlay();
    if (frame.event === "error") {
      if (frame.code === "DuplicateDevice") {
        overlay.showError(`${frame.code}: ${frame.detail}`, () => window.location.reload());
      } else if (frame.code === "NotMain") {
        // the active configuration assigned authority elsewhere
        session.role = "auxiliary";
        refreshOverlay();
      }
    }
  };

  channel = connect(wsUrl(window.location), {
    onOpen: () => channel?.send({ event: "join", roomId, deviceId }),
    onFrame: handleFrame,
    onClose: () =>
      overlay.showError("connection lost", () => window.location.reload()),
  });
  window.addEventListener("beforeunload", () => {
    channel?.send({ event: "leave" });
    channel?.close();
  });

  // ---- input sampling (only consumed while main) ----

  const pressed = new Set<string>();
  window.addEventListener("keydown", (e) => pressed.add(e.code));
  window.addEventListener("keyup", (e) => pressed.delete(e.code));
  window.addEventListener("blur", () => pressed.clear());

  let dragX = 0;
  let dragY = 0;
  let dragging = false;
  canvas.addEventListener("pointerdown", (e) => {
    dragging = true;
    canvas.setPointerCapture(e.pointerId);
  });
  canvas.addEventListener("pointerup", () => {
    dragging = false;
  });
  canvas.addEventListener("pointermove", (e) => {
    if (dragging) {
      dragX += e.movementX;
      dragY += e.movementY;
    }
  });

  const sampleAxes = (): Axes => {
    let axes = axesFromKeys(pressed);
    const pads = navigator.getGamepads?.() ?? [];
    for (const pad of pads) {
      if (pad) {
        axes = combineAxes(axes, axesFromGamepad(pad));
        break; // keyboard/mouse fallback happens by simply having no pad
      }
    }
    return axes;
  };

  // ---- pose publication at a fixed rate, idle-suppressed ----

  let publishedInitial = false;
  let lastTick = performance.now();

  setInterval(() => {
    const now = performance.now();
    const dt = (now - lastTick) / 1000;
    lastTick = now;
    if (session.role !== "main") return;

    const axes = sampleAxes();
    const moved = !isIdle(axes) || dragX !== 0 || dragY !== 0;
    if (publishedInitial && !moved) return;

    let body: PoseBody = session.pose
      ? { position: session.pose.position, orientation: session.pose.orientation }
      : SPAWN;
    if (dragX !== 0 || dragY !== 0) {
      body = mouseLook(body, dragX, dragY);
      dragX = 0;
      dragY = 0;
    }
    if (!isIdle(axes)) {
      body = stepPose(body, axes, dt);
    }

    const pose: WirePose = { ...body, seq: session.lastAppliedSeq + 1 };
    // the main is authoritative: render locally right away, no echo wait
    if (applyLocalPose(session, pose)) {
      applyPoseToCamera(viewer.camera, pose);
      channel?.send({ event: "pose", ...pose });
      publishedInitial = true;
    }
  }, 1000 / POSE_RATE_HZ);

  const renderLoop = () => {
    viewer.render();
    requestAnimationFrame(renderLoop);
  };
  renderLoop();
}

boot();
