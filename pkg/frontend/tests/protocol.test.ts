import { describe, expect, it } from "vitest";

import { parseServerFrame } from "../src/protocol.js";

const POSE = JSON.stringify({
  event: "pose",
  position: [1, 2, 3],
  orientation: [1, 0, 0, 0],
  seq: 9,
});

describe("parseServerFrame", () => {
  it("accepts every server frame kind", () => {
    expect(parseServerFrame(POSE)?.event).toBe("pose");
    expect(
      parseServerFrame(
        JSON.stringify({
          event: "self_joined",
          role: "main",
          configId: null,
          projection: null,
          pose: null,
        }),
      )?.event,
    ).toBe("self_joined");
    expect(
      parseServerFrame(
        JSON.stringify({
          event: "configuration",
          configId: "grid-1x2",
          projection: new Array(16).fill(0).map((_, i) => i),
        }),
      )?.event,
    ).toBe("configuration");
    expect(
      parseServerFrame(JSON.stringify({ event: "device_joined", deviceId: "d" }))?.event,
    ).toBe("device_joined");
    expect(
      parseServerFrame(JSON.stringify({ event: "device_left", deviceId: "d" }))?.event,
    ).toBe("device_left");
    expect(
      parseServerFrame(JSON.stringify({ event: "error", code: "NotMain", detail: "x" }))?.event,
    ).toBe("error");
  });

  it("rejects garbage", () => {
    expect(parseServerFrame("not json")).toBeNull();
    expect(parseServerFrame("42")).toBeNull();
    expect(parseServerFrame("[1,2]")).toBeNull();
    expect(parseServerFrame("null")).toBeNull();
    expect(parseServerFrame(JSON.stringify({ event: "telepathy" }))).toBeNull();
  });

  it("rejects malformed poses", () => {
    expect(
      parseServerFrame(
        JSON.stringify({ event: "pose", position: [1, 2], orientation: [1, 0, 0, 0], seq: 1 }),
      ),
    ).toBeNull();
    expect(
      parseServerFrame(
        JSON.stringify({ event: "pose", position: [1, 2, 3], orientation: [1, 0, 0, 0], seq: -1 }),
      ),
    ).toBeNull();
    expect(
      parseServerFrame(
        JSON.stringify({ event: "pose", position: [1, 2, 3], orientation: [1, 0, 0, 0], seq: 1.5 }),
      ),
    ).toBeNull();
    expect(
      parseServerFrame(
        JSON.stringify({
          event: "pose",
          position: [1, 2, "x"],
          orientation: [1, 0, 0, 0],
          seq: 1,
        }),
      ),
    ).toBeNull();
  });

  it("rejects a configuration frame with a short matrix", () => {
    expect(
      parseServerFrame(
        JSON.stringify({ event: "configuration", configId: "c", projection: [1, 2, 3] }),
      ),
    ).toBeNull();
  });

  it("keeps the projection array exactly as sent", () => {
    const wire = new Array(16).fill(0).map((_, i) => Math.sin(i) * 1e3);
    const frame = parseServerFrame(
      JSON.stringify({ event: "configuration", configId: "c", projection: wire }),
    );
    expect(frame?.event).toBe("configuration");
    if (frame?.event === "configuration") {
      // JSON round-trip of IEEE doubles is exact; so must be our handling
      expect(frame.projection).toEqual(JSON.parse(JSON.stringify(wire)));
    }
  });
});
