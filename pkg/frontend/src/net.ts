// HTTP fetches and the websocket channel, same origin as the page.

import type { ClientFrame, ServerFrame } from "./protocol.js";
import { parseServerFrame } from "./protocol.js";

export interface Rect {
  x: number;
  z: number;
  width: number;
  depth: number;
}

export interface District {
  packagePath: string;
  rect: Rect;
  elevation: number;
}

export interface Building {
  classFqn: string;
  rect: Rect;
  height: number;
}

export interface Arc {
  sourceFqn: string;
  targetFqn: string;
  controlPoints: [number, number, number][];
  width: number;
  interApplication: boolean;
}

export interface CityLayout {
  districts: District[];
  buildings: Building[];
  arcs: Arc[];
}

function asRect(value: number[]): Rect {
  const [x = 0, z = 0, width = 0, depth = 0] = value;
  return { x, z, width, depth };
}

export async function fetchLayout(base = ""): Promise<CityLayout> {
  const response = await fetch(`${base}/layout`);
  if (!response.ok) {
    throw new Error(`GET /layout failed: ${response.status}`);
  }
  const data = await response.json();
  return {
    districts: data.districts.map((d: { packagePath: string; rect: number[]; elevation: number }) => ({
      packagePath: d.packagePath,
      rect: asRect(d.rect),
      elevation: d.elevation,
    })),
    buildings: data.buildings.map((b: { classFqn: string; rect: number[]; height: number }) => ({
      classFqn: b.classFqn,
      rect: asRect(b.rect),
      height: b.height,
    })),
    arcs: data.arcs,
  };
}

export async function fetchConfigIds(base = ""): Promise<string[]> {
  const response = await fetch(`${base}/configs`);
  if (!response.ok) {
    throw new Error(`GET /configs failed: ${response.status}`);
  }
  const ids = await response.json();
  return Array.isArray(ids) ? ids.filter((id) => typeof id === "string") : [];
}

export interface Channel {
  send(frame: ClientFrame): void;
  close(): void;
}

export interface ChannelHandlers {
  onOpen?: () => void;
  onFrame?: (frame: ServerFrame) => void;
  onClose?: () => void;
}

export function wsUrl(loc: { protocol: string; host: string }): string {
  const scheme = loc.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${loc.host}/ws`;
}

export function connect(url: string, handlers: ChannelHandlers): Channel {
  const socket = new WebSocket(url);
  socket.addEventListener("open", () => handlers.onOpen?.());
  socket.addEventListener("close", () => handlers.onClose?.());
  socket.addEventListener("message", (event) => {
    if (typeof event.data !== "string") return;
    const frame = parseServerFrame(event.data);
    if (frame) handlers.onFrame?.(frame);
  });
  return {
    send(frame) {
      if (socket.readyState === WebSocket.OPEN) {
        socket.send(JSON.stringify(frame));
      }
    },
    close() {
      socket.close();
    },
  };
}
