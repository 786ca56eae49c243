"""ASGI adapter: HTTP endpoints plus the WebSocket message channel.

The app exposes ``GET /healthz``, ``GET /layout`` (the precomputed scene),
``GET /configs`` (preloaded configuration ids), and the message channel at
``GET /ws``.  An optional static directory (the browser client) is mounted
at the root.

Each WebSocket connection owns a small outbox drained by a writer task.
Pose frames coalesce at the outbox tail (latest wins) so a slow consumer
skips intermediate poses instead of queueing them; all other frames are
kept in order, which preserves the room's application order per device.
"""

from __future__ import annotations

import asyncio
import json
from collections import deque
from typing import Any

from starlette.applications import Starlette
from starlette.responses import JSONResponse
from starlette.routing import Mount, Route, WebSocketRoute
from starlette.staticfiles import StaticFiles
from starlette.websockets import WebSocket, WebSocketDisconnect

from .errors import CitywallError, ParseError, ValidationError
from .model import CameraPose
from .rooms import RoomHub

__all__ = ["create_app", "WsConnection"]


class WsConnection:
    """Hub-facing handle for one WebSocket; enqueues, never blocks."""

    def __init__(self, websocket: WebSocket) -> None:
        self._websocket = websocket
        self._pending: deque[dict] = deque()
        self._wakeup = asyncio.Event()
        self._closed = False

    def send_frame(self, frame: dict) -> None:
        if self._closed:
            return
        if (
            frame.get("event") == "pose"
            and self._pending
            and self._pending[-1].get("event") == "pose"
        ):
            self._pending[-1] = frame
        else:
            self._pending.append(frame)
        self._wakeup.set()

    def close(self) -> None:
        self._closed = True
        self._wakeup.set()

    async def run_writer(self) -> None:
        try:
            while True:
                await self._wakeup.wait()
                self._wakeup.clear()
                while self._pending:
                    frame = self._pending.popleft()
                    await self._websocket.send_text(json.dumps(frame, separators=(",", ":")))
                if self._closed:
                    return
        except (WebSocketDisconnect, RuntimeError):
            self._closed = True


def _error_frame(code: str, detail: str) -> dict:
    return {"event": "error", "code": code, "detail": detail}


async def _message_channel(websocket: WebSocket) -> None:
    hub: RoomHub = websocket.app.state.hub
    await websocket.accept()
    connection = WsConnection(websocket)
    writer = asyncio.ensure_future(connection.run_writer())
    joined: tuple[str, str] | None = None
    try:
        while True:
            try:
                raw = await websocket.receive_text()
            except (WebSocketDisconnect, RuntimeError):
                break
            try:
                frame = json.loads(raw)
                if not isinstance(frame, dict):
                    raise ValueError("frame must be a JSON object")
            except ValueError as exc:
                connection.send_frame(_error_frame(ParseError.code, f"bad frame: {exc}"))
                continue

            event = frame.get("event")
            try:
                if event == "join":
                    if joined is not None:
                        raise ValidationError("this connection already joined")
                    room_id = frame.get("roomId")
                    device_id = frame.get("deviceId")
                    if not isinstance(room_id, str) or not isinstance(device_id, str):
                        raise ValidationError("join needs roomId and deviceId strings")
                    hub.join(room_id, device_id, connection)
                    joined = (room_id, device_id)
                elif event == "pose":
                    if joined is None:
                        raise ValidationError("join before publishing poses")
                    try:
                        pose = CameraPose.from_json(frame)
                    except (KeyError, TypeError, ValueError) as exc:
                        raise ValidationError(f"bad pose: {exc}") from exc
                    hub.publish_pose(joined[0], joined[1], pose)
                elif event == "switch_config":
                    if joined is None:
                        raise ValidationError("join before switching configurations")
                    config_id = frame.get("configId")
                    if not isinstance(config_id, str):
                        raise ValidationError("switch_config needs a configId string")
                    hub.switch_config(joined[0], joined[1], config_id)
                elif event == "leave":
                    break
                else:
                    connection.send_frame(
                        _error_frame(ParseError.code, f"unknown event {event!r}")
                    )
            except CitywallError as exc:
                connection.send_frame(_error_frame(exc.code, str(exc)))
    finally:
        if joined is not None:
            hub.leave(joined[0], joined[1])
        connection.close()
        try:
            await asyncio.wait_for(writer, timeout=5.0)
        except Exception:
            writer.cancel()
        try:
            await websocket.close()
        except Exception:
            pass


def create_app(
    hub: RoomHub,
    layout_doc: dict[str, Any] | None = None,
    static_dir: str | None = None,
) -> Starlette:
    """Build the ASGI application around a hub and a precomputed layout."""
    layout_payload = layout_doc if layout_doc is not None else {
        "districts": [],
        "buildings": [],
        "arcs": [],
    }

    async def healthz(_request) -> JSONResponse:
        return JSONResponse({"status": "ok"})

    async def layout(_request) -> JSONResponse:
        return JSONResponse(layout_payload)

    async def configs(_request) -> JSONResponse:
        return JSONResponse(hub.default_config_ids())

    routes = [
        Route("/healthz", healthz),
        Route("/layout", layout),
        Route("/configs", configs),
        WebSocketRoute("/ws", _message_channel),
    ]
    if static_dir is not None:
        routes.append(Mount("/", app=StaticFiles(directory=static_dir, html=True)))

    app = Starlette(routes=routes)
    app.state.hub = hub
    return app
