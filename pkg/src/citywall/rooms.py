"""Room server core: device registry, configuration authority, pose fan-out.

The hub is transport-agnostic.  A transport adapter (the WebSocket endpoint
in ``server``, the virtual links in ``harness``) registers one connection
object per device; the hub pushes server-to-client frames through
``connection.send_frame(dict)`` and the adapter owns delivery.  ``send_frame``
must never block: adapters enqueue.

All mutations of one room happen under the hub lock, so every room observes
a single total order of joins, switches, and poses; frames are emitted under
that same lock, which makes per-device frame order match the room's
application order by construction.

Authority model: while a configuration is active, its role=main deviceId is
the room's main; before that, the first device to join the room is
provisionally main.  A room whose main is absent is frozen (poses and
switches rejected) until that exact device rejoins; rooms disappear when the
last device leaves.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Protocol

from .errors import (
    DuplicateDeviceError,
    InvalidConfigError,
    NotMainError,
    UnknownConfigError,
)
from .frustum import validate_configuration
from .model import CameraPose, DeviceId, DeviceRole, RoomId, ViewConfiguration

__all__ = ["Connection", "RoomHub"]


class Connection(Protocol):
    """Transport handle for one joined device."""

    def send_frame(self, frame: dict) -> None:
        """Enqueue one server-to-client frame; must not block."""


@dataclass
class _Room:
    room_id: RoomId
    devices: dict[DeviceId, Connection] = field(default_factory=dict)
    config_library: dict[str, ViewConfiguration] = field(default_factory=dict)
    active_config: ViewConfiguration | None = None
    latest_pose: CameraPose | None = None
    provisional_main: DeviceId | None = None

    @property
    def main_device_id(self) -> DeviceId | None:
        if self.active_config is not None:
            return self.active_config.main_device_id
        return self.provisional_main

    def is_main(self, device_id: DeviceId) -> bool:
        return device_id == self.main_device_id and device_id in self.devices


def _coerce_configs(configs: Iterable[ViewConfiguration | Mapping[str, Any]]) -> dict[str, ViewConfiguration]:
    """Validate and index a configuration list; raises InvalidConfigError."""
    library: dict[str, ViewConfiguration] = {}
    for raw in configs:
        diagnostics = validate_configuration(raw)
        if diagnostics:
            raise InvalidConfigError("; ".join(diagnostics))
        config = raw if isinstance(raw, ViewConfiguration) else ViewConfiguration.from_json(raw)
        if config.config_id in library:
            raise InvalidConfigError(f"duplicate configId {config.config_id!r}")
        library[config.config_id] = config
    return library


class RoomHub:
    """All rooms of one server process.

    Thread-safe: a single lock serializes all room mutations.  Calls into
    connection objects happen under that lock, so adapters must only enqueue.
    """

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._rooms: dict[RoomId, _Room] = {}
        self._default_library: dict[str, ViewConfiguration] = {}

    # ---- configuration libraries ----

    def set_default_library(
        self, configs: Iterable[ViewConfiguration | Mapping[str, Any]]
    ) -> None:
        """Set the library newly created rooms start with.

        Raises InvalidConfigError when any entry fails validation.  Existing
        rooms are not touched.
        """
        library = _coerce_configs(configs)
        with self._lock:
            self._default_library = library

    def default_config_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._default_library)

    def load_config_library(
        self, room_id: str, configs: Iterable[ViewConfiguration | Mapping[str, Any]]
    ) -> None:
        """Replace a live room's config library.

        The active configuration is retained when its id survives the reload,
        otherwise it is cleared and every device is notified.  Raises
        InvalidConfigError for bad entries, LookupError when the room does
        not exist (rooms only live while devices are joined).
        """
        library = _coerce_configs(configs)
        with self._lock:
            room = self._rooms.get(RoomId(room_id))
            if room is None:
                raise LookupError(f"room {room_id!r} does not exist")
            room.config_library = library
            if room.active_config is not None and room.active_config.config_id in library:
                room.active_config = library[room.active_config.config_id]
            elif room.active_config is not None:
                room.active_config = None
                for connection in room.devices.values():
                    connection.send_frame(
                        {"event": "configuration", "configId": None, "projection": None}
                    )

    # ---- membership ----

    def join(self, room_id: str, device_id: str, connection: Connection) -> None:
        """Register a device; sends its snapshot and notifies the others.

        The room is created on first join.  Raises BadIdentifierError for
        malformed ids and DuplicateDeviceError when the id is already
        connected in the room.
        """
        rid = RoomId(room_id)
        did = DeviceId(device_id)
        with self._lock:
            room = self._rooms.get(rid)
            if room is None:
                room = _Room(room_id=rid, config_library=dict(self._default_library))
                self._rooms[rid] = room
            if did in room.devices:
                raise DuplicateDeviceError(f"device {did!r} is already connected in {rid!r}")
            room.devices[did] = connection
            if room.active_config is None and room.provisional_main is None:
                room.provisional_main = did

            role = DeviceRole.MAIN if room.is_main(did) else DeviceRole.AUXILIARY
            view = room.active_config.view_for(did) if room.active_config else None
            connection.send_frame(
                {
                    "event": "self_joined",
                    "role": role.value,
                    "configId": room.active_config.config_id if room.active_config else None,
                    "projection": view.projection.to_json() if view else None,
                    "pose": room.latest_pose.to_json() if room.latest_pose else None,
                }
            )
            notice = {"event": "device_joined", "deviceId": str(did)}
            for other_id, other in room.devices.items():
                if other_id != did:
                    other.send_frame(notice)

    def leave(self, room_id: str, device_id: str) -> None:
        """Remove a device; destroys the room when it empties.

        Tolerant: unknown rooms or devices are a no-op, so disconnect paths
        can always call it.
        """
        with self._lock:
            room = self._rooms.get(RoomId(room_id))
            if room is None:
                return
            did = DeviceId(device_id)
            if did not in room.devices:
                return
            del room.devices[did]
            if not room.devices:
                del self._rooms[room.room_id]
                return
            notice = {"event": "device_left", "deviceId": str(did)}
            for other in room.devices.values():
                other.send_frame(notice)

    # ---- main-instance operations ----

    def switch_config(self, room_id: str, requester: str, config_id: str) -> None:
        """Activate a library configuration and fan out per-device matrices.

        Every connected device receives exactly one configuration frame; a
        device absent from the new configuration gets a null projection.
        Raises NotMainError or UnknownConfigError.
        """
        with self._lock:
            room = self._rooms.get(RoomId(room_id))
            did = DeviceId(requester)
            if room is None or not room.is_main(did):
                raise NotMainError(f"device {requester!r} does not hold the main role")
            config = room.config_library.get(config_id)
            if config is None:
                raise UnknownConfigError(f"no configuration {config_id!r} in this room")
            room.active_config = config
            for member_id, connection in room.devices.items():
                view = config.view_for(member_id)
                connection.send_frame(
                    {
                        "event": "configuration",
                        "configId": config.config_id,
                        "projection": view.projection.to_json() if view else None,
                    }
                )

    def publish_pose(self, room_id: str, requester: str, pose: CameraPose) -> None:
        """Accept a pose from the main and fan it out to all other devices.

        Stale poses (seq not above the room's newest) are dropped silently;
        non-main senders get NotMainError.
        """
        with self._lock:
            room = self._rooms.get(RoomId(room_id))
            did = DeviceId(requester)
            if room is None or not room.is_main(did):
                raise NotMainError(f"device {requester!r} does not hold the main role")
            if room.latest_pose is not None and pose.seq <= room.latest_pose.seq:
                return
            room.latest_pose = pose
            frame = {"event": "pose", **pose.to_json()}
            for member_id, connection in room.devices.items():
                if member_id != did:
                    connection.send_frame(frame)

    # ---- introspection (tests, diagnostics) ----

    def room_state(self, room_id: str) -> dict[str, Any] | None:
        """Snapshot of one room's state, or None when the room does not exist."""
        with self._lock:
            room = self._rooms.get(RoomId(room_id))
            if room is None:
                return None
            return {
                "roomId": str(room.room_id),
                "devices": sorted(str(d) for d in room.devices),
                # only a connected main can act; a departed binding reads as mainless
                "mainDeviceId": str(room.main_device_id)
                if room.main_device_id and room.is_main(room.main_device_id) else None,
                "activeConfigId": room.active_config.config_id if room.active_config else None,
                "latestSeq": room.latest_pose.seq if room.latest_pose else None,
                "configIds": sorted(room.config_library),
            }

    def room_ids(self) -> list[str]:
        with self._lock:
            return sorted(str(r) for r in self._rooms)
