"""Deterministic protocol test bed: headless clients over a virtual network.

The harness drives the real ``RoomHub`` (not a model of it) through
adversarial in-memory links with seeded latency, plus reordering and loss
applied only to pose fan-out — join and configuration traffic keeps the
in-order reliability of the real channel.  Time is virtual: a scenario
with seconds of simulated traffic runs in milliseconds and two runs with
the same (script, seed) produce byte-identical reports.

Scenario files are JSON::

    {
      "roomId": "sim",
      "network": {"latencyMillisRange": [0, 100],
                   "reorderProbability": 0.1, "dropProbability": 0.0},
      "configs": [ ...view configuration objects... ],
      "steps": [
        {"atMillis": 0,  "action": "join", "deviceId": "main-0"},
        {"atMillis": 50, "action": "pose", "deviceId": "main-0"},
        {"atMillis": 900, "action": "assert", "kind": "consistent"}
      ]
    }

Pose steps default to seq = previous + 1 and a position derived from the
seq, so long bursts stay compact; explicit "seq"/"position"/"orientation"
override them (that is how stale deliveries are scripted).
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

from .errors import CitywallError, ScenarioError
from .frustum import validate_configuration
from .model import CameraPose, DeviceId, RoomId, ViewConfiguration
from .rooms import RoomHub

__all__ = [
    "NetworkModel",
    "Step",
    "ScenarioScript",
    "parse_scenario",
    "run_scenario",
    "assert_consistent",
]

_ACTIONS = ("join", "leave", "pose", "switch_config", "assert")


@dataclass(frozen=True)
class NetworkModel:
    """Adversarial delivery parameters for every device link."""

    latency_min: float = 0.0
    latency_max: float = 0.0
    reorder_probability: float = 0.0
    drop_probability: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.latency_min <= self.latency_max:
            raise ScenarioError(
                f"latency range must satisfy 0 <= min <= max, got "
                f"({self.latency_min}, {self.latency_max})"
            )
        for name in ("reorder_probability", "drop_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ScenarioError(f"{name} must be in [0, 1], got {p}")


@dataclass(frozen=True)
class Step:
    at_millis: int
    action: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.at_millis, int) or self.at_millis < 0:
            raise ScenarioError(f"atMillis must be a non-negative int, got {self.at_millis!r}")
        if self.action not in _ACTIONS:
            raise ScenarioError(f"unknown action {self.action!r}")


@dataclass(frozen=True)
class ScenarioScript:
    """A validated scenario: steps in time order plus the network model."""

    steps: tuple[Step, ...]
    network: NetworkModel = NetworkModel()
    configs: tuple[ViewConfiguration, ...] = ()
    room_id: RoomId = RoomId("sim")

    def __post_init__(self) -> None:
        last = -1
        joined: set[str] = set()
        for i, step in enumerate(self.steps):
            if step.at_millis < last:
                raise ScenarioError(f"steps[{i}] is out of time order (atMillis {step.at_millis})")
            last = step.at_millis
            if step.action == "assert":
                kind = step.params.get("kind", "consistent")
                if kind != "consistent":
                    raise ScenarioError(f"steps[{i}]: unknown assert kind {kind!r}")
                continue
            device = step.params.get("deviceId")
            try:
                device = DeviceId(device)
            except CitywallError as exc:
                raise ScenarioError(f"steps[{i}]: {exc}") from exc
            if step.action == "join":
                joined.add(device)
            elif device not in joined:
                raise ScenarioError(
                    f"steps[{i}]: device {device!r} acts before any join step"
                )
            if step.action == "pose":
                seq = step.params.get("seq")
                if seq is not None and (not isinstance(seq, int) or seq < 0):
                    raise ScenarioError(f"steps[{i}]: seq must be a non-negative int")
                for key, n in (("position", 3), ("orientation", 4)):
                    value = step.params.get(key)
                    if value is not None and (
                        not isinstance(value, list) or len(value) != n
                    ):
                        raise ScenarioError(f"steps[{i}]: {key} must be a list of {n} numbers")
            if step.action == "switch_config":
                config_id = step.params.get("configId")
                if not isinstance(config_id, str) or not config_id:
                    raise ScenarioError(f"steps[{i}]: switch_config needs a configId")


def parse_scenario(data: bytes | str | Mapping[str, Any]) -> ScenarioScript:
    """Parse and validate a scenario document; raises ScenarioError."""
    if isinstance(data, (bytes, str)):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"malformed scenario JSON: {exc}") from exc
    else:
        doc = data
    if not isinstance(doc, Mapping):
        raise ScenarioError("scenario must be a JSON object")

    net_doc = doc.get("network", {})
    if not isinstance(net_doc, Mapping):
        raise ScenarioError("network must be an object")
    latency = net_doc.get("latencyMillisRange", [0, 0])
    if not isinstance(latency, (list, tuple)) or len(latency) != 2:
        raise ScenarioError("latencyMillisRange must be [min, max]")
    try:
        network = NetworkModel(
            latency_min=float(latency[0]),
            latency_max=float(latency[1]),
            reorder_probability=float(net_doc.get("reorderProbability", 0.0)),
            drop_probability=float(net_doc.get("dropProbability", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad network parameters: {exc}") from exc

    configs = []
    for i, raw in enumerate(doc.get("configs", [])):
        diagnostics = validate_configuration(raw)
        if diagnostics:
            raise ScenarioError(f"configs[{i}]: {'; '.join(diagnostics)}")
        configs.append(ViewConfiguration.from_json(raw))

    steps_doc = doc.get("steps")
    if not isinstance(steps_doc, list):
        raise ScenarioError("scenario needs a steps list")
    steps = []
    for i, raw in enumerate(steps_doc):
        if not isinstance(raw, Mapping):
            raise ScenarioError(f"steps[{i}] must be an object")
        params = {k: v for k, v in raw.items() if k not in ("atMillis", "action")}
        try:
            steps.append(Step(at_millis=raw.get("atMillis"), action=raw.get("action"), params=params))
        except ScenarioError as exc:
            raise ScenarioError(f"steps[{i}]: {exc}") from exc

    try:
        room_id = RoomId(doc.get("roomId", "sim"))
    except CitywallError as exc:
        raise ScenarioError(f"bad roomId: {exc}") from exc
    return ScenarioScript(
        steps=tuple(steps), network=network, configs=tuple(configs), room_id=room_id
    )


class _EventQueue:
    """Virtual clock: a heap of (time, tie-breaker, callback)."""

    def __init__(self) -> None:
        self._heap: list[tuple[float, int, Callable[[], None]]] = []
        self._counter = 0
        self.now = 0.0

    def push(self, at: float, fn: Callable[[], None]) -> None:
        self._counter += 1
        heapq.heappush(self._heap, (at, self._counter, fn))

    def run(self) -> None:
        while self._heap:
            at, _, fn = heapq.heappop(self._heap)
            self.now = max(self.now, at)
            fn()


class _Link:
    """One device's two-way channel: latency both ways, adversary on poses.

    Client-to-server traffic and ordered server-to-client traffic keep FIFO
    order (like the real socket); pose fan-out may be dropped or get extra
    delay (reordering) per the network model.
    """

    def __init__(self, queue: _EventQueue, network: NetworkModel, rng: random.Random) -> None:
        self._queue = queue
        self._network = network
        self._rng = rng
        self._last_c2s = 0.0
        self._last_ordered_s2c = 0.0
        self.stats = {"posesDropped": 0, "posesReordered": 0}

    def _latency(self) -> float:
        return self._rng.uniform(self._network.latency_min, self._network.latency_max)

    def client_to_server(self, fn: Callable[[], None]) -> None:
        at = max(self._queue.now + self._latency(), self._last_c2s)
        self._last_c2s = at
        self._queue.push(at, fn)

    def server_to_client(self, frame: dict, deliver: Callable[[dict], None]) -> None:
        if frame.get("event") == "pose":
            if self._rng.random() < self._network.drop_probability:
                self.stats["posesDropped"] += 1
                return
            delay = self._latency()
            if self._rng.random() < self._network.reorder_probability:
                delay += self._rng.uniform(0.0, 2.0 * self._network.latency_max)
                self.stats["posesReordered"] += 1
            self._queue.push(self._queue.now + delay, lambda: deliver(frame))
        else:
            at = max(self._queue.now + self._latency(), self._last_ordered_s2c)
            self._last_ordered_s2c = at
            self._queue.push(at, lambda: deliver(frame))


class _ServerConnection:
    """Hub-side handle for one client session over a link."""

    def __init__(self, client: "_HeadlessClient", session: int) -> None:
        self._client = client
        self._session = session

    def send_frame(self, frame: dict) -> None:
        session = self._session
        client = self._client
        client.link.server_to_client(frame, lambda f: client.on_frame(f, session))


class _HeadlessClient:
    """Protocol client mirroring the browser's message-handling guards.

    State mutates only from received frames (plus the main's local echo of
    its own poses); stale poses are rejected exactly like the browser layer
    would reject them.
    """

    def __init__(self, device_id: DeviceId, link: _Link, queue: _EventQueue) -> None:
        self.device_id = device_id
        self.link = link
        self._queue = queue
        self.session = 0
        self.open = False
        self.role: str | None = None
        self.config_id: str | None = None
        self.projection: list[float] | None = None
        self.pose: dict[str, Any] | None = None
        self.last_applied_seq: int | None = None
        self.sent_seq = 0
        self.log: list[dict[str, Any]] = []
        self.last_state_change: float | None = None
        self.send_to_server: Callable[[dict, int], None] | None = None

    # -- outgoing --

    def send(self, frame: dict) -> None:
        assert self.send_to_server is not None
        self.send_to_server(frame, self.session)

    def start_session(self) -> None:
        self.session += 1
        self.open = True
        self.role = None
        self.config_id = None
        self.projection = None
        self.pose = None
        self.last_applied_seq = None

    def close_session(self) -> None:
        self.open = False

    # -- incoming --

    def _record(self, kind: str, **payload: Any) -> None:
        self.log.append({"t": self._queue.now, "kind": kind, **payload})

    def _state_changed(self) -> None:
        self.last_state_change = self._queue.now

    def on_frame(self, frame: dict, session: int) -> None:
        if not self.open or session != self.session:
            return  # frame addressed to a closed session: the socket is gone
        event = frame.get("event")
        if event == "self_joined":
            self.role = frame["role"]
            self.config_id = frame["configId"]
            self.projection = frame["projection"]
            pose = frame["pose"]
            if pose is not None:
                self.pose = pose
                self.last_applied_seq = pose["seq"]
            self._record(
                "snapshot",
                role=self.role,
                configId=self.config_id,
                seq=pose["seq"] if pose else None,
            )
            self._state_changed()
        elif event == "configuration":
            self.config_id = frame["configId"]
            self.projection = frame["projection"]
            self._record(
                "configuration",
                configId=self.config_id,
                hasProjection=self.projection is not None,
            )
            self._state_changed()
        elif event == "pose":
            seq = frame["seq"]
            if self.last_applied_seq is not None and seq <= self.last_applied_seq:
                self._record("stale_rejected", seq=seq)
                return
            self.pose = {k: frame[k] for k in ("position", "orientation", "seq")}
            self.last_applied_seq = seq
            self._record("pose", seq=seq)
            self._state_changed()
        elif event == "device_joined":
            self._record("device_joined", deviceId=frame["deviceId"])
        elif event == "device_left":
            self._record("device_left", deviceId=frame["deviceId"])
        elif event == "error":
            self._record("error", code=frame.get("code"), detail=frame.get("detail"))

    def apply_local_pose(self, pose: CameraPose) -> None:
        if self.last_applied_seq is not None and pose.seq <= self.last_applied_seq:
            self._record("stale_rejected", seq=pose.seq)
            return
        self.pose = pose.to_json()
        self.last_applied_seq = pose.seq
        self._record("pose_local", seq=pose.seq)
        self._state_changed()

    def state(self) -> dict[str, Any]:
        return {
            "open": self.open,
            "role": self.role,
            "configId": self.config_id,
            "projection": self.projection,
            "pose": self.pose,
        }


class _Simulation:
    def __init__(self, script: ScenarioScript, seed: int) -> None:
        self.script = script
        self.rng = random.Random(seed)
        self.queue = _EventQueue()
        self.hub = RoomHub()
        if script.configs:
            self.hub.set_default_library(script.configs)
        self.clients: dict[DeviceId, _HeadlessClient] = {}
        self.violations: list[str] = []
        self.switch_order: list[str] = []
        self.last_main_action: float | None = None
        self.stats = {"staleRejected": 0, "errors": 0}

    # -- client-to-server frame processing (the wire, minus the socket) --

    def _client(self, device_id: DeviceId) -> _HeadlessClient:
        client = self.clients.get(device_id)
        if client is None:
            link = _Link(self.queue, self.script.network, self.rng)
            client = _HeadlessClient(device_id, link, self.queue)
            client.send_to_server = lambda frame, session: link.client_to_server(
                lambda: self._server_receive(client, frame, session)
            )
            self.clients[device_id] = client
        return client

    def _server_receive(self, client: _HeadlessClient, frame: dict, session: int) -> None:
        room_id = self.script.room_id
        device_id = client.device_id
        before = self.hub.room_state(room_id) or {}
        event = frame.get("event")
        error: CitywallError | None = None
        try:
            if event == "join":
                self.hub.join(room_id, device_id, _ServerConnection(client, session))
            elif event == "leave":
                self.hub.leave(room_id, device_id)
            elif event == "pose":
                self.hub.publish_pose(room_id, device_id, CameraPose.from_json(frame))
            elif event == "switch_config":
                self.hub.switch_config(room_id, device_id, frame["configId"])
                self.switch_order.append(frame["configId"])
        except CitywallError as exc:
            error = exc

        if event in ("pose", "switch_config"):
            after = self.hub.room_state(room_id) or {}
            mutated = before.get("activeConfigId") != after.get("activeConfigId") or before.get(
                "latestSeq"
            ) != after.get("latestSeq")
            if mutated and before.get("mainDeviceId") != str(device_id):
                self.violations.append(
                    f"authority: {device_id} mutated room state at t={self.queue.now:.3f}"
                )
        if error is not None:
            self.stats["errors"] += 1
            _ServerConnection(client, session).send_frame(
                {"event": "error", "code": error.code, "detail": str(error)}
            )

    # -- scripted steps --

    def _run_step(self, step: Step) -> None:
        if step.action == "assert":
            self._check_consistent_now()
            return
        device_id = DeviceId(step.params["deviceId"])
        client = self._client(device_id)
        room = self.hub.room_state(self.script.room_id) or {}
        if step.action == "join":
            client.start_session()
            client.send({"event": "join", "roomId": str(self.script.room_id), "deviceId": str(device_id)})
            return
        if not client.open:
            raise ScenarioError(
                f"step at t={step.at_millis}: device {device_id!r} is not joined"
            )
        if step.action == "leave":
            client.send({"event": "leave"})
            client.close_session()
        elif step.action == "pose":
            seq = step.params.get("seq")
            if seq is None:
                seq = client.sent_seq + 1
            client.sent_seq = max(client.sent_seq, seq)
            pose = CameraPose(
                position=tuple(step.params.get("position", (float(seq), 0.0, 0.0))),
                orientation=tuple(step.params.get("orientation", (1.0, 0.0, 0.0, 0.0))),
                seq=seq,
            )
            if room.get("mainDeviceId") == str(device_id):
                self.last_main_action = self.queue.now
            if client.role == "main":
                client.apply_local_pose(pose)
            client.send({"event": "pose", **pose.to_json()})
        elif step.action == "switch_config":
            if room.get("mainDeviceId") == str(device_id):
                self.last_main_action = self.queue.now
            client.send({"event": "switch_config", "configId": step.params["configId"]})

    def _main_client(self) -> _HeadlessClient | None:
        room = self.hub.room_state(self.script.room_id)
        if room is None or room["mainDeviceId"] is None:
            return None
        client = self.clients.get(DeviceId(room["mainDeviceId"]))
        if client is None or not client.open:
            return None
        return client

    def _check_consistent_now(self) -> None:
        main = self._main_client()
        if main is None:
            self.violations.append(
                f"assert@{self.queue.now:.0f}: no main device present"
            )
            return
        for device_id, client in self.clients.items():
            if client is main or not client.open:
                continue
            if client.config_id != main.config_id or client.pose != main.pose:
                self.violations.append(
                    f"assert@{self.queue.now:.0f}: {device_id} at "
                    f"(config={client.config_id!r}, seq={_seq_of(client.pose)}) "
                    f"!= main (config={main.config_id!r}, seq={_seq_of(main.pose)})"
                )

    # -- run + report --

    def run(self) -> dict[str, Any]:
        for step in self.script.steps:
            self.queue.push(float(step.at_millis), lambda s=step: self._run_step(s))
        self.queue.run()

        logs = {
            str(device_id): list(client.log)
            for device_id, client in sorted(self.clients.items())
        }
        final_states = {
            str(device_id): client.state()
            for device_id, client in sorted(self.clients.items())
        }
        room = self.hub.room_state(self.script.room_id)
        main_id = room["mainDeviceId"] if room else None

        violations = list(self.violations)
        violations.extend(_scan_staleness(logs))
        violations.extend(_scan_config_order(logs, self.switch_order))

        convergence: float | None = 0.0
        main_client = self._main_client()
        followers = [
            c for c in self.clients.values() if c.open and c is not main_client
        ]
        if main_client is None and followers:
            convergence = None
        if main_client is not None:
            inconsistent = [
                str(c.device_id)
                for c in followers
                if c.config_id != main_client.config_id or c.pose != main_client.pose
            ]
            if inconsistent:
                for device_id in inconsistent:
                    violations.append(
                        f"quiescence: {device_id} final state differs from main"
                    )
                convergence = None
            elif followers and self.last_main_action is not None:
                settled = max(
                    (c.last_state_change or self.last_main_action) for c in followers
                )
                convergence = max(0.0, settled - self.last_main_action)

        stats: dict[str, Any] = dict(self.stats)
        stats["posesDropped"] = sum(c.link.stats["posesDropped"] for c in self.clients.values())
        stats["posesReordered"] = sum(
            c.link.stats["posesReordered"] for c in self.clients.values()
        )
        stats["staleRejected"] = sum(
            1 for entries in logs.values() for e in entries if e["kind"] == "stale_rejected"
        )

        return {
            "roomId": str(self.script.room_id),
            "mainDeviceId": main_id,
            "finalStates": final_states,
            "perDeviceAppliedLog": logs,
            "violations": violations,
            "convergenceMillis": convergence,
            "switchOrder": list(self.switch_order),
            "stats": stats,
        }


def _seq_of(pose: dict[str, Any] | None) -> int | None:
    return pose["seq"] if pose else None


def _scan_staleness(logs: Mapping[str, list[dict[str, Any]]]) -> list[str]:
    """Applied pose seqs must strictly increase within each client session."""
    violations = []
    for device_id, entries in logs.items():
        current: int | None = None
        for entry in entries:
            kind = entry["kind"]
            if kind == "snapshot":
                current = entry.get("seq")
            elif kind in ("pose", "pose_local"):
                seq = entry["seq"]
                if current is not None and seq <= current:
                    violations.append(
                        f"staleness: {device_id} applied seq {seq} after {current}"
                    )
                current = seq
    return violations


def _is_contiguous_window(window: list[str], order: list[str]) -> bool:
    if not window:
        return True
    n = len(window)
    return any(order[i : i + n] == window for i in range(len(order) - n + 1))


def _scan_config_order(
    logs: Mapping[str, list[dict[str, Any]]], switch_order: list[str]
) -> list[str]:
    """Per session, received switches must form a contiguous window of the
    server's application order — same order, no duplicates, no gaps."""
    violations = []
    for device_id, entries in logs.items():
        sessions: list[list[str]] = []
        current: list[str] = []
        for entry in entries:
            if entry["kind"] == "snapshot":
                if current:
                    sessions.append(current)
                current = []
            elif entry["kind"] == "configuration" and entry.get("configId") is not None:
                current.append(entry["configId"])
        if current:
            sessions.append(current)
        for received in sessions:
            if not _is_contiguous_window(received, switch_order):
                violations.append(
                    f"config order: {device_id} saw {received} which is not a "
                    f"contiguous window of the applied order {switch_order}"
                )
    return violations


def run_scenario(
    script: ScenarioScript | Mapping[str, Any] | bytes | str, seed: int
) -> dict[str, Any]:
    """Execute a scenario deterministically; returns the JSON-ready report.

    The report carries per-device applied logs, every invariant violation
    found (empty means pass), and convergenceMillis: the virtual time from
    the last main action until all followers matched the main's state (None
    when they never did).
    """
    if not isinstance(script, ScenarioScript):
        script = parse_scenario(script)
    report = _Simulation(script, seed).run()
    report["seed"] = seed
    return report


def assert_consistent(report: Mapping[str, Any]) -> tuple[bool, list[str]]:
    """Re-derive the consistency verdict from a report alone.

    Fails when any follower's final (configId, pose) differs from the main's,
    or when any device's applied log violates seq monotonicity.  Returns
    (ok, diffs); diffs name the offending devices.
    """
    diffs = list(_scan_staleness(report.get("perDeviceAppliedLog", {})))
    main_id = report.get("mainDeviceId")
    states = report.get("finalStates", {})
    if main_id is None or main_id not in states:
        if any(state.get("open") for state in states.values()):
            diffs.append("no main device at quiescence")
        return (not diffs, diffs)
    main_state = states[main_id]
    for device_id, state in states.items():
        if device_id == main_id or not state.get("open"):
            continue
        if state.get("configId") != main_state.get("configId") or state.get(
            "pose"
        ) != main_state.get("pose"):
            diffs.append(
                f"{device_id}: final (config={state.get('configId')!r}, "
                f"seq={_seq_of(state.get('pose'))}) != main "
                f"(config={main_state.get('configId')!r}, seq={_seq_of(main_state.get('pose'))})"
            )
    return (not diffs, diffs)
