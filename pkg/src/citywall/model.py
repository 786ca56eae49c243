"""Shared domain types for the multi-device city visualization.

Everything in here is an immutable value object: construction validates the
local invariants and instances can be shared freely across threads.  Wire and
file representations live next to the types as ``to_json`` / ``from_json``
pairs; matrices are stored column-major everywhere (in memory, on the wire,
and in configuration files).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import BadIdentifierError

__all__ = [
    "RoomId",
    "DeviceId",
    "ProjectionMatrix",
    "CameraPose",
    "DeviceRole",
    "DeviceView",
    "ViewConfiguration",
    "ClassInfo",
    "PackageNode",
    "Application",
    "StructureModel",
    "CommunicationLink",
    "validate_structure",
]

_IDENTIFIER_RE = re.compile(r"^[A-Za-z0-9_-]+$")
_MAX_IDENTIFIER_LEN = 64
_MAX_SEQ = 2**64 - 1


class _Identifier(str):
    """Constrained identifier string: non-empty, <=64 chars, [A-Za-z0-9_-]."""

    def __new__(cls, value: str) -> "_Identifier":
        if not isinstance(value, str):
            raise BadIdentifierError(f"identifier must be a string, got {type(value).__name__}")
        if not value or len(value) > _MAX_IDENTIFIER_LEN or not _IDENTIFIER_RE.match(value):
            raise BadIdentifierError(
                f"invalid identifier {value!r}: need 1-{_MAX_IDENTIFIER_LEN} chars from [A-Za-z0-9_-]"
            )
        return super().__new__(cls, value)


class RoomId(_Identifier):
    """Identifier of a server-side room shared by all devices of one setup."""


class DeviceId(_Identifier):
    """Identifier of a single display device; unique within a room."""


def _as_float_tuple(values: Iterable[Any], expected: int, what: str) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    if len(out) != expected:
        raise ValueError(f"{what} needs {expected} numbers, got {len(out)}")
    if not all(math.isfinite(v) for v in out):
        raise ValueError(f"{what} must be finite, got {out}")
    return out


# Clip-space probe points used by the forward-looking check: a coarse grid
# strictly inside the clip volume.  A matrix passes if the preimage of at
# least one probe lies at negative view-space depth.
_CLIP_PROBES = np.array(
    [
        [x, y, z, 1.0]
        for x in (-0.9, 0.0, 0.9)
        for y in (-0.9, 0.0, 0.9)
        for z in (-0.9, 0.0, 0.9)
    ]
).T


@dataclass(frozen=True)
class ProjectionMatrix:
    """A 4x4 camera-to-clip transform, stored column-major.

    The matrix may embed a per-device rotation (and eye offset) relative to
    the shared camera, so a device's full transform is this matrix applied to
    shared-camera-space points.

    Invariants enforced at construction: all entries finite, |det| > 1e-12,
    and the matrix maps at least one real point into the clip volume with
    positive homogeneous w (i.e. it actually renders something, rather than
    clipping away the whole scene).
    """

    m: tuple[float, ...]

    def __post_init__(self) -> None:
        values = _as_float_tuple(self.m, 16, "projection matrix")
        object.__setattr__(self, "m", values)
        a = self.as_array()
        det = float(np.linalg.det(a))
        if abs(det) <= 1e-12:
            raise ValueError(f"projection matrix is not invertible (det={det:.3e})")
        if not self._looks_forward(a):
            raise ValueError(
                "projection matrix renders nothing: no clip-volume point has a "
                "preimage in front of the camera (positive homogeneous w)"
            )

    @staticmethod
    def _looks_forward(a: np.ndarray) -> bool:
        # A point is actually visible only when its clip w is positive, so a
        # usable perspective transform must give some probe of the clip volume
        # a preimage with w > 0.  Preimages with w < 0 are behind-the-camera
        # antipodes that dehomogenize to the same ratios but would be clipped.
        preimages = np.linalg.solve(a, _CLIP_PROBES)
        return bool((preimages[3] > 1e-12).any())

    @classmethod
    def from_array(cls, a: np.ndarray) -> "ProjectionMatrix":
        a = np.asarray(a, dtype=float)
        if a.shape != (4, 4):
            raise ValueError(f"expected a 4x4 array, got shape {a.shape}")
        return cls(tuple(a.flatten(order="F")))

    def as_array(self) -> np.ndarray:
        """Return the matrix as a 4x4 numpy array."""
        return np.array(self.m, dtype=float).reshape((4, 4), order="F")

    def project(self, point: Iterable[float]) -> tuple[float, float, float]:
        """Apply the transform to a 3D point and dehomogenize to clip space."""
        p = _as_float_tuple(point, 3, "point")
        clip = self.as_array() @ np.array([p[0], p[1], p[2], 1.0])
        if abs(clip[3]) < 1e-15:
            raise ValueError(f"point {p} projects to w=0")
        return (clip[0] / clip[3], clip[1] / clip[3], clip[2] / clip[3])

    def to_json(self) -> list[float]:
        return list(self.m)

    @classmethod
    def from_json(cls, data: Any) -> "ProjectionMatrix":
        if not isinstance(data, (list, tuple)):
            raise ValueError("projection must be a list of 16 numbers")
        return cls(tuple(data))


@dataclass(frozen=True)
class CameraPose:
    """A world-space camera pose broadcast from the main instance.

    Attributes:
        position: world position in meters.
        orientation: unit quaternion (w, x, y, z); renormalized on
            construction, rejected if degenerate.
        seq: monotone sequence number; the room server and every client drop
            poses whose seq does not exceed the newest one applied.
    """

    position: tuple[float, float, float]
    orientation: tuple[float, float, float, float]
    seq: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", _as_float_tuple(self.position, 3, "position"))
        q = _as_float_tuple(self.orientation, 4, "orientation")
        norm = math.sqrt(sum(c * c for c in q))
        if norm < 1e-6:
            raise ValueError(f"orientation quaternion is degenerate (|q|={norm:.3e})")
        object.__setattr__(self, "orientation", tuple(c / norm for c in q))
        if not isinstance(self.seq, int) or isinstance(self.seq, bool):
            raise ValueError(f"seq must be an int, got {self.seq!r}")
        if not 0 <= self.seq <= _MAX_SEQ:
            raise ValueError(f"seq out of unsigned 64-bit range: {self.seq}")

    def to_json(self) -> dict[str, Any]:
        return {
            "position": list(self.position),
            "orientation": list(self.orientation),
            "seq": self.seq,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "CameraPose":
        return cls(
            position=tuple(data["position"]),
            orientation=tuple(data["orientation"]),
            seq=data["seq"],
        )


class DeviceRole(str, Enum):
    """Role of a device within a view configuration."""

    MAIN = "main"
    AUXILIARY = "auxiliary"


@dataclass(frozen=True)
class DeviceView:
    """Assignment of one projection matrix to one device."""

    device_id: DeviceId
    projection: ProjectionMatrix
    role: DeviceRole

    def __post_init__(self) -> None:
        object.__setattr__(self, "device_id", DeviceId(self.device_id))
        object.__setattr__(self, "role", DeviceRole(self.role))

    def to_json(self) -> dict[str, Any]:
        return {
            "deviceId": str(self.device_id),
            "role": self.role.value,
            "projection": self.projection.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "DeviceView":
        return cls(
            device_id=DeviceId(data["deviceId"]),
            projection=ProjectionMatrix.from_json(data["projection"]),
            role=DeviceRole(data["role"]),
        )


@dataclass(frozen=True)
class ViewConfiguration:
    """A named per-device projection-matrix assignment.

    Exactly one view holds the main role, and device ids are unique.  This is
    the unit the main instance selects and the room server fans out.
    """

    config_id: str
    views: tuple[DeviceView, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.config_id, str) or not self.config_id:
            raise ValueError("configId must be a non-empty string")
        object.__setattr__(self, "views", tuple(self.views))
        seen: set[DeviceId] = set()
        mains = 0
        for view in self.views:
            if view.device_id in seen:
                raise ValueError(f"duplicate deviceId {view.device_id!r} in configuration")
            seen.add(view.device_id)
            if view.role is DeviceRole.MAIN:
                mains += 1
        if mains != 1:
            raise ValueError(f"configuration needs exactly one main view, found {mains}")

    @property
    def main_device_id(self) -> DeviceId:
        return next(v.device_id for v in self.views if v.role is DeviceRole.MAIN)

    def view_for(self, device_id: str) -> DeviceView | None:
        for view in self.views:
            if view.device_id == device_id:
                return view
        return None

    def to_json(self) -> dict[str, Any]:
        return {"configId": self.config_id, "views": [v.to_json() for v in self.views]}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ViewConfiguration":
        return cls(
            config_id=data["configId"],
            views=tuple(DeviceView.from_json(v) for v in data["views"]),
        )


def _check_name(name: Any, what: str) -> str:
    if not isinstance(name, str) or not name:
        raise ValueError(f"{what} name must be a non-empty string, got {name!r}")
    if "." in name:
        raise ValueError(f"{what} name {name!r} must not contain '.', it is an FQN separator")
    return name


@dataclass(frozen=True)
class ClassInfo:
    """A class inside a package; methodCount drives its building height."""

    name: str
    method_count: int

    def __post_init__(self) -> None:
        _check_name(self.name, "class")
        if not isinstance(self.method_count, int) or isinstance(self.method_count, bool):
            raise ValueError(f"methodCount must be an int, got {self.method_count!r}")
        if self.method_count < 0:
            raise ValueError(f"methodCount must be non-negative, got {self.method_count}")

    def to_json(self) -> dict[str, Any]:
        return {"name": self.name, "methodCount": self.method_count}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ClassInfo":
        return cls(name=data["name"], method_count=data["methodCount"])


@dataclass(frozen=True)
class PackageNode:
    """A package: nested sub-packages plus the classes directly inside it."""

    name: str
    sub_packages: tuple["PackageNode", ...] = ()
    classes: tuple[ClassInfo, ...] = ()

    def __post_init__(self) -> None:
        _check_name(self.name, "package")
        object.__setattr__(self, "sub_packages", tuple(self.sub_packages))
        object.__setattr__(self, "classes", tuple(self.classes))

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "subPackages": [p.to_json() for p in self.sub_packages],
            "classes": [c.to_json() for c in self.classes],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "PackageNode":
        return cls(
            name=data["name"],
            sub_packages=tuple(cls.from_json(p) for p in data.get("subPackages", [])),
            classes=tuple(ClassInfo.from_json(c) for c in data.get("classes", [])),
        )


@dataclass(frozen=True)
class Application:
    """One application of the visualized system: a forest of root packages."""

    name: str
    language: str
    root_packages: tuple[PackageNode, ...] = ()

    def __post_init__(self) -> None:
        _check_name(self.name, "application")
        if not isinstance(self.language, str):
            raise ValueError("language must be a string")
        object.__setattr__(self, "root_packages", tuple(self.root_packages))

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "language": self.language,
            "packages": [p.to_json() for p in self.root_packages],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Application":
        return cls(
            name=data["name"],
            language=data.get("language", ""),
            root_packages=tuple(PackageNode.from_json(p) for p in data.get("packages", [])),
        )


@dataclass(frozen=True)
class StructureModel:
    """The ingested software structure: applications of nested packages.

    Constructors of the node types only check local fields; the global
    invariants (package nesting is a proper tree, fully-qualified class names
    are unique) are reported by :func:`validate_structure` and guaranteed for
    every model produced by the ingestion path.
    """

    applications: tuple[Application, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "applications", tuple(self.applications))

    def class_fqns(self) -> set[str]:
        """All fully-qualified class names: app + dotted package path + class."""
        out: set[str] = set()

        def walk(prefix: str, pkg: PackageNode) -> None:
            path = f"{prefix}.{pkg.name}"
            for cls_info in pkg.classes:
                out.add(f"{path}.{cls_info.name}")
            for sub in pkg.sub_packages:
                walk(path, sub)

        for app in self.applications:
            for pkg in app.root_packages:
                walk(app.name, pkg)
        return out

    def to_json(self) -> dict[str, Any]:
        return {"applications": [a.to_json() for a in self.applications]}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "StructureModel":
        apps = data.get("applications")
        if not isinstance(apps, list):
            raise ValueError("structure document needs an 'applications' list")
        return cls(applications=tuple(Application.from_json(a) for a in apps))


def validate_structure(model: StructureModel) -> list[str]:
    """Check the global StructureModel invariants.

    Returns one human-readable violation per problem (empty list means the
    model is valid).  Violations name the offending entity path.  Checked:
    package nesting forms a tree (no node reachable twice, no cycles),
    package paths are unique, and fully-qualified class names are unique.
    """
    violations: list[str] = []
    seen_nodes: dict[int, str] = {}
    seen_fqns: dict[str, str] = {}
    seen_paths: set[str] = set()
    seen_apps: set[str] = set()

    def walk(path: str, pkg: PackageNode, ancestors: set[int]) -> None:
        if id(pkg) in ancestors:
            violations.append(f"{path}: cyclic package nesting")
            return
        if id(pkg) in seen_nodes:
            violations.append(
                f"{path}: package node also reachable as {seen_nodes[id(pkg)]} (shared child)"
            )
            return
        seen_nodes[id(pkg)] = path
        if path in seen_paths:
            violations.append(f"{path}: duplicate package path")
        seen_paths.add(path)
        for cls_info in pkg.classes:
            fqn = f"{path}.{cls_info.name}"
            if fqn in seen_fqns:
                violations.append(f"{fqn}: duplicate fully-qualified class name")
            else:
                seen_fqns[fqn] = path
        for sub in pkg.sub_packages:
            walk(f"{path}.{sub.name}", sub, ancestors | {id(pkg)})

    for app in model.applications:
        if app.name in seen_apps:
            violations.append(f"{app.name}: duplicate application name")
        seen_apps.add(app.name)
        for pkg in app.root_packages:
            walk(f"{app.name}.{pkg.name}", pkg, set())
    return violations


@dataclass(frozen=True)
class CommunicationLink:
    """Aggregated method calls from one class to another.

    Self-calls are aggregated separately by the trace pipeline and never
    become links; whether both endpoints resolve against a StructureModel is
    checked where model and links meet (aggregation and layout).
    """

    source_fqn: str
    target_fqn: str
    call_count: int

    def __post_init__(self) -> None:
        if not self.source_fqn or not self.target_fqn:
            raise ValueError("link endpoints must be non-empty FQNs")
        if self.source_fqn == self.target_fqn:
            raise ValueError(f"self link {self.source_fqn!r} is not a communication link")
        if not isinstance(self.call_count, int) or isinstance(self.call_count, bool):
            raise ValueError("callCount must be an int")
        if self.call_count < 1:
            raise ValueError(f"callCount must be positive, got {self.call_count}")

    def to_json(self) -> dict[str, Any]:
        return {
            "sourceFqn": self.source_fqn,
            "targetFqn": self.target_fqn,
            "callCount": self.call_count,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "CommunicationLink":
        return cls(
            source_fqn=data["sourceFqn"],
            target_fqn=data["targetFqn"],
            call_count=data["callCount"],
        )
