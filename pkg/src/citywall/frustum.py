"""Projection mathematics for planar screens, tiled walls, and dome regions.

All functions are pure and thread-safe.  Conventions, fixed once for the
whole system: right-handed view space looking down -z, clip z in [-1, +1],
column vectors, matrices stored column-major.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import (
    AngleOutOfRangeError,
    BadAnglesError,
    BadClipRangeError,
    CountMismatchError,
    EyeOnScreenPlaneError,
    ParseError,
    UnsupportedProfileError,
)
from .model import (
    DeviceId,
    DeviceRole,
    DeviceView,
    ProjectionMatrix,
    ViewConfiguration,
    _as_float_tuple,
)

__all__ = [
    "ScreenRect",
    "FrustumAngles",
    "CalibrationRegion",
    "off_axis_projection",
    "grid_configuration",
    "mpcdi_frustum",
    "parse_calibration",
    "validate_configuration",
]

_ORTHO_TOL = 1e-9
_PLANE_TOL = 1e-9
_ANGLE_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class ScreenRect:
    """A planar display surface given by three corners, in meters.

    Attributes:
        pa: lower-left corner.
        pb: lower-right corner.
        pc: upper-left corner.

    The corner vectors pb-pa and pc-pa must be orthogonal (a rectangle, not
    a parallelogram) and non-degenerate.  The fourth corner is implied.
    """

    pa: tuple[float, float, float]
    pb: tuple[float, float, float]
    pc: tuple[float, float, float]

    def __post_init__(self) -> None:
        for name in ("pa", "pb", "pc"):
            object.__setattr__(self, name, _as_float_tuple(getattr(self, name), 3, name))
        right = np.subtract(self.pb, self.pa)
        up = np.subtract(self.pc, self.pa)
        w = float(np.linalg.norm(right))
        h = float(np.linalg.norm(up))
        if w <= 0.0 or h <= 0.0:
            raise ValueError("screen corners coincide; rectangle is degenerate")
        # Tolerance scales with edge lengths: corners in the millimeter-to-
        # meters range must not pass on magnitude alone.
        if abs(float(np.dot(right, up))) > _ORTHO_TOL * w * h:
            raise ValueError("screen corner vectors are not orthogonal; not a rectangle")

    @property
    def width(self) -> float:
        return float(np.linalg.norm(np.subtract(self.pb, self.pa)))

    @property
    def height(self) -> float:
        return float(np.linalg.norm(np.subtract(self.pc, self.pa)))

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Orthonormal screen basis (right, up, normal); normal points at the viewer."""
        vr = np.subtract(self.pb, self.pa)
        vr = vr / np.linalg.norm(vr)
        vu = np.subtract(self.pc, self.pa)
        vu = vu / np.linalg.norm(vu)
        vn = np.cross(vr, vu)
        vn = vn / np.linalg.norm(vn)
        return vr, vu, vn

    def corners(self) -> tuple[tuple[float, float, float], ...]:
        """All four corners: lower-left, lower-right, upper-left, upper-right."""
        pd = tuple(np.subtract(np.add(self.pb, self.pc), self.pa))
        return (self.pa, self.pb, self.pc, pd)


@dataclass(frozen=True)
class FrustumAngles:
    """Per-projector view direction and opening half-angles, in degrees.

    yaw/pitch/roll orient the frustum axis; the four half-angles give the
    opening left/right of and above/below that axis.  Half-angles must stay
    strictly inside (0, 90): tan() of either endpoint is useless.
    """

    yaw: float
    pitch: float
    roll: float
    left_angle: float
    right_angle: float
    up_angle: float
    down_angle: float

    def __post_init__(self) -> None:
        for name in ("yaw", "pitch", "roll"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if not math.isfinite(value) or not -180.0 <= value <= 180.0:
                raise BadAnglesError(f"{name}={value} out of [-180, 180]")
        for name in ("left_angle", "right_angle", "up_angle", "down_angle"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if (
                not math.isfinite(value)
                or value <= _ANGLE_EDGE_TOL
                or value >= 90.0 - _ANGLE_EDGE_TOL
            ):
                raise BadAnglesError(f"{name}={value} not strictly inside (0, 90) degrees")


@dataclass(frozen=True)
class CalibrationRegion:
    """One projector region from a calibration file."""

    region_id: str
    resolution: tuple[int, int]
    angles: FrustumAngles


def _check_clip_range(near: float, far: float) -> tuple[float, float]:
    near = float(near)
    far = float(far)
    if not (math.isfinite(near) and math.isfinite(far) and 0.0 < near < far):
        raise BadClipRangeError(f"need 0 < near < far, got near={near}, far={far}")
    return near, far


def _frustum_matrix(l: float, r: float, b: float, t: float, near: float, far: float) -> np.ndarray:
    """Perspective matrix for a near-plane window [l,r]x[b,t], clip z in [-1,1]."""
    m = np.zeros((4, 4))
    m[0, 0] = 2.0 * near / (r - l)
    m[0, 2] = (r + l) / (r - l)
    m[1, 1] = 2.0 * near / (t - b)
    m[1, 2] = (t + b) / (t - b)
    m[2, 2] = -(far + near) / (far - near)
    m[2, 3] = -2.0 * far * near / (far - near)
    m[3, 2] = -1.0
    return m


def off_axis_projection(
    screen: ScreenRect,
    eye: Iterable[float],
    near: float,
    far: float,
) -> ProjectionMatrix:
    """Projection for an arbitrarily placed planar screen viewed from ``eye``.

    The returned matrix maps the screen's corners, seen from the eye, onto
    the clip-volume corners (+-1, +-1) at every depth.  It includes the
    rotation aligning the screen basis with the view axes and the translation
    moving the eye to the origin, so it applies directly to shared-camera
    coordinates.

    Raises EyeOnScreenPlaneError if the eye is not strictly on the front side
    of the screen plane, BadClipRangeError unless 0 < near < far.
    """
    near, far = _check_clip_range(near, far)
    eye_v = np.array(_as_float_tuple(eye, 3, "eye"))
    vr, vu, vn = screen.basis()

    va = np.subtract(screen.pa, eye_v)
    vb = np.subtract(screen.pb, eye_v)
    vc = np.subtract(screen.pc, eye_v)

    # Distance from the eye to the screen plane, positive on the front side
    # (the side the normal points to).
    d = -float(np.dot(vn, va))
    if d <= _PLANE_TOL:
        raise EyeOnScreenPlaneError(
            f"eye lies on or behind the screen plane (signed distance {d:.3e})"
        )

    l = float(np.dot(vr, va)) * near / d
    r = float(np.dot(vr, vb)) * near / d
    b = float(np.dot(vu, va)) * near / d
    t = float(np.dot(vu, vc)) * near / d

    p = _frustum_matrix(l, r, b, t, near, far)

    rot = np.eye(4)
    rot[0, :3] = vr
    rot[1, :3] = vu
    rot[2, :3] = vn

    trans = np.eye(4)
    trans[:3, 3] = -eye_v

    return ProjectionMatrix.from_array(p @ rot @ trans)


def grid_configuration(
    rows: int,
    cols: int,
    tile_width: float,
    tile_height: float,
    eye_distance: float,
    near: float,
    far: float,
    device_ids: Iterable[str],
    config_id: str | None = None,
) -> ViewConfiguration:
    """Configuration for a flat rows x cols wall of equal tiles.

    The wall is centered on the eye axis at ``eye_distance`` in front of the
    shared camera; tiles are enumerated row-major starting at the top-left
    tile, matching ``device_ids`` order.  The first device takes the main
    role.  Adjacent tiles share exact edge coordinates, which is what makes
    the rendered halves continue seamlessly across bezels.

    Raises CountMismatchError if rows * cols != len(device_ids).
    """
    ids = [DeviceId(d) for d in device_ids]
    if rows < 1 or cols < 1:
        raise ValueError(f"grid needs at least one row and column, got {rows}x{cols}")
    if rows * cols != len(ids):
        raise CountMismatchError(
            f"grid {rows}x{cols} has {rows * cols} tiles but {len(ids)} device ids"
        )
    tile_width = float(tile_width)
    tile_height = float(tile_height)
    eye_distance = float(eye_distance)
    if tile_width <= 0.0 or tile_height <= 0.0 or eye_distance <= 0.0:
        raise ValueError("tile dimensions and eye distance must be positive")
    near, far = _check_clip_range(near, far)

    total_w = cols * tile_width
    total_h = rows * tile_height
    views = []
    for index, device_id in enumerate(ids):
        row, col = divmod(index, cols)
        x0 = -total_w / 2.0 + col * tile_width
        # rows count downward from the top edge
        y1 = total_h / 2.0 - row * tile_height
        y0 = y1 - tile_height
        screen = ScreenRect(
            pa=(x0, y0, -eye_distance),
            pb=(x0 + tile_width, y0, -eye_distance),
            pc=(x0, y1, -eye_distance),
        )
        role = DeviceRole.MAIN if index == 0 else DeviceRole.AUXILIARY
        views.append(
            DeviceView(
                device_id=device_id,
                projection=off_axis_projection(screen, (0.0, 0.0, 0.0), near, far),
                role=role,
            )
        )
    return ViewConfiguration(
        config_id=config_id if config_id is not None else f"grid-{rows}x{cols}",
        views=tuple(views),
    )


def _rotation_y(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rotation_x(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _rotation_z(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def mpcdi_frustum(angles: FrustumAngles, near: float, far: float) -> ProjectionMatrix:
    """Projection for a calibration region given by angles, as P dot R.

    P is the asymmetric perspective whose near-plane window derives from the
    four half-angles (l = -near*tan(left), r = near*tan(right), b and t
    likewise); R maps shared-camera space into the region's view frame.  The
    region's orientation is built by rotating yaw about +Y, then pitch about
    +X, then roll about +Z (each about the already-rotated axes); R is that
    orientation's inverse.  Zero rotation therefore reproduces the plain
    off-axis construction exactly.
    """
    near, far = _check_clip_range(near, far)
    l = -near * math.tan(math.radians(angles.left_angle))
    r = near * math.tan(math.radians(angles.right_angle))
    b = -near * math.tan(math.radians(angles.down_angle))
    t = near * math.tan(math.radians(angles.up_angle))
    p = _frustum_matrix(l, r, b, t, near, far)

    orientation = _rotation_y(angles.yaw) @ _rotation_x(angles.pitch) @ _rotation_z(angles.roll)
    rot = np.eye(4)
    rot[:3, :3] = orientation.T
    return ProjectionMatrix.from_array(p @ rot)


_FRUSTUM_CHILDREN = {
    "yaw": "yaw",
    "pitch": "pitch",
    "roll": "roll",
    "leftAngle": "left_angle",
    "rightAngle": "right_angle",
    "upAngle": "up_angle",
    "downAngle": "down_angle",
}


def parse_calibration(document: bytes | str) -> list[CalibrationRegion]:
    """Parse the supported calibration-file subset: regions with frusta.

    Returns one entry per ``<region>`` element in document order.  Raises
    ParseError for malformed XML or unreadable numbers, UnsupportedProfileError
    when required elements or attributes are missing, AngleOutOfRangeError when
    an angle parses but violates its bounds.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise ParseError(f"malformed calibration XML: {exc}") from exc

    regions: list[CalibrationRegion] = []
    region_elements = root.findall(".//region")
    if not region_elements:
        raise UnsupportedProfileError("calibration file contains no <region> elements")

    for region in region_elements:
        region_id = region.get("id")
        if not region_id:
            raise UnsupportedProfileError("<region> element is missing its id attribute")
        resolution: list[int] = []
        for attr in ("xResolution", "yResolution"):
            raw = region.get(attr)
            if raw is None:
                raise UnsupportedProfileError(f"region {region_id!r} is missing {attr}")
            try:
                value = int(raw)
            except ValueError as exc:
                raise ParseError(f"region {region_id!r}: {attr}={raw!r} is not an integer") from exc
            if value <= 0:
                raise ParseError(f"region {region_id!r}: {attr} must be positive, got {value}")
            resolution.append(value)

        frustum = region.find("frustum")
        if frustum is None:
            raise UnsupportedProfileError(f"region {region_id!r} has no <frustum> element")
        values: dict[str, float] = {}
        for tag, field_name in _FRUSTUM_CHILDREN.items():
            child = frustum.find(tag)
            if child is None:
                raise UnsupportedProfileError(f"region {region_id!r}: frustum lacks <{tag}>")
            try:
                values[field_name] = float((child.text or "").strip())
            except ValueError as exc:
                raise ParseError(
                    f"region {region_id!r}: <{tag}> content {child.text!r} is not a number"
                ) from exc
        try:
            angles = FrustumAngles(**values)
        except BadAnglesError as exc:
            raise AngleOutOfRangeError(f"region {region_id!r}: {exc}") from exc

        regions.append(
            CalibrationRegion(
                region_id=region_id,
                resolution=(resolution[0], resolution[1]),
                angles=angles,
            )
        )
    return regions


def _matrix_diagnostics(label: str, a: np.ndarray) -> list[str]:
    det = float(np.linalg.det(a))
    if abs(det) <= 1e-12:
        return [f"{label}: projection matrix is not invertible (det={det:.3e})"]
    if not ProjectionMatrix._looks_forward(a):
        return [f"{label}: degenerate frustum, no forward point maps into the clip volume"]
    return []


def validate_configuration(config: ViewConfiguration | Mapping[str, Any]) -> list[str]:
    """Check a view configuration for deployability.

    Accepts either a constructed ViewConfiguration or the raw parsed JSON
    document (so files that the strict constructor would reject can still be
    diagnosed).  Returns one message per problem; an empty list means the
    configuration can be served.
    """
    if isinstance(config, ViewConfiguration):
        diagnostics: list[str] = []
        for i, view in enumerate(config.views):
            diagnostics.extend(
                _matrix_diagnostics(f"views[{i}] ({view.device_id})", view.projection.as_array())
            )
        return diagnostics

    diagnostics = []
    if not isinstance(config, Mapping):
        return ["configuration must be a JSON object"]
    config_id = config.get("configId")
    if not isinstance(config_id, str) or not config_id:
        diagnostics.append("configId must be a non-empty string")
    views = config.get("views")
    if not isinstance(views, list):
        diagnostics.append("views must be a list")
        return diagnostics

    seen_ids: set[str] = set()
    mains = 0
    for i, view in enumerate(views):
        label = f"views[{i}]"
        if not isinstance(view, Mapping):
            diagnostics.append(f"{label}: view must be an object")
            continue
        raw_id = view.get("deviceId")
        try:
            device_id = DeviceId(raw_id)
            label = f"{label} ({device_id})"
            if device_id in seen_ids:
                diagnostics.append(f"{label}: duplicate deviceId")
            seen_ids.add(device_id)
        except Exception as exc:
            diagnostics.append(f"{label}: {exc}")
        role = view.get("role")
        if role == "main":
            mains += 1
        elif role != "auxiliary":
            diagnostics.append(f"{label}: role must be 'main' or 'auxiliary', got {role!r}")
        projection = view.get("projection")
        if (
            not isinstance(projection, list)
            or len(projection) != 16
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in projection)
            or not all(math.isfinite(v) for v in projection)
        ):
            diagnostics.append(f"{label}: projection must be a list of 16 finite numbers")
            continue
        a = np.array(projection, dtype=float).reshape((4, 4), order="F")
        diagnostics.extend(_matrix_diagnostics(label, a))
    if mains != 1:
        diagnostics.append(f"configuration needs exactly one main view, found {mains}")
    return diagnostics
