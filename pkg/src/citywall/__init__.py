"""Synchronized multi-device 3D software-city visualization.

The package splits into five layers:

- ``model``: immutable domain types (ids, matrices, poses, configurations,
  the structure model) with wire/file serialization.
- ``frustum``: projection math — off-axis frusta from screen rectangles,
  tiled-grid configuration generation, calibration-file conversion.
- ``ingest`` / ``layout``: structure and trace files in, deterministic 3D
  city scene out.
- ``rooms`` / ``server``: the room hub (authority, fan-out) and its
  WebSocket/HTTP adapter.
- ``harness``: deterministic protocol simulation over a virtual network.
"""

from .errors import (
    AngleOutOfRangeError,
    BadAnglesError,
    BadClipRangeError,
    BadIdentifierError,
    CitywallError,
    CountMismatchError,
    DuplicateDeviceError,
    EyeOnScreenPlaneError,
    InvalidConfigError,
    NotMainError,
    ParseError,
    ScenarioError,
    UnknownConfigError,
    UnresolvedLinkError,
    UnsupportedProfileError,
    ValidationError,
)
from .frustum import (
    CalibrationRegion,
    FrustumAngles,
    ScreenRect,
    grid_configuration,
    mpcdi_frustum,
    off_axis_projection,
    parse_calibration,
    validate_configuration,
)
from .harness import (
    NetworkModel,
    ScenarioScript,
    Step,
    assert_consistent,
    parse_scenario,
    run_scenario,
)
from .ingest import (
    AggregationResult,
    TraceRecord,
    aggregate_traces,
    ingest_structure,
    read_trace_records,
)
from .layout import (
    Arc,
    Building,
    CityLayout,
    District,
    Rect,
    layout_city,
    validate_layout,
)
from .model import (
    Application,
    CameraPose,
    ClassInfo,
    CommunicationLink,
    DeviceId,
    DeviceRole,
    DeviceView,
    PackageNode,
    ProjectionMatrix,
    RoomId,
    StructureModel,
    ViewConfiguration,
    validate_structure,
)
from .rooms import RoomHub

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "CitywallError",
    "BadIdentifierError",
    "BadClipRangeError",
    "EyeOnScreenPlaneError",
    "BadAnglesError",
    "CountMismatchError",
    "ParseError",
    "UnsupportedProfileError",
    "AngleOutOfRangeError",
    "ValidationError",
    "UnresolvedLinkError",
    "DuplicateDeviceError",
    "NotMainError",
    "UnknownConfigError",
    "InvalidConfigError",
    "ScenarioError",
    # model
    "RoomId",
    "DeviceId",
    "ProjectionMatrix",
    "CameraPose",
    "DeviceRole",
    "DeviceView",
    "ViewConfiguration",
    "Application",
    "PackageNode",
    "ClassInfo",
    "StructureModel",
    "CommunicationLink",
    "validate_structure",
    # frustum
    "ScreenRect",
    "FrustumAngles",
    "CalibrationRegion",
    "off_axis_projection",
    "grid_configuration",
    "mpcdi_frustum",
    "parse_calibration",
    "validate_configuration",
    # ingest + layout
    "TraceRecord",
    "AggregationResult",
    "ingest_structure",
    "read_trace_records",
    "aggregate_traces",
    "Rect",
    "District",
    "Building",
    "Arc",
    "CityLayout",
    "layout_city",
    "validate_layout",
    # rooms
    "RoomHub",
    # harness
    "NetworkModel",
    "Step",
    "ScenarioScript",
    "parse_scenario",
    "run_scenario",
    "assert_consistent",
]
