"""Error taxonomy shared across the package.

Every error carries a stable ``code`` string; those codes appear verbatim in
wire-level error frames, CLI diagnostics, and simulation reports, so they are
part of the public contract.  Class names follow Python convention (``Error``
suffix); codes do not.
"""

from __future__ import annotations

__all__ = [
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
]


class CitywallError(Exception):
    """Base class for all errors raised by this package."""

    code = "Error"


class BadIdentifierError(CitywallError):
    """Room or device identifier violates the allowed form."""

    code = "BadIdentifier"


class BadClipRangeError(CitywallError):
    """Clip planes do not satisfy 0 < near < far."""

    code = "BadClipRange"


class EyeOnScreenPlaneError(CitywallError):
    """Eye position lies on (or behind) the screen plane; no frustum exists."""

    code = "EyeOnScreenPlane"


class BadAnglesError(CitywallError):
    """Frustum angles violate their bounds."""

    code = "BadAngles"


class CountMismatchError(CitywallError):
    """Number of device ids does not match the number of grid tiles."""

    code = "CountMismatch"


class ParseError(CitywallError):
    """Input document is malformed (XML/JSON syntax or value level)."""

    code = "ParseError"


class UnsupportedProfileError(CitywallError):
    """Calibration file lacks the elements of the supported subset."""

    code = "UnsupportedProfile"


class AngleOutOfRangeError(CitywallError):
    """Calibration angle outside its legal interval."""

    code = "AngleOutOfRange"


class ValidationError(CitywallError):
    """Document parsed but violates a model invariant."""

    code = "ValidationError"


class UnresolvedLinkError(CitywallError):
    """Communication link endpoint does not resolve to a known class."""

    code = "UnresolvedLink"


class DuplicateDeviceError(CitywallError):
    """Device id already joined in this room."""

    code = "DuplicateDevice"


class NotMainError(CitywallError):
    """Operation reserved for the room's main device."""

    code = "NotMain"


class UnknownConfigError(CitywallError):
    """Requested configuration id is not in the room's library."""

    code = "UnknownConfig"


class InvalidConfigError(CitywallError):
    """Configuration document is structurally or geometrically unusable."""

    code = "InvalidConfig"


class ScenarioError(CitywallError):
    """Simulation scenario script is malformed or inconsistent."""

    code = "ScenarioError"
