"""Deterministic 3D city layout: districts, buildings, communication arcs.

The scene lives in a y-up world.  Packages become stacked district slabs,
classes become buildings standing on their district's slab, aggregated
method calls become curved arcs between building roofs.  The whole layout is
a pure function of the structure model and the links: same input, same
output, down to the serialized bytes.

Ground rules (constants below): buildings have a fixed 1 m x 1 m footprint
and a height of 0.5 m per method clamped to [0.5, 30]; districts pack their
children by shelf packing into a near-square with 0.5 m gutters; each
nesting level raises a 0.2 m slab; applications line up along +x, 4 m apart,
sorted by name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from .errors import UnresolvedLinkError, ValidationError
from .model import (
    ClassInfo,
    CommunicationLink,
    PackageNode,
    StructureModel,
    validate_structure,
)

__all__ = [
    "Rect",
    "District",
    "Building",
    "Arc",
    "CityLayout",
    "layout_city",
    "validate_layout",
    "BUILDING_FOOTPRINT",
    "HEIGHT_PER_METHOD",
    "HEIGHT_RANGE",
    "GUTTER",
    "SLAB_THICKNESS",
    "APP_SPACING",
    "ARC_RISE_FACTOR",
    "ARC_WIDTH_RANGE",
]

BUILDING_FOOTPRINT = 1.0
HEIGHT_PER_METHOD = 0.5
HEIGHT_RANGE = (0.5, 30.0)
GUTTER = 0.5
SLAB_THICKNESS = 0.2
APP_SPACING = 4.0
ARC_RISE_FACTOR = 0.3
ARC_WIDTH_RANGE = (0.05, 1.0)

_CONTAIN_SLACK = 1e-9


@dataclass(frozen=True)
class Rect:
    """Axis-aligned ground rectangle: (x, z) is the minimum corner."""

    x: float
    z: float
    width: float
    depth: float

    def __post_init__(self) -> None:
        for name in ("x", "z", "width", "depth"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.width <= 0.0 or self.depth <= 0.0:
            raise ValueError(f"rect must have positive extent, got {self}")

    @property
    def x2(self) -> float:
        return self.x + self.width

    @property
    def z2(self) -> float:
        return self.z + self.depth

    @property
    def area(self) -> float:
        return self.width * self.depth

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.width / 2.0, self.z + self.depth / 2.0)

    def contains(self, other: "Rect", slack: float = _CONTAIN_SLACK) -> bool:
        return (
            other.x >= self.x - slack
            and other.z >= self.z - slack
            and other.x2 <= self.x2 + slack
            and other.z2 <= self.z2 + slack
        )

    def overlaps(self, other: "Rect", tol: float = _CONTAIN_SLACK) -> bool:
        """True if the rects share interior area beyond tolerance."""
        dx = min(self.x2, other.x2) - max(self.x, other.x)
        dz = min(self.z2, other.z2) - max(self.z, other.z)
        return dx > tol and dz > tol

    def to_json(self) -> list[float]:
        return [self.x, self.z, self.width, self.depth]

    @classmethod
    def from_json(cls, data: Sequence[float]) -> "Rect":
        return cls(*data)


@dataclass(frozen=True)
class District:
    """A package slab; elevation is the slab's base height above ground."""

    package_path: str
    rect: Rect
    elevation: float

    def to_json(self) -> dict[str, Any]:
        return {
            "packagePath": self.package_path,
            "rect": self.rect.to_json(),
            "elevation": self.elevation,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "District":
        return cls(
            package_path=data["packagePath"],
            rect=Rect.from_json(data["rect"]),
            elevation=float(data["elevation"]),
        )


@dataclass(frozen=True)
class Building:
    """A class box standing on its district's slab top."""

    class_fqn: str
    rect: Rect
    height: float

    def to_json(self) -> dict[str, Any]:
        return {
            "classFqn": self.class_fqn,
            "rect": self.rect.to_json(),
            "height": self.height,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Building":
        return cls(
            class_fqn=data["classFqn"],
            rect=Rect.from_json(data["rect"]),
            height=float(data["height"]),
        )


@dataclass(frozen=True)
class Arc:
    """A quadratic communication curve between two building roofs.

    control_points holds (start, apex, end); inter_application marks calls
    that cross application boundaries (rendered identically, but kept as an
    attribute for clients that want to distinguish them).
    """

    source_fqn: str
    target_fqn: str
    control_points: tuple[
        tuple[float, float, float],
        tuple[float, float, float],
        tuple[float, float, float],
    ]
    width: float
    inter_application: bool

    def to_json(self) -> dict[str, Any]:
        return {
            "sourceFqn": self.source_fqn,
            "targetFqn": self.target_fqn,
            "controlPoints": [list(p) for p in self.control_points],
            "width": self.width,
            "interApplication": self.inter_application,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Arc":
        points = data["controlPoints"]
        return cls(
            source_fqn=data["sourceFqn"],
            target_fqn=data["targetFqn"],
            control_points=tuple(tuple(float(v) for v in p) for p in points),
            width=float(data["width"]),
            inter_application=bool(data.get("interApplication", False)),
        )


@dataclass(frozen=True)
class CityLayout:
    """The complete computed scene, ready for serialization."""

    districts: tuple[District, ...]
    buildings: tuple[Building, ...]
    arcs: tuple[Arc, ...]

    def to_json(self) -> dict[str, Any]:
        return {
            "districts": [d.to_json() for d in self.districts],
            "buildings": [b.to_json() for b in self.buildings],
            "arcs": [a.to_json() for a in self.arcs],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "CityLayout":
        return cls(
            districts=tuple(District.from_json(d) for d in data.get("districts", [])),
            buildings=tuple(Building.from_json(b) for b in data.get("buildings", [])),
            arcs=tuple(Arc.from_json(a) for a in data.get("arcs", [])),
        )


def building_height(method_count: int) -> float:
    low, high = HEIGHT_RANGE
    return min(high, max(low, HEIGHT_PER_METHOD * method_count))


def arc_width(call_count: int) -> float:
    low, high = ARC_WIDTH_RANGE
    return min(high, max(low, 0.1 * math.log2(call_count + 1)))


def _pack(sizes: Sequence[tuple[float, float]]) -> tuple[list[tuple[float, float]], float, float]:
    """Shelf-pack items of (width, depth) into a near-square area.

    Returns per-item minimum corners plus the content extent.  Items are
    placed left to right on shelves, GUTTER apart; a new shelf starts when
    the next item would cross the width limit.  The limit is the square root
    of the total gutter-padded area, widened if any single item is wider.
    """
    if not sizes:
        return [], 0.0, 0.0
    padded_area = sum((w + GUTTER) * (d + GUTTER) for w, d in sizes)
    limit = max(math.sqrt(padded_area), max(w for w, _ in sizes))

    positions: list[tuple[float, float]] = []
    x = 0.0
    z = 0.0
    shelf_depth = 0.0
    content_w = 0.0
    for w, d in sizes:
        if x > 0.0 and x + w > limit + 1e-12:
            z += shelf_depth + GUTTER
            x = 0.0
            shelf_depth = 0.0
        positions.append((x, z))
        content_w = max(content_w, x + w)
        shelf_depth = max(shelf_depth, d)
        x += w + GUTTER
    content_d = z + shelf_depth
    return positions, content_w, content_d


@dataclass
class _Node:
    """Sizing-pass result for one package: local geometry, children relative."""

    path: str
    width: float
    depth: float
    children: list[tuple[float, float, "_Node"]]
    buildings: list[tuple[float, float, str, float]]  # dx, dz, fqn, height


def _measure_package(pkg: PackageNode, path: str) -> _Node:
    sub_nodes = [_measure_package(sub, f"{path}.{sub.name}") for sub in pkg.sub_packages]
    sub_nodes.sort(key=lambda n: (-(n.width * n.depth), n.path))
    classes = sorted(pkg.classes, key=lambda c: c.name)

    sizes = [(n.width, n.depth) for n in sub_nodes]
    sizes += [(BUILDING_FOOTPRINT, BUILDING_FOOTPRINT)] * len(classes)
    positions, content_w, content_d = _pack(sizes)

    children = []
    buildings = []
    for (px, pz), node in zip(positions, sub_nodes):
        children.append((px + GUTTER, pz + GUTTER, node))
    for (px, pz), cls in zip(positions[len(sub_nodes):], classes):
        buildings.append(
            (px + GUTTER, pz + GUTTER, f"{path}.{cls.name}", building_height(cls.method_count))
        )
    return _Node(
        path=path,
        width=content_w + 2 * GUTTER,
        depth=content_d + 2 * GUTTER,
        children=children,
        buildings=buildings,
    )


def _place_node(
    node: _Node,
    origin_x: float,
    origin_z: float,
    depth_level: int,
    districts: list[District],
    buildings: list[Building],
    roofs: dict[str, tuple[float, float, float]],
) -> None:
    elevation = depth_level * SLAB_THICKNESS
    districts.append(
        District(
            package_path=node.path,
            rect=Rect(origin_x, origin_z, node.width, node.depth),
            elevation=elevation,
        )
    )
    base_y = elevation + SLAB_THICKNESS
    for dx, dz, fqn, height in node.buildings:
        rect = Rect(origin_x + dx, origin_z + dz, BUILDING_FOOTPRINT, BUILDING_FOOTPRINT)
        buildings.append(Building(class_fqn=fqn, rect=rect, height=height))
        cx, cz = rect.center
        roofs[fqn] = (cx, base_y + height, cz)
    for dx, dz, child in node.children:
        _place_node(child, origin_x + dx, origin_z + dz, depth_level + 1, districts, buildings, roofs)


def layout_city(
    model: StructureModel, links: Iterable[CommunicationLink] = ()
) -> CityLayout:
    """Compute the deterministic city scene for a model and its links.

    Raises ValidationError if the model breaks its invariants and
    UnresolvedLinkError if a link endpoint names a class the model lacks.
    """
    violations = validate_structure(model)
    if violations:
        raise ValidationError(f"model is not valid: {'; '.join(violations)}")

    links = sorted(links, key=lambda l: (l.source_fqn, l.target_fqn))
    fqns = model.class_fqns()
    for link in links:
        for endpoint in (link.source_fqn, link.target_fqn):
            if endpoint not in fqns:
                raise UnresolvedLinkError(f"link endpoint {endpoint!r} is not in the model")

    districts: list[District] = []
    buildings: list[Building] = []
    roofs: dict[str, tuple[float, float, float]] = {}

    offset_x = 0.0
    for app in sorted(model.applications, key=lambda a: a.name):
        nodes = [_measure_package(pkg, f"{app.name}.{pkg.name}") for pkg in app.root_packages]
        nodes.sort(key=lambda n: (-(n.width * n.depth), n.path))
        positions, content_w, _content_d = _pack([(n.width, n.depth) for n in nodes])
        for (px, pz), node in zip(positions, nodes):
            _place_node(node, offset_x + px, pz, 0, districts, buildings, roofs)
        if nodes:
            offset_x += content_w + APP_SPACING

    arcs: list[Arc] = []
    for link in links:
        sx, sy, sz = roofs[link.source_fqn]
        tx, ty, tz = roofs[link.target_fqn]
        horizontal = math.hypot(tx - sx, tz - sz)
        apex = (
            (sx + tx) / 2.0,
            max(sy, ty) + ARC_RISE_FACTOR * horizontal,
            (sz + tz) / 2.0,
        )
        arcs.append(
            Arc(
                source_fqn=link.source_fqn,
                target_fqn=link.target_fqn,
                control_points=((sx, sy, sz), apex, (tx, ty, tz)),
                width=arc_width(link.call_count),
                inter_application=link.source_fqn.split(".", 1)[0]
                != link.target_fqn.split(".", 1)[0],
            )
        )

    return CityLayout(districts=tuple(districts), buildings=tuple(buildings), arcs=tuple(arcs))


def _package_path_of(class_fqn: str) -> str:
    return class_fqn.rsplit(".", 1)[0]


def _parent_path(package_path: str) -> str:
    return package_path.rsplit(".", 1)[0]


def validate_layout(layout: CityLayout) -> list[str]:
    """Check the layout invariants; returns one message per violation.

    Checked: every building is contained in its own package's district;
    sibling districts (same parent path) do not overlap; buildings within one
    district do not overlap; district elevation equals nesting depth times
    the slab thickness.
    """
    problems: list[str] = []
    district_by_path: dict[str, District] = {}
    for district in layout.districts:
        if district.package_path in district_by_path:
            problems.append(f"{district.package_path}: duplicate district path")
        district_by_path[district.package_path] = district

    for district in layout.districts:
        # package depth: segments after the application name, minus one
        depth = district.package_path.count(".") - 1
        expected = depth * SLAB_THICKNESS
        if abs(district.elevation - expected) > 1e-9:
            problems.append(
                f"{district.package_path}: elevation {district.elevation} != "
                f"depth {depth} x {SLAB_THICKNESS}"
            )
        parent = _parent_path(district.package_path)
        parent_district = district_by_path.get(parent)
        if parent_district is not None and not parent_district.rect.contains(district.rect):
            problems.append(
                f"{district.package_path}: district rect leaves its parent {parent}"
            )

    by_district: dict[str, list[Building]] = {}
    for building in layout.buildings:
        path = _package_path_of(building.class_fqn)
        district = district_by_path.get(path)
        if district is None:
            problems.append(f"{building.class_fqn}: no district at {path}")
            continue
        if not district.rect.contains(building.rect):
            problems.append(f"{building.class_fqn}: building rect leaves district {path}")
        by_district.setdefault(path, []).append(building)

    siblings: dict[str, list[District]] = {}
    for district in layout.districts:
        siblings.setdefault(_parent_path(district.package_path), []).append(district)
    for group in siblings.values():
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                if a.rect.overlaps(b.rect):
                    problems.append(
                        f"sibling districts overlap: {a.package_path} and {b.package_path}"
                    )

    for path, group in by_district.items():
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                if a.rect.overlaps(b.rect):
                    problems.append(
                        f"buildings overlap in {path}: {a.class_fqn} and {b.class_fqn}"
                    )
        # a building must not run under a sub-district slab either
        for child in siblings.get(path, []):
            for building in group:
                if building.rect.overlaps(child.rect):
                    problems.append(
                        f"building {building.class_fqn} overlaps district {child.package_path}"
                    )
    return problems
