import json
import math
import random
import time

import pytest

from citywall import (
    Application,
    Rect,
    CityLayout,
    ClassInfo,
    CommunicationLink,
    PackageNode,
    StructureModel,
    UnresolvedLinkError,
    ValidationError,
    aggregate_traces,
    layout_city,
    validate_layout,
)


def one_class_model(method_count=4):
    return StructureModel((
        Application("app", "java", (
            PackageNode("core", classes=(ClassInfo("Main", method_count),)),
        )),
    ))


# ---------------------------------------------------------------- hand example

def test_single_class_city_by_hand():
    # one 1x1 building with a 0.5 m gutter all around: 2x2 district at ground
    city = layout_city(one_class_model(4))
    assert len(city.districts) == 1
    assert len(city.buildings) == 1

    d = city.districts[0]
    assert d.package_path == "app.core"
    assert d.rect == Rect(0.0, 0.0, 2.0, 2.0)
    assert d.elevation == 0.0

    b = city.buildings[0]
    assert b.class_fqn == "app.core.Main"
    assert b.rect == Rect(0.5, 0.5, 1.0, 1.0)
    assert b.height == 2.0  # half a meter per method

    assert validate_layout(city) == []


def test_height_clamps():
    assert layout_city(one_class_model(0)).buildings[0].height == 0.5
    assert layout_city(one_class_model(1)).buildings[0].height == 0.5
    assert layout_city(one_class_model(1000)).buildings[0].height == 30.0


def test_nested_package_elevation_stacks():
    model = StructureModel((
        Application("app", "java", (
            PackageNode("a", classes=(ClassInfo("A", 2),), sub_packages=(
                PackageNode("b", classes=(ClassInfo("B", 2),), sub_packages=(
                    PackageNode("c", classes=(ClassInfo("C", 2),)),
                )),
            )),
        )),
    ))
    city = layout_city(model)
    by_path = {d.package_path: d for d in city.districts}
    assert by_path["app.a"].elevation == 0.0
    assert by_path["app.a.b"].elevation == pytest.approx(0.2)
    assert by_path["app.a.b.c"].elevation == pytest.approx(0.4)
    assert validate_layout(city) == []


def test_applications_line_up_left_to_right_by_name():
    model = StructureModel((
        Application("zeta", "java", (
            PackageNode("z", classes=(ClassInfo("Z", 1),)),
        )),
        Application("alpha", "java", (
            PackageNode("a", classes=(ClassInfo("A", 1),)),
        )),
    ))
    city = layout_city(model)
    by_path = {d.package_path: d for d in city.districts}
    assert by_path["alpha.a"].rect.x < by_path["zeta.z"].rect.x
    # 4 m of clear ground between application districts
    gap = by_path["zeta.z"].rect.x - (by_path["alpha.a"].rect.x + by_path["alpha.a"].rect.width)
    assert gap == pytest.approx(4.0)


# ---------------------------------------------------------------- arcs

def two_class_model():
    return StructureModel((
        Application("app", "java", (
            PackageNode("core", classes=(ClassInfo("A", 2), ClassInfo("B", 10))),
        )),
    ))


def test_arc_geometry():
    city = layout_city(two_class_model(),
                       [CommunicationLink("app.core.A", "app.core.B", 3)])
    assert len(city.arcs) == 1
    arc = city.arcs[0]
    assert arc.source_fqn == "app.core.A"
    assert arc.target_fqn == "app.core.B"
    assert not arc.inter_application

    start, apex, end = arc.control_points
    roofs = {b.class_fqn: (b.rect.x + b.rect.width / 2,
                           0.2 + b.height,
                           b.rect.z + b.rect.depth / 2)
             for b in city.buildings}
    assert start == pytest.approx((roofs["app.core.A"][0], roofs["app.core.A"][1],
                                   roofs["app.core.A"][2]))
    assert end == pytest.approx((roofs["app.core.B"][0], roofs["app.core.B"][1],
                                 roofs["app.core.B"][2]))
    # apex hangs over the midpoint, rising with the gap width
    assert apex[0] == pytest.approx((start[0] + end[0]) / 2)
    assert apex[2] == pytest.approx((start[2] + end[2]) / 2)
    run = math.hypot(end[0] - start[0], end[2] - start[2])
    assert apex[1] == pytest.approx(max(start[1], end[1]) + 0.3 * run)

    assert arc.width == pytest.approx(0.1 * math.log2(3 + 1))


def test_arc_width_clamps():
    def width_for(calls):
        city = layout_city(two_class_model(),
                           [CommunicationLink("app.core.A", "app.core.B", calls)])
        return city.arcs[0].width

    assert width_for(1) == pytest.approx(0.1)  # log2(2)
    assert width_for(2 ** 40) == 1.0
    heavy = width_for(500)
    light = width_for(2)
    assert light < heavy


def test_unresolved_link_rejected():
    with pytest.raises(UnresolvedLinkError):
        layout_city(two_class_model(),
                    [CommunicationLink("app.core.A", "app.core.Ghost", 1)])


def test_invalid_structure_rejected():
    bad = StructureModel((
        Application("app", "java", (
            PackageNode("core", classes=(ClassInfo("A", 1), ClassInfo("A", 2))),
        )),
    ))
    with pytest.raises(ValidationError):
        layout_city(bad)


# ---------------------------------------------------------------- fixture scale

def test_petclinic_city(petclinic_model, petclinic_records):
    agg = aggregate_traces(petclinic_records, petclinic_model)
    t0 = time.perf_counter()
    city = layout_city(petclinic_model, agg.links)
    elapsed = time.perf_counter() - t0

    assert elapsed < 1.0
    assert len(city.districts) == 24
    assert len(city.buildings) == 122
    assert len(city.arcs) == len(agg.links)
    assert validate_layout(city) == []
    assert any(a.inter_application for a in city.arcs)


def test_petclinic_layout_is_deterministic(petclinic_model, petclinic_records):
    agg = aggregate_traces(petclinic_records, petclinic_model)
    a = layout_city(petclinic_model, agg.links)
    b = layout_city(petclinic_model, agg.links)
    assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)


def test_layout_json_round_trip(petclinic_model):
    city = layout_city(petclinic_model)
    again = CityLayout.from_json(json.loads(json.dumps(city.to_json())))
    assert again == city


# ---------------------------------------------------------------- random models

def random_model(rng, max_apps=3, max_depth=3, max_classes=60):
    class_budget = rng.randint(1, max_classes)
    counter = [0]

    def gen_package(depth, label):
        classes = []
        for k in range(rng.randint(0, 4)):
            if counter[0] >= class_budget:
                break
            counter[0] += 1
            classes.append(ClassInfo(f"C{counter[0]}", rng.randint(0, 50)))
        subs = []
        if depth < max_depth:
            for s in range(rng.randint(0, 2)):
                subs.append(gen_package(depth + 1, f"{label}{s}"))
        if not classes and not subs:
            classes.append(ClassInfo(f"C{counter[0]}x", 1))
        return PackageNode(f"p{label}", sub_packages=tuple(subs), classes=tuple(classes))

    apps = []
    for a in range(rng.randint(1, max_apps)):
        roots = tuple(gen_package(1, f"{a}r{i}") for i in range(rng.randint(1, 2)))
        apps.append(Application(f"app{a}", "java", roots))
    return StructureModel(tuple(apps))


def test_random_models_always_validate():
    rng = random.Random(2024)
    for _ in range(120):
        model = random_model(rng)
        city = layout_city(model)
        assert validate_layout(city) == []
        assert len(city.buildings) == len(model.class_fqns())


def test_growing_a_class_never_shrinks_its_district():
    # packing is monotone in content: more methods, same rects; more classes,
    # same or larger district
    base = StructureModel((
        Application("app", "java", (
            PackageNode("core", classes=tuple(
                ClassInfo(f"C{i}", 3) for i in range(5))),
        )),
    ))
    grown = StructureModel((
        Application("app", "java", (
            PackageNode("core", classes=tuple(
                ClassInfo(f"C{i}", 3) for i in range(9))),
        )),
    ))
    a = layout_city(base).districts[0]
    b = layout_city(grown).districts[0]
    assert b.rect.width * b.rect.depth >= a.rect.width * a.rect.depth
