import json
import math
import random

import numpy as np
import pytest

from citywall import (
    Application,
    BadIdentifierError,
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


# ---------------------------------------------------------------- identifiers

def test_identifier_accepts_url_safe_charset():
    assert RoomId("dome-42_A") == "dome-42_A"
    assert DeviceId("a" * 64) == "a" * 64


@pytest.mark.parametrize("bad", ["", "a" * 65, "has space", "dot.ted", "emoji☃", "slash/x"])
def test_identifier_rejects_junk(bad):
    with pytest.raises(BadIdentifierError):
        RoomId(bad)
    with pytest.raises(BadIdentifierError):
        DeviceId(bad)


# ---------------------------------------------------------------- projection matrix

def symmetric_projection(fovy_deg=90.0, near=1.0, far=10.0):
    t = near * math.tan(math.radians(fovy_deg) / 2)
    arr = np.array([
        [near / t, 0, 0, 0],
        [0, near / t, 0, 0],
        [0, 0, -(far + near) / (far - near), -2 * far * near / (far - near)],
        [0, 0, -1, 0],
    ])
    return ProjectionMatrix.from_array(arr)


def test_matrix_column_major_round_trip():
    p = symmetric_projection()
    arr = p.as_array()
    # storage order: first four floats are the first column
    assert tuple(p.m[:4]) == tuple(arr[:, 0])
    assert ProjectionMatrix.from_array(arr) == p
    assert ProjectionMatrix.from_json(p.to_json()) == p


def test_matrix_rejects_nonfinite_and_singular():
    with pytest.raises(ValueError):
        ProjectionMatrix((float("nan"),) + (0.0,) * 15)
    with pytest.raises(ValueError):
        ProjectionMatrix((0.0,) * 16)
    with pytest.raises(ValueError):
        ProjectionMatrix.from_json([1.0] * 15)


def test_matrix_rejects_all_clipping_negation():
    # -P projects to the same ratios but flips clip w negative everywhere,
    # so the GPU would cull the entire scene
    negated = -symmetric_projection().as_array()
    with pytest.raises(ValueError):
        ProjectionMatrix.from_array(negated)


def test_matrix_accepts_rear_facing_view():
    # a device aimed at the back wall is a legitimate display surface
    turned = symmetric_projection().as_array() @ np.diag([-1.0, 1.0, -1.0, 1.0])
    ProjectionMatrix.from_array(turned)


def test_matrix_projects_and_dehomogenizes():
    p = symmetric_projection()
    x, y, z = p.project((0.0, 0.0, -1.0))
    assert (x, y) == (0.0, 0.0)
    assert z == pytest.approx(-1.0)
    assert p.project((0.0, 0.0, -10.0))[2] == pytest.approx(1.0)


# ---------------------------------------------------------------- camera pose

def test_pose_renormalizes_orientation():
    pose = CameraPose((1.0, 2.0, 3.0), (2.0, 0.0, 0.0, 0.0), seq=7)
    assert pose.orientation == (1.0, 0.0, 0.0, 0.0)
    assert pose.seq == 7


def test_pose_rejects_degenerate_quaternion():
    with pytest.raises(ValueError):
        CameraPose((0, 0, 0), (1e-9, 0, 0, 0), seq=1)


@pytest.mark.parametrize("seq", [-1, 2 ** 64, 1.5, True])
def test_pose_rejects_bad_seq(seq):
    with pytest.raises((ValueError, TypeError)):
        CameraPose((0, 0, 0), (1, 0, 0, 0), seq=seq)


def test_pose_json_round_trip():
    pose = CameraPose((0.5, 1.5, -2.0), (0.0, 1.0, 0.0, 0.0), seq=41)
    again = CameraPose.from_json(pose.to_json())
    assert again == pose
    assert pose.to_json()["seq"] == 41


def test_pose_orientation_always_unit():
    rng = random.Random(11)
    for _ in range(200):
        q = tuple(rng.uniform(-5, 5) for _ in range(4))
        if sum(c * c for c in q) < 1e-10:
            continue
        pose = CameraPose((0, 0, 0), q, seq=1)
        assert sum(c * c for c in pose.orientation) == pytest.approx(1.0)


# ---------------------------------------------------------------- view configuration

def test_configuration_requires_exactly_one_main():
    p = symmetric_projection()
    aux = DeviceView("d2", p, DeviceRole.AUXILIARY)
    main = DeviceView("d1", p, DeviceRole.MAIN)
    cfg = ViewConfiguration("office", (main, aux))
    assert cfg.main_device_id == "d1"
    assert cfg.view_for("d2") is aux
    assert cfg.view_for("ghost") is None

    with pytest.raises(ValueError):
        ViewConfiguration("no-main", (aux,))
    with pytest.raises(ValueError):
        ViewConfiguration("two-mains", (main, DeviceView("d3", p, DeviceRole.MAIN)))
    with pytest.raises(ValueError):
        ViewConfiguration("dup", (main, DeviceView("d1", p, DeviceRole.AUXILIARY)))


def test_configuration_json_round_trip():
    p = symmetric_projection()
    cfg = ViewConfiguration("c1", (
        DeviceView("m", p, DeviceRole.MAIN),
        DeviceView("a", p, DeviceRole.AUXILIARY),
    ))
    doc = cfg.to_json()
    assert doc["configId"] == "c1"
    assert doc["views"][0]["deviceId"] == "m"
    assert doc["views"][0]["role"] == "main"
    assert ViewConfiguration.from_json(json.loads(json.dumps(doc))) == cfg


# ---------------------------------------------------------------- structure model

def leaf(name, mc=3):
    return ClassInfo(name, mc)


def test_structure_walks_fqns():
    model = StructureModel((
        Application("app", "java", (
            PackageNode("core", classes=(leaf("Main"), leaf("Util"))),
        )),
    ))
    assert sorted(model.class_fqns()) == ["app.core.Main", "app.core.Util"]
    assert validate_structure(model) == []


def test_structure_json_round_trip(petclinic_raw, petclinic_model):
    again = StructureModel.from_json(petclinic_raw)
    assert again == petclinic_model
    assert json.loads(json.dumps(again.to_json()))["applications"][0]["name"] == \
        petclinic_raw["applications"][0]["name"]


def test_structure_detects_duplicate_fqn():
    model = StructureModel((
        Application("app", "java", (
            PackageNode("core", classes=(leaf("Main"), leaf("Main"))),
        )),
    ))
    violations = validate_structure(model)
    assert len(violations) == 1
    assert "app.core.Main" in violations[0]


def test_structure_detects_duplicate_package_path():
    model = StructureModel((
        Application("app", "java", (
            PackageNode("core", classes=(leaf("A"),)),
            PackageNode("core", classes=(leaf("B"),)),
        )),
    ))
    assert any("app.core" in v for v in validate_structure(model))


def test_structure_detects_cycle_and_shared_child():
    inner = PackageNode("inner", classes=(leaf("X"),))
    # dataclasses are frozen; poke the cycle in through the back door
    outer = PackageNode("outer", sub_packages=(inner,))
    object.__setattr__(inner, "sub_packages", (outer,))
    cyclic = StructureModel((Application("app", "java", (outer,)),))
    assert any("cycl" in v.lower() for v in validate_structure(cyclic))

    shared = PackageNode("shared", classes=(leaf("Y"),))
    model = StructureModel((
        Application("a1", "java", (PackageNode("p", sub_packages=(shared,)),)),
        Application("a2", "java", (PackageNode("q", sub_packages=(shared,)),)),
    ))
    assert any("shared" in v.lower() or "once" in v.lower()
               for v in validate_structure(model))


def test_structure_detects_duplicate_application_names():
    model = StructureModel((
        Application("app", "java", (PackageNode("a", classes=(leaf("A"),)),)),
        Application("app", "java", (PackageNode("b", classes=(leaf("B"),)),)),
    ))
    assert any("app" in v for v in validate_structure(model))


def test_class_names_may_not_contain_dots():
    with pytest.raises(ValueError):
        ClassInfo("Outer.Inner", 1)
    with pytest.raises(ValueError):
        PackageNode("org.nested")
    with pytest.raises(ValueError):
        ClassInfo("Counts", -1)


# ---------------------------------------------------------------- links

def test_link_rejects_self_and_bad_count():
    CommunicationLink("a.B", "a.C", 1)
    with pytest.raises(ValueError):
        CommunicationLink("a.B", "a.B", 1)
    with pytest.raises(ValueError):
        CommunicationLink("a.B", "a.C", 0)
