import json

import pytest

from citywall import (
    ScenarioError,
    assert_consistent,
    grid_configuration,
    parse_scenario,
    run_scenario,
)


def scenario(steps, latency=(0, 0), reorder=0.0, drop=0.0, configs=None, room="sim"):
    doc = {
        "roomId": room,
        "network": {
            "latencyMillisRange": list(latency),
            "reorderProbability": reorder,
            "dropProbability": drop,
        },
        "steps": steps,
    }
    if configs is not None:
        doc["configs"] = configs
    return doc


def joins(*devices, start=0, spacing=200):
    return [{"atMillis": start + i * spacing, "action": "join", "deviceId": d}
            for i, d in enumerate(devices)]


def poses(device, count, start, interval=33):
    return [{"atMillis": start + i * interval, "action": "pose", "deviceId": device}
            for i in range(count)]


# ---------------------------------------------------------------- parsing

def test_parse_rejects_unordered_and_unknown():
    with pytest.raises(ScenarioError):
        parse_scenario(scenario([
            {"atMillis": 100, "action": "join", "deviceId": "a"},
            {"atMillis": 50, "action": "join", "deviceId": "b"},
        ]))
    with pytest.raises(ScenarioError):
        parse_scenario(scenario([{"atMillis": 0, "action": "teleport", "deviceId": "a"}]))
    with pytest.raises(ScenarioError):
        parse_scenario(scenario([{"atMillis": 0, "action": "pose", "deviceId": "ghost"}]))
    with pytest.raises(ScenarioError):
        parse_scenario(scenario([], latency=(50, 10)))
    with pytest.raises(ScenarioError):
        parse_scenario(scenario([], reorder=1.5))


def test_parse_accepts_the_bundled_scripts(data_dir):
    for name in ("trivial", "dome_converge", "office_pan"):
        script = parse_scenario(data_dir.joinpath("scenarios", name + ".json").read_bytes())
        assert script.steps


# ---------------------------------------------------------------- basic runs

def test_trivial_scenario_converges_instantly(data_dir):
    report = run_scenario(data_dir.joinpath("scenarios", "trivial.json").read_bytes(), 0)
    assert report["violations"] == []
    assert report["convergenceMillis"] == 0.0
    ok, diffs = assert_consistent(report)
    assert ok and diffs == []
    # the one device is the main and applied all ten of its own poses
    main_state = report["finalStates"]["desk-main"]
    assert main_state["pose"]["seq"] == 10


def test_reports_are_deterministic(data_dir):
    raw = data_dir.joinpath("scenarios", "dome_converge.json").read_bytes()
    a = run_scenario(raw, 1234)
    b = run_scenario(raw, 1234)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    c = run_scenario(raw, 4321)
    assert json.dumps(a, sort_keys=True) != json.dumps(c, sort_keys=True)


def test_followers_end_on_the_mains_last_pose():
    steps = joins("m", "f1", "f2") + poses("m", 50, start=600)
    report = run_scenario(scenario(steps, latency=(5, 40), reorder=0.2), 7)
    assert report["violations"] == []
    for dev in ("f1", "f2"):
        assert report["finalStates"][dev]["pose"]["seq"] == 50
    ok, _ = assert_consistent(report)
    assert ok


def test_explicit_sequence_numbers_and_stale_drop():
    steps = joins("m", "f") + [
        {"atMillis": 500, "action": "pose", "deviceId": "m", "seq": 5,
         "position": [5.0, 0.0, 0.0]},
        {"atMillis": 600, "action": "pose", "deviceId": "m", "seq": 4,
         "position": [4.0, 0.0, 0.0]},
    ]
    report = run_scenario(scenario(steps), 0)
    # seq 4 is stale at the server and silently dropped
    assert report["finalStates"]["f"]["pose"]["seq"] == 5
    assert report["stats"]["staleRejected"] >= 1
    assert report["violations"] == []


def test_reorder_probability_exercises_late_frames():
    steps = joins("m", "f") + poses("m", 120, start=600, interval=10)
    calm = run_scenario(scenario(steps, latency=(10, 30)), 9)
    wild = run_scenario(scenario(steps, latency=(10, 30), reorder=0.5), 9)
    assert calm["stats"]["posesReordered"] == 0
    assert wild["stats"]["posesReordered"] > 10
    assert wild["violations"] == []  # staleness guard survives reordering


def test_drop_probability_loses_poses_but_never_regresses():
    # there is no retransmission, so the final update itself may be lost and
    # followers may legitimately finish behind the main; what must survive is
    # monotonicity: applied seqs only climb, and nobody gets ahead of the main
    steps = joins("m", "f") + poses("m", 100, start=600) + [
        {"atMillis": 10_000, "action": "pose", "deviceId": "m"},
    ]
    report = run_scenario(scenario(steps, latency=(0, 20), drop=0.3), 3)
    assert report["stats"]["posesDropped"] > 5
    hard = [v for v in report["violations"] if not v.startswith("quiescence:")]
    assert hard == []
    main_seq = report["finalStates"]["m"]["pose"]["seq"]
    f_seq = report["finalStates"]["f"]["pose"]["seq"]
    assert f_seq <= main_seq == 101


# ---------------------------------------------------------------- config switching

def grid_cfg():
    return grid_configuration(1, 2, 0.6, 0.4, 0.8, 0.1, 100.0, ["m", "f"]).to_json()


def test_switch_config_reaches_both_sides():
    steps = joins("m", "f") + [
        {"atMillis": 500, "action": "switch_config", "deviceId": "m",
         "configId": "grid-1x2"},
    ]
    report = run_scenario(scenario(steps, latency=(1, 10), configs=[grid_cfg()]), 2)
    assert report["violations"] == []
    assert report["finalStates"]["m"]["configId"] == "grid-1x2"
    assert report["finalStates"]["f"]["configId"] == "grid-1x2"
    assert report["switchOrder"] == ["grid-1x2"]
    assert report["finalStates"]["f"]["projection"] is not None


def test_non_main_switch_is_rejected():
    steps = joins("m", "f") + [
        {"atMillis": 500, "action": "switch_config", "deviceId": "f",
         "configId": "grid-1x2"},
    ]
    report = run_scenario(scenario(steps, latency=(1, 10), configs=[grid_cfg()]), 2)
    assert report["stats"]["errors"] == 1
    assert report["finalStates"]["m"]["configId"] is None
    assert report["switchOrder"] == []


def test_disconnect_during_stream_then_rejoin_snapshot():
    steps = (
        joins("m", "f")
        + poses("m", 30, start=600)
        + [{"atMillis": 2000, "action": "leave", "deviceId": "f"}]
        + poses("m", 30, start=2200)
        + [{"atMillis": 4000, "action": "join", "deviceId": "f"}]
        + poses("m", 5, start=4500)
    )
    report = run_scenario(scenario(steps, latency=(2, 20), reorder=0.1), 11)
    assert report["violations"] == []
    assert report["finalStates"]["f"]["pose"]["seq"] == 65
    ok, _ = assert_consistent(report)
    assert ok


def test_mainless_room_reports_no_convergence():
    steps = (
        joins("m", "f")
        + poses("m", 5, start=600)
        + [{"atMillis": 1500, "action": "leave", "deviceId": "m"}]
    )
    report = run_scenario(scenario(steps, latency=(1, 5)), 0)
    assert report["convergenceMillis"] is None
    assert report["mainDeviceId"] is None


def test_assert_step_records_midrun_divergence():
    steps = joins("m", "f") + poses("m", 10, start=600) + [
        {"atMillis": 2000, "action": "assert", "kind": "consistent"},
    ]
    report = run_scenario(scenario(steps, latency=(1, 5)), 0)
    assert report["violations"] == []


def test_corrupted_log_is_called_out():
    steps = joins("m", "f") + poses("m", 10, start=600)
    report = run_scenario(scenario(steps, latency=(1, 5)), 0)
    ok, diffs = assert_consistent(report)
    assert ok

    # sabotage the follower's final pose: the checker must name the device
    bad = json.loads(json.dumps(report))
    bad["finalStates"]["f"]["pose"]["seq"] = 9999
    ok, diffs = assert_consistent(bad)
    assert not ok
    assert any("f" in d for d in diffs)

    # sabotage the applied log so seqs decrease: staleness scan catches it
    worse = json.loads(json.dumps(report))
    log = worse["perDeviceAppliedLog"]["f"]
    if len(log) >= 2:
        log[0], log[-1] = log[-1], log[0]
    ok, diffs = assert_consistent(worse)
    assert not ok
