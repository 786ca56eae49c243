"""Replay a dome session over a lossy reordering network and check sync.

Run:  python3 demos/sync_simulation.py
"""

import json
import pathlib

from citywall import assert_consistent, run_scenario

here = pathlib.Path(__file__).resolve().parent.parent
scenario = json.loads(
    (here / "data" / "scenarios" / "dome_converge.json").read_text())

for seed in (1, 2, 3):
    report = run_scenario(scenario, seed)
    ok, diffs = assert_consistent(report)
    stats = report["stats"]
    print(f"seed {seed}: consistent={ok}  "
          f"convergence={report['convergenceMillis']:.1f}ms  "
          f"reordered={stats['posesReordered']}  "
          f"staleRejected={stats['staleRejected']}  "
          f"violations={len(report['violations'])}")

# the last report in detail
main = report["finalStates"]["dome-main"]
print(f"\nmain finished at seq {main['pose']['seq']} "
      f"in config {main['configId']!r}")
for device, log in sorted(report["perDeviceAppliedLog"].items()):
    if device == "dome-main":
        continue
    state = report["finalStates"][device]
    applied = sum(1 for e in log if e["kind"] == "pose")
    stale = sum(1 for e in log if e["kind"] == "stale_rejected")
    print(f"  {device}: final seq {state['pose']['seq']}, "
          f"applied {applied} poses, rejected {stale} stale")
