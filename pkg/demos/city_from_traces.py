"""Lay out a software city from a code model plus runtime traces.

Run:  python3 demos/city_from_traces.py
"""

import pathlib

from citywall import (
    aggregate_traces,
    ingest_structure,
    layout_city,
    read_trace_records,
    validate_layout,
)

here = pathlib.Path(__file__).resolve().parent.parent
model = ingest_structure(
    (here / "data" / "petclinic_structure.json").read_text())
records = read_trace_records(
    (here / "data" / "petclinic_traces.jsonl").read_text())

agg = aggregate_traces(records, model)
print(f"{len(records)} spans -> {len(agg.links)} links "
      f"({agg.dropped_spans} unmodeled spans dropped, "
      f"{agg.dangling_parents} dangling parents)")
for link in agg.links[:5]:
    print(f"  {link.source_fqn} -> {link.target_fqn}  x{link.call_count}")
print("  ...")
if agg.self_calls:
    busiest = max(agg.self_calls, key=agg.self_calls.get)
    print(f"most recursive class: {busiest} ({agg.self_calls[busiest]} self calls)")

city = layout_city(model, agg.links)
print(f"\ncity: {len(city.districts)} districts, {len(city.buildings)} buildings, "
      f"{len(city.arcs)} arcs")
print("layout problems:", validate_layout(city) or "none")

tallest = max(city.buildings, key=lambda b: b.height)
print(f"tallest building: {tallest.class_fqn} (height {tallest.height})")
widest = max(city.arcs, key=lambda a: a.width)
print(f"busiest arc: {widest.source_fqn} -> {widest.target_fqn} "
      f"(width {widest.width:.3f})")
