"""Turn a five-projector MPCDI calibration into a view configuration.

Run:  python3 demos/dome_calibration.py
"""

import math
import pathlib

from citywall import (
    DeviceRole,
    DeviceView,
    ViewConfiguration,
    mpcdi_frustum,
    parse_calibration,
    validate_configuration,
)

here = pathlib.Path(__file__).resolve().parent.parent
regions = parse_calibration((here / "data" / "dome5.mpcdi.xml").read_text())

print(f"{len(regions)} calibrated regions:")
for region in regions:
    a = region.angles
    w, h = region.resolution
    print(f"  {region.region_id}: yaw {a.yaw:+6.1f}  pitch {a.pitch:+5.1f}  "
          f"roll {a.roll:+4.1f}  opening {a.left_angle}/{a.right_angle} x "
          f"{a.up_angle}/{a.down_angle}  {w}x{h}")

NEAR, FAR = 0.1, 400.0
views = [
    DeviceView(device_id=f"proj-{r.region_id}",
               projection=mpcdi_frustum(r.angles, NEAR, FAR),
               role=DeviceRole.MAIN if i == 0 else DeviceRole.AUXILIARY)
    for i, r in enumerate(regions)
]
config = ViewConfiguration(config_id="dome5", views=tuple(views))

print(f"\nconfig {config.config_id!r}: main = {config.main_device_id}")
print("diagnostics:", validate_configuration(config.to_json()) or "none")

# A point far out along each region's own view axis must land on the clip
# x centreline (left/right openings are symmetric); y sits slightly below 0
# because the up opening (21) exceeds the down opening (19).
for view, region in zip(config.views, regions):
    a = region.angles
    yaw, pitch = math.radians(a.yaw), math.radians(a.pitch)
    forward = (-math.sin(yaw) * math.cos(pitch),
               math.sin(pitch),
               -math.cos(yaw) * math.cos(pitch))
    probe = tuple(100.0 * c for c in forward)
    x, y, _ = view.projection.project(probe)
    print(f"  {view.device_id} ({view.role.value}): axis point -> "
          f"clip ({x:+.6f}, {y:+.6f})")
