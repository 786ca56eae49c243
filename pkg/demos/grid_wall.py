"""Build a 3x3 monitor wall and show that neighbouring tiles line up.

Run:  python3 demos/grid_wall.py
"""

from citywall import grid_configuration, validate_configuration

ROWS, COLS = 3, 3
TILE_W, TILE_H = 0.598, 0.336   # 27" panel, metres
EYE_DIST = 0.85

ids = [f"wall-{r}{c}" for r in range(ROWS) for c in range(COLS)]
config = grid_configuration(ROWS, COLS, TILE_W, TILE_H, EYE_DIST,
                            near=0.1, far=500.0, device_ids=ids)

print(f"config {config.config_id!r}: {len(config.views)} views, "
      f"main = {config.main_device_id}")
print("diagnostics:", validate_configuration(config.to_json()) or "none")

# A point on the seam between the centre tile and its right neighbour must
# exit the centre view at clip x = +1 and enter the neighbour at x = -1.
seam = (TILE_W / 2, 0.0, -EYE_DIST)
centre = config.view_for("wall-11").projection
right = config.view_for("wall-12").projection
cx, cy, _ = centre.project(seam)
rx, ry, _ = right.project(seam)
print(f"seam point {seam}:")
print(f"  wall-11 clip ({cx:+.12f}, {cy:+.12f})")
print(f"  wall-12 clip ({rx:+.12f}, {ry:+.12f})")
print(f"  vertical mismatch {abs(cy - ry):.2e}")
