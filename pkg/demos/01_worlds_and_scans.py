"""Build polygon worlds and cast LiDAR scans against them.

Run:  python3 demos/01_worlds_and_scans.py
Writes a scan/rings frame image to demo_out/.
"""

import os

import numpy as np

from navbench import LidarConfig, Pose, builtin_map, generate_map, raycast_scan
from navbench.render import frame_image

OUT = "demo_out"
os.makedirs(OUT, exist_ok=True)

# Procedural worlds are a pure function of their seed: same seed, same map.
world = generate_map(seed=7, n_polygons=8)
print(f"procedural map: {len(world.polygons)} polygons inside {world.bounds}")

# A clearance disk keeps obstacles away from a future spawn point.
clear = generate_map(seed=7, n_polygons=8, clearance_points=[(0.0, 0.0, 1.5)])
nearest_vertex = min(
    float(np.hypot(poly[:, 0], poly[:, 1]).min()) for poly in clear.polygons
)
print(f"with a clearance disk at the origin, the nearest vertex is {nearest_vertex:.2f} m out")

# Casting 1080 beams from the origin; beams that hit nothing report max_range.
cfg = LidarConfig()
scan = raycast_scan(world, [], Pose(0.0, 0.0, 0.0), cfg)
print(f"scan: min {scan.ranges.min():.2f} m, max {scan.ranges.max():.2f} m")

# Dynamic circles (here: a pair of pedestrian legs) occlude the beams.  Put
# the legs 2 m down the clearest beam so they are in open view.
clear_beam = int(np.argmax(scan.ranges))
ang = cfg.beam_angles()[clear_beam]
cx, cy = 2.0 * np.cos(ang), 2.0 * np.sin(ang)
legs = [((cx, cy + 0.1), 0.1), ((cx, cy - 0.1), 0.1)]
scan_legs = raycast_scan(world, legs, Pose(0.0, 0.0, 0.0), cfg)
blocked = int((scan_legs.ranges < scan.ranges - 1e-9).sum())
print(f"the legs shadow {blocked} beams")

frame_image(scan_legs.ranges, lidar=cfg).save(os.path.join(OUT, "world_scan.png"))

# The three built-in evaluation maps.
for name in ("simple", "complex", "realistic"):
    m = builtin_map(name)
    print(f"built-in map {name!r}: {len(m.polygons)} polygons")

print(f"wrote {OUT}/world_scan.png")
