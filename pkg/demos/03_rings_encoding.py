"""The two LiDAR state encodings: normalized 1D vector and polar rings grid.

Run:  python3 demos/03_rings_encoding.py
"""

import numpy as np

from navbench import (
    LidarConfig,
    Pose,
    RingsConfig,
    Scan,
    generate_map,
    normalize_1d,
    radial_bin,
    raycast_scan,
    rings_encode,
)

cfg = LidarConfig()
rings = RingsConfig()
world = generate_map(seed=3, n_polygons=6)
scan = raycast_scan(world, [((2.0, 0.5), 0.3)], Pose(0, 0, 0), cfg)

# 1D representation: just the ranges scaled into [0, 1].
one_d = normalize_1d(scan, cfg.max_range)
print(f"1D encoding: shape {one_d.shape}, values in [{one_d.min():.3f}, {one_d.max():.3f}]")

# Radial bins are exponential: fine close to the robot, coarse far away.
edges = rings.radial_edges()
print("first four bin widths:", np.round(np.diff(edges[:5]), 3), "m")
print("last bin width:", round(float(edges[-1] - edges[-2]), 3), "m")
for d in (0.3, 1.0, 5.0, 24.9):
    print(f"  distance {d:5.1f} m -> radial bin {radial_bin(d, rings)}")

# The rings grid: 64 angular columns x 64 radial bins of {free, occupied,
# unknown}. Everything nearer than the hit is free, the hit cell is occupied,
# and the space behind it is unknown.
grid = rings_encode(scan, cfg.beam_angles(), rings).cells
values, counts = np.unique(grid, return_counts=True)
stats = {0.0: "free", 0.5: "unknown", 1.0: "occupied"}
print("cell mix:", {stats[v]: int(c) for v, c in zip(values, counts)})

column = grid[0]
occupied = int(np.flatnonzero(column == 1.0)[0])
print(f"column 0: free through bin {occupied - 1}, hit in bin {occupied}, "
      f"unknown beyond (hit at {scan.ranges[:17].min():.2f} m)")
