"""Reciprocal collision avoidance: a crowd crossing through itself.

Run:  python3 demos/02_crowd_crossing.py
Shows eight agents swapping sides of a circle without touching, then a full
environment episode where the robot joins the crossing.
"""

import math
import os

import numpy as np

from navbench import (
    Action,
    NavEnv,
    OrcaDisk,
    OrcaParams,
    OrcaRobotPolicy,
    make_test_suite,
    orca_velocity,
)
from navbench.render import render_trajectory

OUT = "demo_out"
os.makedirs(OUT, exist_ok=True)

# --- bare solver: 8 disks on a circle, goals on the opposite side ----------
params = OrcaParams()
rng = np.random.default_rng(0)
n, dt = 8, 0.2
positions = []
for k in range(n):
    r = 4.0 + float(rng.uniform(-0.25, 0.25))  # staggered arrivals
    ang = 2 * math.pi * k / n
    positions.append((r * math.cos(ang), r * math.sin(ang)))
goals = [(-x, -y) for x, y in positions]
velocities = [(0.0, 0.0)] * n

min_gap = math.inf
for step in range(400):
    new_v = []
    for i in range(n):
        dx, dy = goals[i][0] - positions[i][0], goals[i][1] - positions[i][1]
        d = math.hypot(dx, dy)
        pref = (0.0, 0.0) if d < 0.05 else (dx / d, dy / d)
        me = OrcaDisk(positions[i], velocities[i], 0.3)
        others = [OrcaDisk(positions[j], velocities[j], 0.3) for j in range(n) if j != i]
        new_v.append(orca_velocity(me, others, [], params, pref, max_speed=1.0, dt=dt))
    velocities = new_v
    positions = [(p[0] + v[0] * dt, p[1] + v[1] * dt) for p, v in zip(positions, velocities)]
    for i in range(n):
        for j in range(i + 1, n):
            gap = math.hypot(positions[i][0] - positions[j][0], positions[i][1] - positions[j][1]) - 0.6
            min_gap = min(min_gap, gap)
    if all(math.hypot(g[0] - p[0], g[1] - p[1]) < 0.3 for g, p in zip(goals, positions)):
        print(f"all agents crossed in {step + 1} steps; closest approach {min_gap * 100:.1f} cm")
        break

# --- full environment: the robot crosses with the crowd --------------------
case = next(c for c in make_test_suite() if c.map_name == "simple" and c.scenario_id == 9)
env = NavEnv(case.spec)
obs = env.reset()
policy = OrcaRobotPolicy()
actions = []
while True:
    action = policy.act(obs, env)
    actions.append(action.as_array())
    result = env.step(action)
    obs = result.observation
    if result.done:
        break
print(f"robot outcome in the circle-crossing scenario: {result.outcome} "
      f"after {env.step_index} steps")

render = render_trajectory(case.spec, np.array(actions), os.path.join(OUT, "crossing.png"))
print(f"wrote {render.path}")
