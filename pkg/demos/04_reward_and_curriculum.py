"""The shaped navigation reward and the adaptive difficulty curriculum.

Run:  python3 demos/04_reward_and_curriculum.py
"""

import numpy as np

from navbench import (
    Action,
    Difficulty,
    EpisodeSpec,
    NavEnv,
    ProceduralMap,
    curriculum_update,
)

# One episode, watching the reward terms. The robot starts aimed at a goal
# 2 m ahead and drives straight into it.
spec = EpisodeSpec(
    seed=0,
    map_source=ProceduralMap(n_polygons=0),
    robot_spawn=(0.0, 0.0, 0.0),
    goal=(2.0, 0.0),
)
env = NavEnv(spec)
env.reset()
total = 0.0
while True:
    result = env.step(Action(1.0, 0.0, 0.0))
    r = result.reward
    total += r.total
    print(
        f"step {env.step_index:2d}: progress {r.r_p:+.2f} danger {r.r_d:+.0f} "
        f"collision {r.r_c:+.0f} success {r.r_s:+.0f} -> total {r.total:+.2f}"
    )
    if result.done:
        break
print(f"episode outcome: {result.outcome}, accumulated reward {total:.2f}\n")

# The curriculum walks difficulty up on success and down on failure, one unit
# at a time, capped at 5 agents and 10 polygons.
rng = np.random.default_rng(0)
outcome_rng = np.random.default_rng(1)
d = Difficulty(0, 0)
history = [(d.n_agents, d.n_polygons)]
for episode in range(60):
    outcome = "success" if outcome_rng.random() < 0.7 else "failure"
    d = curriculum_update(d, outcome, rng)
    history.append((d.n_agents, d.n_polygons))
print("difficulty trajectory (agents, polygons), every 10 episodes:")
for i in range(0, len(history), 10):
    print(f"  episode {i:2d}: {history[i]}")
print(f"final difficulty: {d.n_agents} agents, {d.n_polygons} polygons")
