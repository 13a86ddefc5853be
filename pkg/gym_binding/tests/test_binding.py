import json
import math
import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

navbench_gym = pytest.importorskip("navbench_gym")

from navbench import (
    EpisodeSpec,
    NavEnv,
    ProceduralMap,
    read_dataset,
    spec_to_dict,
)
from navbench.scenarios import save_scenario
from navbench_gym import GymNavEnv, close, list_presets, make, render, reset, step

# Serves a pre-generated action stream so the harness CLI and the binding
# can be driven with the exact same float actions.
ACTION_SCRIPT = textwrap.dedent(
    """
    import json, sys
    import numpy as np

    seed = int(sys.argv[1])
    actions = np.random.default_rng(seed).uniform(-1.0, 1.0, size=(100, 3))
    i = 0
    for line in sys.stdin:
        a = actions[i % len(actions)]
        i += 1
        print(json.dumps({"a": [float(a[0]), float(a[1]), float(a[2])]}), flush=True)
    """
)


def random_spec(rng) -> EpisodeSpec:
    return EpisodeSpec(
        seed=int(rng.integers(0, 10_000)),
        map_source=ProceduralMap(n_polygons=int(rng.integers(0, 9))),
        n_agents=int(rng.integers(0, 5)),
        max_steps=100,
    )


class TestBindingFidelity:
    def test_transcripts_match_native_cmd_run_dumps(self, tmp_path):
        """[SECONDARY] acceptance: 10 random (spec, 100-action) pairs give
        binding transcripts element-identical to native harness recordings."""
        script = tmp_path / "actions.py"
        script.write_text(ACTION_SCRIPT)
        rng = np.random.default_rng(2024)
        for pair in range(10):
            spec = random_spec(rng)
            action_seed = int(rng.integers(0, 10_000))
            actions = np.random.default_rng(action_seed).uniform(-1.0, 1.0, (100, 3))

            spec_path = tmp_path / f"spec_{pair}.json"
            save_scenario(spec, spec_path)
            record_path = tmp_path / f"native_{pair}.nrd"
            proc = subprocess.run(
                [
                    "navbench",
                    "run",
                    "--scenario",
                    str(spec_path),
                    "--policy",
                    f"subprocess:{sys.executable} {script} {action_seed}",
                    "--episodes",
                    "1",
                    "--seed",
                    "0",
                    "--record",
                    str(record_path),
                ],
                capture_output=True,
                text=True,
            )
            assert proc.returncode == 0, proc.stderr
            episodes = read_dataset(record_path)
            assert len(episodes) == 1
            records = episodes[0].steps

            env = make(spec)
            obs = env.reset()
            prev_scan = np.asarray(env.native._last_observation.scan.ranges)
            prev_sr = np.asarray(env.native._last_observation.s_r)
            for t in range(len(records)):
                assert np.array_equal(records["s_l"][t], prev_scan.astype(np.float32))
                assert np.array_equal(records["s_r"][t], prev_sr.astype(np.float32))
                assert np.array_equal(
                    records["a"][t], np.asarray(actions[t], dtype=np.float32)
                )
                obs, reward, terminated, truncated, info = env.step(actions[t])
                assert records["r"][t] == np.float32(reward)
                assert bool(records["done"][t]) == (terminated or truncated)
                # Binding observation is the f32 encoding of the same state.
                assert np.array_equal(
                    obs[: len(info["scan"])],
                    (info["scan"] / spec.lidar.max_range).astype(np.float32),
                )
                assert np.array_equal(obs[-4:], info["s_r"][:4].astype(np.float32))
                prev_scan = info["scan"]
                prev_sr = info["s_r"]
                if terminated or truncated:
                    assert t == len(records) - 1
            env.close()


class TestBindingContract:
    def test_reset_seed_determinism(self):
        spec = EpisodeSpec(seed=3, map_source=ProceduralMap(n_polygons=4), n_agents=2)
        env = make(spec)
        a = env.reset(seed=0)
        b = env.reset(seed=0)
        assert np.array_equal(a, b)
        env.close()

    def test_observation_layout_1d(self):
        env = make(EpisodeSpec(seed=1, map_source=ProceduralMap(n_polygons=0)))
        obs = env.reset()
        assert obs.shape == (1084,)
        assert obs.dtype == np.float32
        assert env.observation_space.shape == (1084,)
        assert (obs[:1080] >= 0).all() and (obs[:1080] <= 1).all()
        env.close()

    def test_observation_layout_rings(self):
        env = make(
            EpisodeSpec(
                seed=1, map_source=ProceduralMap(n_polygons=2), representation="rings"
            )
        )
        grid, s_r = env.reset()
        assert grid.shape == (64, 64)
        assert s_r.shape == (5,)
        assert set(np.unique(grid)).issubset({0.0, 0.5, 1.0})
        env.close()

    def test_termination_semantics(self):
        spec = EpisodeSpec(
            seed=0,
            map_source=ProceduralMap(n_polygons=0),
            robot_spawn=(0.0, 0.0, 0.0),
            goal=(0.6, 0.0),
            max_steps=50,
        )
        env = make(spec)
        env.reset()
        terminated = truncated = False
        while not (terminated or truncated):
            _, reward, terminated, truncated, info = env.step([1.0, 0.0, 0.0])
        assert terminated and not truncated
        assert info["outcome"] == "success"
        with pytest.raises(RuntimeError, match="done"):
            env.step([0.0, 0.0, 0.0])
        env.close()

    def test_truncation_on_timeout(self):
        spec = EpisodeSpec(
            seed=0,
            map_source=ProceduralMap(n_polygons=0),
            robot_spawn=(0.0, 0.0, 0.0),
            goal=(5.0, 0.0),
            max_steps=3,
        )
        env = make(spec)
        env.reset()
        for _ in range(3):
            _, _, terminated, truncated, _ = env.step([0.0, 0.0, 0.0])
        assert truncated and not terminated
        env.close()

    def test_reward_terms_sum_to_total(self):
        spec = EpisodeSpec(seed=5, map_source=ProceduralMap(n_polygons=3), n_agents=1)
        env = make(spec)
        env.reset()
        for _ in range(10):
            _, reward, terminated, truncated, info = env.step([0.3, 0.1, 0.0])
            assert reward == sum(info["reward_terms"].values())
            if terminated or truncated:
                break
        env.close()

    def test_module_level_functions(self):
        env = make(EpisodeSpec(seed=2, map_source=ProceduralMap(n_polygons=0)))
        obs = reset(env, seed=1)
        out = step(env, [0.1, 0.0, 0.0])
        assert len(out) == 5
        img = render(env)
        assert img.ndim == 3 and img.shape[2] == 3
        close(env)
        with pytest.raises(RuntimeError, match="closed"):
            env.reset()


class TestPresets:
    def test_preset_ids(self):
        names = list_presets()
        assert "train-curriculum" in names
        assert "validation" in names
        assert len([n for n in names if n.startswith("test-")]) == 27

    def test_scenario_preset_runs(self):
        env = make("test-simple-7")
        obs = env.reset()
        assert obs.shape == (1084,)
        env.close()

    def test_validation_cycles_and_is_deterministic(self):
        env = make("validation")
        first = env.reset(seed=0)
        again = env.reset(seed=0)
        other = env.reset(seed=1)
        assert np.array_equal(first, again)
        assert not np.array_equal(first, other)
        env.close()

    def test_curriculum_moves_with_outcomes(self):
        env = make("train-curriculum", seed=0)
        assert env.difficulty.n_agents == 0 and env.difficulty.n_polygons == 0
        env.reset()
        # Force a success: zero difficulty means an empty arena.
        terminated = truncated = False
        goal = env.native.goal
        while not (terminated or truncated):
            pose = env.native.robot.pose
            dx, dy = goal[0] - pose.x, goal[1] - pose.y
            c, s = math.cos(pose.theta), math.sin(pose.theta)
            n = max(math.hypot(dx, dy), 1e-9)
            _, _, terminated, truncated, _ = env.step(
                [(c * dx + s * dy) / n, (-s * dx + c * dy) / n, 0.0]
            )
        env.reset()
        assert env.difficulty.n_agents + env.difficulty.n_polygons == 1
        env.close()
