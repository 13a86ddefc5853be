"""The binding layer: native episodes behind a gym-style step API.

Observations follow the flat Box convention: the 1D LiDAR variant is a
float32 1084-vector (1080 normalized ranges followed by goal x, goal y and
the planar body velocity; the angular rate is dropped because the published
training regime commands zero rotation).  The rings variant returns the pair
(64x64 float32 occupancy grid, float32 5-vector goal/velocity state).

All state lives in the wrapped native environment; the binding adds only
preset bookkeeping (which spec to build on the next reset).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from navbench import (
    Action,
    Difficulty,
    EpisodeSpec,
    NavEnv,
    ProceduralMap,
    curriculum_update,
    make_test_suite,
    make_validation_suite,
)
from navbench.render import env_frame_array

TRAIN_CURRICULUM = "train-curriculum"
VALIDATION = "validation"


@dataclass(frozen=True)
class BoxSpace:
    low: np.ndarray
    high: np.ndarray
    shape: tuple
    dtype: type = np.float32


@dataclass(frozen=True)
class ActionSpace:
    low: np.ndarray
    high: np.ndarray
    shape: tuple = (3,)
    dtype: type = np.float32


def list_presets() -> list[str]:
    names = [TRAIN_CURRICULUM, VALIDATION]
    names.extend(
        f"test-{case.map_name}-{case.scenario_id}" for case in make_test_suite()
    )
    return names


def _preset_spec(name: str) -> EpisodeSpec:
    if name.startswith("test-"):
        try:
            _, map_name, sid = name.split("-")
            sid = int(sid)
        except ValueError as exc:
            raise KeyError(f"bad scenario id {name!r}") from exc
        for case in make_test_suite():
            if case.map_name == map_name and case.scenario_id == sid:
                return case.spec
    raise KeyError(f"unknown environment id {name!r}; see list_presets()")


class GymNavEnv:
    """One native environment instance behind the gym-style interface."""

    metadata = {"render_modes": ["rgb_array"]}

    def __init__(self, spec: EpisodeSpec, preset: str | None = None, seed: int = 0):
        self._base_spec = spec
        self._preset = preset
        self._session_seed = seed
        self._episode_index = 0
        self._env: NavEnv | None = None
        self._last_outcome: str | None = None
        self._closed = False

        # Preset state (only the curriculum carries state across resets).
        self._difficulty = Difficulty(0, 0)
        self._curriculum_rng = np.random.default_rng(seed)
        self._validation_suite = make_validation_suite() if preset == VALIDATION else None

        self.action_space = ActionSpace(
            low=np.full(3, -1.0, dtype=np.float32),
            high=np.full(3, 1.0, dtype=np.float32),
        )
        if spec.representation == "rings":
            grid = BoxSpace(
                low=np.zeros((64, 64), dtype=np.float32),
                high=np.ones((64, 64), dtype=np.float32),
                shape=(64, 64),
            )
            sr = BoxSpace(
                low=np.full(5, -np.inf, dtype=np.float32),
                high=np.full(5, np.inf, dtype=np.float32),
                shape=(5,),
            )
            self.observation_space = (grid, sr)
        else:
            n = spec.lidar.n_beams + 4
            low = np.full(n, -np.inf, dtype=np.float32)
            high = np.full(n, np.inf, dtype=np.float32)
            low[: spec.lidar.n_beams] = 0.0
            high[: spec.lidar.n_beams] = 1.0
            self.observation_space = BoxSpace(low=low, high=high, shape=(n,))

    # -- spec selection per preset ------------------------------------------

    def _next_spec(self, seed: int | None) -> EpisodeSpec:
        if self._preset == TRAIN_CURRICULUM:
            if self._last_outcome is not None:
                outcome = "success" if self._last_outcome == "success" else "failure"
                self._difficulty = curriculum_update(
                    self._difficulty, outcome, self._curriculum_rng
                )
            ep_seed = (
                seed
                if seed is not None
                else self._session_seed + self._episode_index
            )
            return replace(
                self._base_spec,
                seed=ep_seed,
                map_source=ProceduralMap(n_polygons=self._difficulty.n_polygons),
                n_agents=self._difficulty.n_agents,
            )
        if self._preset == VALIDATION:
            index = (seed if seed is not None else self._episode_index) % len(
                self._validation_suite
            )
            return self._validation_suite[index]
        if seed is not None:
            return replace(self._base_spec, seed=seed)
        return self._base_spec

    # -- gym API -------------------------------------------------------------

    def reset(self, seed: int | None = None):
        self._ensure_open()
        spec = self._next_spec(seed)
        self._episode_index += 1
        self._last_outcome = None
        self._env = NavEnv(spec)
        obs = self._env.reset()
        return self._encode(obs)

    def step(self, action):
        self._ensure_open()
        if self._env is None:
            raise RuntimeError("call reset before step")
        result = self._env.step(Action.from_array(np.asarray(action, dtype=float)))
        terminated = result.outcome in ("success", "collision")
        truncated = result.outcome == "timeout"
        if result.done:
            self._last_outcome = result.outcome
        info = dict(result.info)
        info["outcome"] = result.outcome
        info["reward_terms"] = {
            "success": result.reward.r_s,
            "collision": result.reward.r_c,
            "danger": result.reward.r_d,
            "progress": result.reward.r_p,
        }
        info["scan"] = np.asarray(result.observation.scan.ranges, dtype=float)
        info["s_r"] = np.asarray(result.observation.s_r, dtype=float)
        return (
            self._encode(result.observation),
            result.reward.total,
            terminated,
            truncated,
            info,
        )

    def render(self) -> np.ndarray:
        self._ensure_open()
        if self._env is None:
            raise RuntimeError("call reset before render")
        return env_frame_array(self._env)

    def close(self) -> None:
        self._env = None
        self._closed = True

    @property
    def difficulty(self) -> Difficulty:
        return self._difficulty

    @property
    def native(self) -> NavEnv:
        """The wrapped native environment (read-only use)."""
        return self._env

    def _ensure_open(self) -> None:
        if self._closed:
            raise RuntimeError("environment is closed")

    def _encode(self, obs):
        s_r = np.asarray(obs.s_r, dtype=np.float32)
        if self._base_spec.representation == "rings":
            return (np.asarray(obs.s_l, dtype=np.float32), s_r)
        flat = np.empty(len(obs.s_l) + 4, dtype=np.float32)
        flat[: len(obs.s_l)] = obs.s_l
        flat[len(obs.s_l):] = s_r[:4]
        return flat


def make(spec_or_id, seed: int = 0) -> GymNavEnv:
    """Build an environment from an EpisodeSpec or a preset id."""
    if isinstance(spec_or_id, EpisodeSpec):
        return GymNavEnv(spec_or_id, preset=None, seed=seed)
    name = str(spec_or_id)
    if name == TRAIN_CURRICULUM:
        base = EpisodeSpec(seed=seed, map_source=ProceduralMap(n_polygons=0), n_agents=0)
        return GymNavEnv(base, preset=TRAIN_CURRICULUM, seed=seed)
    if name == VALIDATION:
        suite = make_validation_suite()
        return GymNavEnv(suite[0], preset=VALIDATION, seed=seed)
    return GymNavEnv(_preset_spec(name), preset=None, seed=seed)


def reset(env: GymNavEnv, seed: int | None = None):
    return env.reset(seed=seed)


def step(env: GymNavEnv, action):
    return env.step(action)


def render(env: GymNavEnv) -> np.ndarray:
    return env.render()


def close(env: GymNavEnv) -> None:
    env.close()
