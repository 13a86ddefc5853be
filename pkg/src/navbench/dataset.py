"""Binary episode recording (NRD1) and training-data generation.

NRD1 is a little-endian fixed-record format:

    header (32 bytes): magic "NRD1", version u32, n_episodes u64,
                       scan_dim u32, sr_dim u32, action_dim u32, dt f32
    per episode:       n_steps u64, spec_hash u64, then n_steps records

Each step record stores the raw scan in meters (not normalized), the
goal/velocity state, the action, the reward total and a done byte.  Records
are fixed-size, so datasets support random access by offset.
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .agents import Action
from .env import (
    EpisodeSpec,
    NavEnv,
    ProceduralMap,
    RandomLayout,
    StepResult,
    spec_hash,
)
from .policies import OrcaRobotPolicy

MAGIC = b"NRD1"
VERSION = 1
SCAN_DIM = 1080
SR_DIM = 5
ACTION_DIM = 3

STEP_DTYPE = np.dtype(
    [
        ("s_l", "<f4", (SCAN_DIM,)),
        ("s_r", "<f4", (SR_DIM,)),
        ("a", "<f4", (ACTION_DIM,)),
        ("r", "<f4"),
        ("done", "u1"),
    ]
)
STEP_RECORD_SIZE = STEP_DTYPE.itemsize  # 1080*4 + 5*4 + 3*4 + 4 + 1

_HEADER = struct.Struct("<4sIQIIIf")
_EPISODE_HEADER = struct.Struct("<QQ")

# Training-data generation draws the per-episode crowd size from this range,
# above the curriculum cap, so dynamic obstacles are well represented.
TRAINING_AGENTS_RANGE = (5, 10)
TRAINING_POLYGONS_RANGE = (0, 10)


class DatasetFormatError(ValueError):
    """The file is not a well-formed NRD1 dataset."""


@dataclass
class EpisodeRecord:
    """One recorded episode: a structured step array plus its spec hash.

    A well-formed episode has done=1 exactly on its final step; truncated
    episodes (cut off mid-run) carry no terminal step and are flagged.
    """

    steps: np.ndarray
    spec_hash: int = 0
    truncated: bool = False

    def __post_init__(self) -> None:
        self.steps = np.asarray(self.steps, dtype=STEP_DTYPE)

    def validate(self) -> None:
        done = self.steps["done"]
        n = len(done)
        if self.truncated:
            if n and done.any():
                raise ValueError("truncated episode must not contain a terminal step")
            return
        if n == 0:
            raise ValueError("non-truncated episode must contain at least one step")
        if done[-1] != 1 or done[:-1].any():
            raise ValueError("episode must end with exactly one done=1 step")

    def __eq__(self, other) -> bool:
        if not isinstance(other, EpisodeRecord):
            return NotImplemented
        return (
            self.spec_hash == other.spec_hash
            and self.truncated == other.truncated
            and len(self.steps) == len(other.steps)
            and bool(np.array_equal(self.steps, other.steps))
        )


def make_step_record(
    s_l: Sequence[float],
    s_r: Sequence[float],
    action: Sequence[float],
    reward: float,
    done: bool,
) -> np.ndarray:
    rec = np.zeros((), dtype=STEP_DTYPE)
    rec["s_l"] = np.asarray(s_l, dtype=np.float32)
    rec["s_r"] = np.asarray(s_r, dtype=np.float32)
    rec["a"] = np.asarray(action, dtype=np.float32)
    rec["r"] = np.float32(reward)
    rec["done"] = 1 if done else 0
    return rec


def dataset_byte_length(step_counts: Sequence[int]) -> int:
    """Exact file size for episodes with the given step counts."""
    return _HEADER.size + sum(
        _EPISODE_HEADER.size + n * STEP_RECORD_SIZE for n in step_counts
    )


def write_dataset(path, episodes: Sequence[EpisodeRecord], dt: float = 0.2) -> None:
    """Write episodes to an NRD1 file; the result is self-describing."""
    for i, ep in enumerate(episodes):
        try:
            ep.validate()
        except ValueError as exc:
            raise ValueError(f"episode {i}: {exc}") from exc
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                MAGIC, VERSION, len(episodes), SCAN_DIM, SR_DIM, ACTION_DIM, dt
            )
        )
        for ep in episodes:
            fh.write(_EPISODE_HEADER.pack(len(ep.steps), ep.spec_hash))
            fh.write(ep.steps.tobytes())
        fh.flush()


@dataclass
class DatasetMeta:
    version: int
    n_episodes: int
    scan_dim: int
    sr_dim: int
    action_dim: int
    dt: float


def read_dataset_meta(path) -> DatasetMeta:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
    if len(header) < _HEADER.size:
        raise DatasetFormatError(f"{path}: file shorter than the 32-byte header")
    magic, version, n_episodes, scan_dim, sr_dim, action_dim, dt = _HEADER.unpack(header)
    if magic != MAGIC:
        raise DatasetFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise DatasetFormatError(f"{path}: unsupported version {version}")
    if (scan_dim, sr_dim, action_dim) != (SCAN_DIM, SR_DIM, ACTION_DIM):
        raise DatasetFormatError(
            f"{path}: unexpected dimensions ({scan_dim}, {sr_dim}, {action_dim})"
        )
    return DatasetMeta(version, n_episodes, scan_dim, sr_dim, action_dim, dt)


def read_dataset(path) -> list[EpisodeRecord]:
    """Read an NRD1 file.

    A file cut off mid-episode yields the complete prefix: whole episodes,
    plus the final episode's complete records flagged as truncated.  A
    warning reporting the byte offset is emitted in that case.
    """
    meta = read_dataset_meta(path)
    with open(path, "rb") as fh:
        data = fh.read()
    episodes: list[EpisodeRecord] = []
    offset = _HEADER.size
    for _ in range(meta.n_episodes):
        if offset + _EPISODE_HEADER.size > len(data):
            warnings.warn(f"{path}: truncated at offset {len(data)}")
            break
        n_steps, ep_hash = _EPISODE_HEADER.unpack_from(data, offset)
        offset += _EPISODE_HEADER.size
        want = n_steps * STEP_RECORD_SIZE
        have = len(data) - offset
        if have < want:
            complete = have // STEP_RECORD_SIZE
            steps = np.frombuffer(
                data, dtype=STEP_DTYPE, count=complete, offset=offset
            ).copy()
            episodes.append(
                EpisodeRecord(steps=steps, spec_hash=ep_hash, truncated=True)
            )
            warnings.warn(f"{path}: truncated at offset {len(data)}")
            offset = len(data)
            break
        steps = np.frombuffer(data, dtype=STEP_DTYPE, count=n_steps, offset=offset).copy()
        offset += want
        truncated = not (len(steps) and steps["done"][-1] == 1)
        episodes.append(
            EpisodeRecord(steps=steps, spec_hash=ep_hash, truncated=truncated)
        )
    return episodes


def concat_datasets(paths: Sequence, out_path) -> int:
    """Merge several NRD1 files (e.g. one per worker) into one; returns episodes.

    All inputs must agree on dt; episode order follows the path order.
    """
    episodes: list[EpisodeRecord] = []
    dt = None
    for path in paths:
        meta = read_dataset_meta(path)
        if dt is None:
            dt = meta.dt
        elif meta.dt != dt:
            raise DatasetFormatError(
                f"{path}: dt {meta.dt} differs from {dt}; refusing to merge"
            )
        episodes.extend(read_dataset(path))
    write_dataset(out_path, episodes, dt=0.2 if dt is None else float(dt))
    return len(episodes)


# --------------------------------------------------------------------------
# Training-data generation
# --------------------------------------------------------------------------

def _training_spec(master_rng: np.random.Generator, kinematics=None) -> EpisodeSpec:
    ep_seed = int(master_rng.integers(0, 2**63))
    n_agents = int(master_rng.integers(TRAINING_AGENTS_RANGE[0], TRAINING_AGENTS_RANGE[1] + 1))
    n_polygons = int(
        master_rng.integers(TRAINING_POLYGONS_RANGE[0], TRAINING_POLYGONS_RANGE[1] + 1)
    )
    kwargs = {} if kinematics is None else {"kinematics": kinematics}
    return EpisodeSpec(
        seed=ep_seed,
        map_source=ProceduralMap(n_polygons=n_polygons),
        n_agents=n_agents,
        agent_layout=RandomLayout(),
        **kwargs,
    )


def iter_training_steps(
    total_steps: int,
    seed: int,
    kinematics=None,
    on_step: Callable[[NavEnv, StepResult, Action], None] | None = None,
) -> Iterator[tuple[EpisodeSpec, list[np.ndarray]]]:
    """Run crowd episodes with a goal-seeking avoidance-driven robot.

    Yields (spec, step records) per episode until at least total_steps records
    have been produced.  The robot action is recovered as the body-frame
    command that reproduces the avoidance velocity, with zero rotation.
    """
    if total_steps <= 0:
        raise ValueError("total_steps must be > 0")
    master_rng = np.random.default_rng(int(seed))
    produced = 0
    while produced < total_steps:
        spec = _training_spec(master_rng, kinematics)
        env = NavEnv(spec)
        obs = env.reset()
        policy = OrcaRobotPolicy()
        records: list[np.ndarray] = []
        done = False
        while not done:
            action = policy.act(obs, env)
            result = env.step(action)
            # Replay-buffer convention: the observation the policy acted on,
            # the action, then the transition's reward and done flag.
            records.append(
                make_step_record(
                    obs.scan.ranges,
                    obs.s_r,
                    action.as_array(),
                    result.reward.total,
                    result.done,
                )
            )
            if on_step is not None:
                on_step(env, result, action)
            obs = result.observation
            done = result.done
        produced += len(records)
        yield spec, records


def generate_training_dataset(
    path,
    total_steps: int,
    seed: int,
    kinematics=None,
) -> int:
    """Generate and write a training dataset; returns the number of steps."""
    episodes: list[EpisodeRecord] = []
    total = 0
    dt = 0.2
    for spec, records in iter_training_steps(total_steps, seed, kinematics):
        steps = np.stack(records) if records else np.empty(0, dtype=STEP_DTYPE)
        episodes.append(EpisodeRecord(steps=steps, spec_hash=spec_hash(spec)))
        total += len(records)
        dt = spec.kinematics.dt
    write_dataset(path, episodes, dt=dt)
    return total
