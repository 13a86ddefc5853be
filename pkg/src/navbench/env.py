"""Episode lifecycle: seeded resets, stepping, reward, curriculum, validation.

An EpisodeSpec plus an action sequence fully determines every observation and
reward, bit for bit: all randomness flows from the spec seed through one
generator in a fixed consumption order.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence, Union

import numpy as np

from .agents import (
    Action,
    CollisionReport,
    HumanAgent,
    KinematicsConfig,
    RobotState,
    advance_gait,
    check_collision,
    rendered_circles,
    step_robot,
)
from .geometry import (
    Bounds,
    Circle,
    DEFAULT_BOUNDS,
    LidarConfig,
    MapModel,
    PlacementExhaustedError,
    Pose,
    Scan,
    distance_to_surfaces,
    generate_map,
    load_map,
    raycast_scan,
)
from .maps import builtin_map
from .orca import OrcaDisk, OrcaParams, orca_velocity
from .representations import RingsConfig, normalize_1d, rings_encode

GOAL_RADIUS = 0.5
DANGER_DISTANCE = 0.2
SUCCESS_REWARD = 100.0
COLLISION_PENALTY = -25.0
DANGER_PENALTY = -1.0

SPAWN_CLEARANCE = 1.0
MIN_SPAWN_GOAL_DIST = 2.0
AGENT_GOAL_REACH = 0.3

MAX_AGENTS = 5
MAX_POLYGONS = 10

SPEC_VERSION = 1

Outcome = Literal["running", "success", "collision", "timeout"]


class SpecFormatError(ValueError):
    """An episode spec or scenario file violates the schema."""


# --------------------------------------------------------------------------
# Map sources and agent layouts
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProceduralMap:
    n_polygons: int
    map_seed: int | None = None
    bounds: Bounds = DEFAULT_BOUNDS


@dataclass(frozen=True)
class FileMap:
    path: str


@dataclass(frozen=True)
class NamedMap:
    name: str


MapSource = Union[ProceduralMap, FileMap, NamedMap]


@dataclass(frozen=True)
class RandomLayout:
    pass


@dataclass(frozen=True)
class CircleLayout:
    radius: float
    center: tuple[float, float] | None = None  # None: bounds center


@dataclass(frozen=True)
class AgentSpec:
    position: tuple[float, float]
    goal: tuple[float, float]
    policy: str = "orca"
    pref_speed: float = 1.0
    body_radius: float = 0.3
    render_mode: str = "legs"
    heading: float | None = None
    gait_phase: float | None = None


@dataclass(frozen=True)
class ScriptedLayout:
    agents: tuple[AgentSpec, ...]


AgentLayout = Union[RandomLayout, CircleLayout, ScriptedLayout]


@dataclass(frozen=True)
class Difficulty:
    """Curriculum state, clamped to 0..5 agents and 0..10 polygons."""

    n_agents: int
    n_polygons: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_agents", min(max(int(self.n_agents), 0), MAX_AGENTS))
        object.__setattr__(
            self, "n_polygons", min(max(int(self.n_polygons), 0), MAX_POLYGONS)
        )


def curriculum_update(
    difficulty: Difficulty,
    outcome: Literal["success", "failure"],
    rng: np.random.Generator,
) -> Difficulty:
    """Adapt difficulty one unit: up on success, down on failure.

    A seeded coin picks whether the agent count or the polygon count moves;
    the result is clamped to the 0..5 / 0..10 caps.
    """
    if outcome not in ("success", "failure"):
        raise ValueError(f"outcome must be 'success' or 'failure', got {outcome!r}")
    delta = 1 if outcome == "success" else -1
    if rng.random() < 0.5:
        return Difficulty(difficulty.n_agents + delta, difficulty.n_polygons)
    return Difficulty(difficulty.n_agents, difficulty.n_polygons + delta)


# --------------------------------------------------------------------------
# Episode spec
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EpisodeSpec:
    """Seeded, fully deterministic description of one episode."""

    seed: int
    map_source: MapSource = ProceduralMap(n_polygons=0)
    robot_spawn: Union[str, tuple[float, float], tuple[float, float, float]] = "random"
    goal: Union[str, tuple[float, float]] = "random"
    n_agents: int = 0
    agent_layout: AgentLayout = RandomLayout()
    max_steps: int = 1000
    collision_mode: Literal["terminate", "damage"] = "terminate"
    kinematics: KinematicsConfig = KinematicsConfig()
    lidar: LidarConfig = LidarConfig()
    representation: Literal["lidar1d", "rings"] = "lidar1d"
    scenario_id: int | None = None
    map_label: str | None = None

    def __post_init__(self) -> None:
        if self.n_agents < 0:
            raise SpecFormatError("n_agents must be >= 0")
        if self.max_steps < 1:
            raise SpecFormatError("max_steps must be >= 1")
        if self.collision_mode not in ("terminate", "damage"):
            raise SpecFormatError(f"unknown collision_mode {self.collision_mode!r}")
        if self.representation not in ("lidar1d", "rings"):
            raise SpecFormatError(f"unknown representation {self.representation!r}")


def _map_source_to_dict(source: MapSource) -> dict:
    if isinstance(source, ProceduralMap):
        return {
            "kind": "procedural",
            "n_polygons": source.n_polygons,
            "map_seed": source.map_seed,
            "bounds": list(source.bounds),
        }
    if isinstance(source, FileMap):
        return {"kind": "file", "path": source.path}
    if isinstance(source, NamedMap):
        return {"kind": "named", "name": source.name}
    raise SpecFormatError(f"unknown map source {source!r}")


def _map_source_from_dict(data: dict) -> MapSource:
    kind = data.get("kind")
    if kind == "procedural":
        bounds = tuple(float(v) for v in data.get("bounds", DEFAULT_BOUNDS))
        seed = data.get("map_seed")
        return ProceduralMap(
            n_polygons=int(data["n_polygons"]),
            map_seed=None if seed is None else int(seed),
            bounds=bounds,
        )
    if kind == "file":
        return FileMap(path=str(data["path"]))
    if kind == "named":
        return NamedMap(name=str(data["name"]))
    raise SpecFormatError(f"map_source.kind: unknown kind {kind!r}")


def _layout_to_dict(layout: AgentLayout) -> dict:
    if isinstance(layout, RandomLayout):
        return {"kind": "random"}
    if isinstance(layout, CircleLayout):
        return {
            "kind": "circle",
            "radius": layout.radius,
            "center": None if layout.center is None else list(layout.center),
        }
    if isinstance(layout, ScriptedLayout):
        return {
            "kind": "scripted",
            "agents": [
                {
                    "position": list(a.position),
                    "goal": list(a.goal),
                    "policy": a.policy,
                    "pref_speed": a.pref_speed,
                    "body_radius": a.body_radius,
                    "render_mode": a.render_mode,
                    "heading": a.heading,
                    "gait_phase": a.gait_phase,
                }
                for a in layout.agents
            ],
        }
    raise SpecFormatError(f"unknown agent layout {layout!r}")


def _layout_from_dict(data: dict) -> AgentLayout:
    kind = data.get("kind")
    if kind == "random":
        return RandomLayout()
    if kind == "circle":
        center = data.get("center")
        return CircleLayout(
            radius=float(data["radius"]),
            center=None if center is None else (float(center[0]), float(center[1])),
        )
    if kind == "scripted":
        agents = []
        for i, a in enumerate(data.get("agents", [])):
            try:
                agents.append(
                    AgentSpec(
                        position=(float(a["position"][0]), float(a["position"][1])),
                        goal=(float(a["goal"][0]), float(a["goal"][1])),
                        policy=a.get("policy", "orca"),
                        pref_speed=float(a.get("pref_speed", 1.0)),
                        body_radius=float(a.get("body_radius", 0.3)),
                        render_mode=a.get("render_mode", "legs"),
                        heading=None if a.get("heading") is None else float(a["heading"]),
                        gait_phase=(
                            None if a.get("gait_phase") is None else float(a["gait_phase"])
                        ),
                    )
                )
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise SpecFormatError(f"agent_layout.agents[{i}]: {exc}") from exc
        return ScriptedLayout(agents=tuple(agents))
    raise SpecFormatError(f"agent_layout.kind: unknown kind {kind!r}")


def spec_to_dict(spec: EpisodeSpec) -> dict:
    kin = spec.kinematics
    lidar = spec.lidar
    data = {
        "spec_version": SPEC_VERSION,
        "seed": spec.seed,
        "map_source": _map_source_to_dict(spec.map_source),
        "robot_spawn": spec.robot_spawn if isinstance(spec.robot_spawn, str) else list(spec.robot_spawn),
        "goal": spec.goal if isinstance(spec.goal, str) else list(spec.goal),
        "n_agents": spec.n_agents,
        "agent_layout": _layout_to_dict(spec.agent_layout),
        "max_steps": spec.max_steps,
        "collision_mode": spec.collision_mode,
        "kinematics": {
            "mode": kin.mode,
            "integration": kin.integration,
            "v_max": kin.v_max,
            "omega_max": kin.omega_max,
            "tau": kin.tau,
            "robot_radius": kin.robot_radius,
            "dt": kin.dt,
        },
        "lidar": {
            "n_beams": lidar.n_beams,
            "angular_span": lidar.angular_span,
            "max_range": lidar.max_range,
            "mount_offset": list(lidar.mount_offset),
        },
        "representation": spec.representation,
    }
    if spec.scenario_id is not None:
        data["scenario_id"] = spec.scenario_id
    if spec.map_label is not None:
        data["map_label"] = spec.map_label
    return data


def spec_from_dict(data: dict) -> EpisodeSpec:
    if not isinstance(data, dict):
        raise SpecFormatError("spec must be a JSON object")
    version = data.get("spec_version")
    if version != SPEC_VERSION:
        raise SpecFormatError(f"spec_version: expected {SPEC_VERSION}, got {version!r}")

    def get(key, default=None, required=False):
        if required and key not in data:
            raise SpecFormatError(f"{key}: missing required field")
        return data.get(key, default)

    try:
        seed = int(get("seed", required=True))
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(f"seed: {exc}") from exc
    try:
        map_source = _map_source_from_dict(get("map_source", required=True))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SpecFormatError):
            raise
        raise SpecFormatError(f"map_source: {exc}") from exc

    raw_spawn = get("robot_spawn", "random")
    if isinstance(raw_spawn, str):
        if raw_spawn != "random":
            raise SpecFormatError(f"robot_spawn: unknown value {raw_spawn!r}")
        spawn: Union[str, tuple] = "random"
    elif len(raw_spawn) in (2, 3):
        spawn = tuple(float(v) for v in raw_spawn)
    else:
        raise SpecFormatError("robot_spawn: expected 'random', [x, y] or [x, y, theta]")

    raw_goal = get("goal", "random")
    if isinstance(raw_goal, str):
        if raw_goal != "random":
            raise SpecFormatError(f"goal: unknown value {raw_goal!r}")
        goal: Union[str, tuple] = "random"
    elif len(raw_goal) == 2:
        goal = (float(raw_goal[0]), float(raw_goal[1]))
    else:
        raise SpecFormatError("goal: expected 'random' or [x, y]")

    kin_data = get("kinematics", {})
    lidar_data = get("lidar", {})
    try:
        kinematics = KinematicsConfig(
            mode=kin_data.get("mode", "holonomic"),
            integration=kin_data.get("integration", "instantaneous"),
            v_max=float(kin_data.get("v_max", 1.0)),
            omega_max=float(kin_data.get("omega_max", 1.0)),
            tau=float(kin_data.get("tau", 0.5)),
            robot_radius=float(kin_data.get("robot_radius", 0.3)),
            dt=float(kin_data.get("dt", 0.2)),
        )
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(f"kinematics: {exc}") from exc
    try:
        mount = lidar_data.get("mount_offset", (0.0, 0.0))
        lidar = LidarConfig(
            n_beams=int(lidar_data.get("n_beams", 1080)),
            angular_span=float(lidar_data.get("angular_span", 2.0 * math.pi)),
            max_range=float(lidar_data.get("max_range", 25.0)),
            mount_offset=(float(mount[0]), float(mount[1])),
        )
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(f"lidar: {exc}") from exc

    scenario_id = get("scenario_id")
    map_label = get("map_label")
    return EpisodeSpec(
        seed=seed,
        map_source=map_source,
        robot_spawn=spawn,
        goal=goal,
        n_agents=int(get("n_agents", 0)),
        agent_layout=_layout_from_dict(get("agent_layout", {"kind": "random"})),
        max_steps=int(get("max_steps", 1000)),
        collision_mode=get("collision_mode", "terminate"),
        kinematics=kinematics,
        lidar=lidar,
        representation=get("representation", "lidar1d"),
        scenario_id=None if scenario_id is None else int(scenario_id),
        map_label=None if map_label is None else str(map_label),
    )


def spec_canonical_json(spec: EpisodeSpec) -> str:
    """Canonical single-line JSON form; stable for hashing and round-trips."""
    return json.dumps(spec_to_dict(spec), sort_keys=True, separators=(",", ":"))


def spec_hash(spec: EpisodeSpec) -> int:
    """First 8 bytes of the sha256 of the canonical JSON, as unsigned 64-bit."""
    digest = hashlib.sha256(spec_canonical_json(spec).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


# --------------------------------------------------------------------------
# Reward
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RewardBreakdown:
    """Per-step reward terms: success, collision, danger, progress."""

    r_s: float
    r_c: float
    r_d: float
    r_p: float

    @property
    def total(self) -> float:
        return self.r_s + self.r_c + self.r_d + self.r_p


def compute_reward(
    prev_dist_goal: float,
    new_dist_goal: float,
    reached: bool,
    collided: bool,
    min_clearance: float,
) -> RewardBreakdown:
    """The shaped navigation reward.

    +100 on reaching the goal, -25 on collision, -1 while the clearance to any
    obstacle or agent is below 0.2 m, plus the decrease in distance to goal.
    """
    if prev_dist_goal < 0.0 or new_dist_goal < 0.0:
        raise ValueError("distances must be >= 0")
    return RewardBreakdown(
        r_s=SUCCESS_REWARD if reached else 0.0,
        r_c=COLLISION_PENALTY if collided else 0.0,
        r_d=DANGER_PENALTY if min_clearance < DANGER_DISTANCE else 0.0,
        r_p=prev_dist_goal - new_dist_goal,
    )


# --------------------------------------------------------------------------
# Observations and step results
# --------------------------------------------------------------------------

@dataclass
class Observation:
    """Raw scan plus the encoded LiDAR state and the goal/velocity vector.

    s_l is the representation-encoded LiDAR state (normalized 1080-vector or
    64x64 rings grid); s_r is [goal_x, goal_y, vx, vy, omega] with the goal in
    the robot frame and body-frame velocities.
    """

    scan: Scan
    s_l: np.ndarray
    s_r: np.ndarray


@dataclass
class StepResult:
    observation: Observation
    reward: RewardBreakdown
    done: bool
    outcome: Outcome
    info: dict


# --------------------------------------------------------------------------
# Environment
# --------------------------------------------------------------------------

def _sample_free_point(
    rng: np.random.Generator,
    bounds: Bounds,
    inset: float,
    accept,
    what: str,
    max_attempts: int = 1000,
) -> tuple[float, float]:
    xmin, ymin, xmax, ymax = bounds
    for _ in range(max_attempts):
        x = float(rng.uniform(xmin + inset, xmax - inset))
        y = float(rng.uniform(ymin + inset, ymax - inset))
        if accept(x, y):
            return (x, y)
    raise PlacementExhaustedError(
        f"placement-exhausted: no valid {what} after {max_attempts} attempts"
    )


class NavEnv:
    """Single-robot navigation episode; one instance is single-threaded."""

    def __init__(self, spec: EpisodeSpec, orca_params: OrcaParams | None = None):
        self.spec = spec
        self.orca_params = orca_params if orca_params is not None else OrcaParams()
        self.rings_cfg = RingsConfig(r_max=spec.lidar.max_range)
        self.map_model: MapModel | None = None
        self.robot = RobotState()
        self.goal: tuple[float, float] = (0.0, 0.0)
        self.agents: list[HumanAgent] = []
        self.step_index = 0
        self.done = False
        self.outcome: Outcome = "running"
        self._rng: np.random.Generator | None = None
        self._prev_goal_dist = 0.0
        self._segment_tuples: list = []
        self._last_observation: Observation | None = None

    # -- helpers -----------------------------------------------------------

    def dynamic_circles(self) -> list[Circle]:
        """Circles the LiDAR sees for the current agent states."""
        circles: list[Circle] = []
        for agent in self.agents:
            circles.extend(rendered_circles(agent))
        return circles

    def _robot_world_velocity(self) -> tuple[float, float]:
        vx, vy, _ = self.robot.body_velocity
        c, s = math.cos(self.robot.pose.theta), math.sin(self.robot.pose.theta)
        return (vx * c - vy * s, vx * s + vy * c)

    def _distance_to_goal(self) -> float:
        return math.hypot(self.robot.pose.x - self.goal[0], self.robot.pose.y - self.goal[1])

    def _observe(self) -> Observation:
        scan = raycast_scan(
            self.map_model,
            self.dynamic_circles(),
            self.robot.pose,
            self.spec.lidar,
            timestamp_step=self.step_index,
        )
        if self.spec.representation == "rings":
            s_l = rings_encode(scan, self.spec.lidar.beam_angles(), self.rings_cfg).cells
        else:
            s_l = normalize_1d(scan, self.spec.lidar.max_range)
        dx = self.goal[0] - self.robot.pose.x
        dy = self.goal[1] - self.robot.pose.y
        c, s = math.cos(self.robot.pose.theta), math.sin(self.robot.pose.theta)
        vx, vy, omega = self.robot.body_velocity
        s_r = np.array([c * dx + s * dy, -s * dx + c * dy, vx, vy, omega])
        obs = Observation(scan=scan, s_l=s_l, s_r=s_r)
        self._last_observation = obs
        return obs

    # -- reset -------------------------------------------------------------

    def reset(self) -> Observation:
        spec = self.spec
        rng = np.random.default_rng(spec.seed)
        self._rng = rng
        kin = spec.kinematics

        if isinstance(spec.map_source, ProceduralMap):
            bounds = spec.map_source.bounds
            spawn = self._resolve_spawn_xy(rng, bounds, accept=lambda x, y: True)
            goal = self._resolve_goal_xy(rng, bounds, spawn, accept=lambda x, y: True)
            if spec.map_source.map_seed is not None:
                map_seed = spec.map_source.map_seed
            else:
                map_seed = int(rng.integers(0, 2**63))
            self.map_model = generate_procedural_map(
                map_seed, spec.map_source.n_polygons, bounds, spawn, goal
            )
        else:
            if isinstance(spec.map_source, FileMap):
                self.map_model = load_map(spec.map_source.path)
            else:
                self.map_model = builtin_map(spec.map_source.name)
            bounds = self.map_model.bounds

            def clear(x, y):
                return distance_to_surfaces(self.map_model, [], (x, y)) >= SPAWN_CLEARANCE

            spawn = self._resolve_spawn_xy(rng, bounds, accept=clear)
            goal = self._resolve_goal_xy(rng, bounds, spawn, accept=clear)

        if isinstance(spec.robot_spawn, tuple) and len(spec.robot_spawn) == 3:
            theta = spec.robot_spawn[2]
        else:
            theta = float(rng.uniform(-math.pi, math.pi))
        self.robot = RobotState(pose=Pose(spawn[0], spawn[1], theta))
        self.goal = goal
        self.agents = self._build_agents(rng)

        a, b = self.map_model.all_segments()
        self._segment_tuples = [
            ((float(ax), float(ay)), (float(bx), float(by)))
            for (ax, ay), (bx, by) in zip(a, b)
        ]
        self._segment_arrays = (a, b)

        self.step_index = 0
        self.done = False
        self.outcome = "running"
        self._prev_goal_dist = self._distance_to_goal()
        return self._observe()

    def _resolve_spawn_xy(self, rng, bounds, accept) -> tuple[float, float]:
        spec = self.spec
        if isinstance(spec.robot_spawn, tuple):
            return (float(spec.robot_spawn[0]), float(spec.robot_spawn[1]))
        return _sample_free_point(rng, bounds, SPAWN_CLEARANCE, accept, "robot spawn")

    def _resolve_goal_xy(self, rng, bounds, spawn, accept) -> tuple[float, float]:
        spec = self.spec
        if isinstance(spec.goal, tuple):
            return (float(spec.goal[0]), float(spec.goal[1]))

        def far_enough(x, y):
            return math.hypot(x - spawn[0], y - spawn[1]) >= MIN_SPAWN_GOAL_DIST and accept(x, y)

        return _sample_free_point(rng, bounds, SPAWN_CLEARANCE, far_enough, "goal")

    def _build_agents(self, rng: np.random.Generator) -> list[HumanAgent]:
        spec = self.spec
        layout = spec.agent_layout
        agents: list[HumanAgent] = []
        if isinstance(layout, ScriptedLayout):
            for a in layout.agents:
                heading = (
                    a.heading
                    if a.heading is not None
                    else math.atan2(a.goal[1] - a.position[1], a.goal[0] - a.position[0])
                )
                gait = a.gait_phase if a.gait_phase is not None else float(rng.uniform(0.0, 2.0 * math.pi))
                agent = HumanAgent(
                    position=tuple(a.position),
                    goal=tuple(a.goal),
                    heading=heading,
                    body_radius=a.body_radius,
                    policy=a.policy,
                    pref_speed=a.pref_speed,
                    gait_phase=gait,
                    render_mode=a.render_mode,
                )
                self._init_agent_velocity(agent)
                agents.append(agent)
            return agents

        if isinstance(layout, CircleLayout):
            xmin, ymin, xmax, ymax = self.map_model.bounds
            cx, cy = layout.center if layout.center is not None else (
                (xmin + xmax) / 2.0,
                (ymin + ymax) / 2.0,
            )
            n = spec.n_agents
            for k in range(n):
                ang = 2.0 * math.pi * k / n
                px = cx + layout.radius * math.cos(ang)
                py = cy + layout.radius * math.sin(ang)
                gx = cx - layout.radius * math.cos(ang)
                gy = cy - layout.radius * math.sin(ang)
                agent = HumanAgent(
                    position=(px, py),
                    goal=(gx, gy),
                    heading=math.atan2(gy - py, gx - px),
                    gait_phase=float(rng.uniform(0.0, 2.0 * math.pi)),
                )
                self._init_agent_velocity(agent)
                agents.append(agent)
            return agents

        # Random layout: rejection-sample positions clear of everything.
        robot_xy = (self.robot.pose.x, self.robot.pose.y)
        robot_r = spec.kinematics.robot_radius
        for i in range(spec.n_agents):
            body_r = 0.3

            def accept_pos(x, y):
                if distance_to_surfaces(self.map_model, [], (x, y)) < body_r + 0.05:
                    return False
                if math.hypot(x - robot_xy[0], y - robot_xy[1]) < body_r + robot_r + 0.2:
                    return False
                for other in agents:
                    if (
                        math.hypot(x - other.position[0], y - other.position[1])
                        < body_r + other.body_radius + 0.1
                    ):
                        return False
                return True

            pos = _sample_free_point(
                rng, self.map_model.bounds, body_r + 0.05, accept_pos, f"agent {i} position"
            )

            def accept_goal(x, y):
                return (
                    distance_to_surfaces(self.map_model, [], (x, y)) >= body_r
                    and math.hypot(x - pos[0], y - pos[1]) >= MIN_SPAWN_GOAL_DIST
                )

            goal = _sample_free_point(
                rng, self.map_model.bounds, body_r, accept_goal, f"agent {i} goal"
            )
            agent = HumanAgent(
                position=pos,
                goal=goal,
                heading=math.atan2(goal[1] - pos[1], goal[0] - pos[0]),
                gait_phase=float(rng.uniform(0.0, 2.0 * math.pi)),
            )
            self._init_agent_velocity(agent)
            agents.append(agent)
        return agents

    @staticmethod
    def _init_agent_velocity(agent: HumanAgent) -> None:
        if agent.policy == "constant_velocity":
            dx = agent.goal[0] - agent.position[0]
            dy = agent.goal[1] - agent.position[1]
            d = math.hypot(dx, dy)
            if d > 1e-9:
                agent.velocity = (dx / d * agent.pref_speed, dy / d * agent.pref_speed)

    # -- stepping ----------------------------------------------------------

    def step(self, action: Action) -> StepResult:
        if self.done:
            raise RuntimeError("episode is done; reset the environment before stepping")
        spec = self.spec
        kin = spec.kinematics
        dt = kin.dt

        # (1) advance human agents with their policies, simultaneously.
        new_velocities = [self._agent_new_velocity(i) for i in range(len(self.agents))]
        for agent, vel in zip(self.agents, new_velocities):
            agent.velocity = vel
            agent.position = (
                agent.position[0] + vel[0] * dt,
                agent.position[1] + vel[1] * dt,
            )
            if math.hypot(vel[0], vel[1]) > 1e-9:
                agent.heading = math.atan2(vel[1], vel[0])
        self._maybe_resample_agent_goals()

        # (2) gait phases.
        for agent in self.agents:
            advance_gait(agent, dt)

        # (3) robot kinematics.
        self.robot = step_robot(self.robot, action, kin)

        # (4) collision, (5) goal, (6) timeout.
        report = check_collision(self.robot, self.map_model, self.agents, kin)
        new_dist = self._distance_to_goal()
        at_goal = new_dist < GOAL_RADIUS
        self.step_index += 1
        timed_out = self.step_index >= spec.max_steps

        collided = report.collided
        reached = at_goal and not collided  # collision takes precedence
        if collided and spec.collision_mode == "terminate":
            self.outcome = "collision"
            self.done = True
        elif reached:
            self.outcome = "success"
            self.done = True
        elif timed_out:
            self.outcome = "timeout"
            self.done = True

        # (7) reward.
        reward = compute_reward(
            self._prev_goal_dist, new_dist, reached, collided, report.min_clearance
        )
        self._prev_goal_dist = new_dist

        # (8) scan + (9) observation.
        obs = self._observe()
        info = {
            "min_clearance": report.min_clearance,
            "distance_to_goal": new_dist,
            "step": self.step_index,
            "collision_with": report.with_,
        }
        return StepResult(
            observation=obs,
            reward=reward,
            done=self.done,
            outcome=self.outcome if self.done else "running",
            info=info,
        )

    def _agent_new_velocity(self, index: int) -> tuple[float, float]:
        agent = self.agents[index]
        if agent.policy == "static":
            return (0.0, 0.0)

        dx = agent.goal[0] - agent.position[0]
        dy = agent.goal[1] - agent.position[1]
        dist = math.hypot(dx, dy)
        dt = self.spec.kinematics.dt

        if agent.policy == "constant_velocity":
            if dist < AGENT_GOAL_REACH:
                return (0.0, 0.0)
            vx, vy = agent.velocity
            nxt = (agent.position[0] + vx * dt, agent.position[1] + vy * dt)
            if distance_to_surfaces(self.map_model, [], nxt) < agent.body_radius:
                return (0.0, 0.0)  # halt at walls instead of walking through
            return (vx, vy)

        # ORCA policy.
        if dist < AGENT_GOAL_REACH:
            pref = (0.0, 0.0)
        elif dist < agent.pref_speed * dt:
            pref = (dx / dt, dy / dt)
        else:
            pref = (dx / dist * agent.pref_speed, dy / dist * agent.pref_speed)

        neighbors = [
            OrcaDisk(other.position, other.velocity, other.body_radius)
            for j, other in enumerate(self.agents)
            if j != index
        ]
        neighbors.append(
            OrcaDisk(
                (self.robot.pose.x, self.robot.pose.y),
                self._robot_world_velocity(),
                self.spec.kinematics.robot_radius,
            )
        )
        segments = self._nearby_segments(agent.position, agent.body_radius)
        return orca_velocity(
            OrcaDisk(agent.position, agent.velocity, agent.body_radius),
            neighbors,
            segments,
            self.orca_params,
            pref,
            max_speed=agent.pref_speed,
            dt=dt,
        )

    def _nearby_segments(self, position, radius: float):
        """Wall and polygon segments close enough to constrain an agent."""
        a, b = self._segment_arrays
        px, py = position
        e = b - a
        pa_x = px - a[:, 0]
        pa_y = py - a[:, 1]
        denom = e[:, 0] ** 2 + e[:, 1] ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (pa_x * e[:, 0] + pa_y * e[:, 1]) / denom
        t = np.clip(np.nan_to_num(t), 0.0, 1.0)
        cx = a[:, 0] + t * e[:, 0]
        cy = a[:, 1] + t * e[:, 1]
        d = np.hypot(px - cx, py - cy)
        cutoff = radius + self.orca_params.time_horizon_obstacles * 1.0 + 0.5
        idx = np.nonzero(d <= cutoff)[0]
        return [self._segment_tuples[int(i)] for i in idx]

    def _maybe_resample_agent_goals(self) -> None:
        """Keep random-layout crowds moving: new goal once one is reached."""
        if not isinstance(self.spec.agent_layout, RandomLayout):
            return
        for agent in self.agents:
            if agent.policy != "orca":
                continue
            if (
                math.hypot(
                    agent.goal[0] - agent.position[0], agent.goal[1] - agent.position[1]
                )
                < AGENT_GOAL_REACH
            ):
                def accept(x, y):
                    return distance_to_surfaces(self.map_model, [], (x, y)) >= agent.body_radius

                agent.goal = _sample_free_point(
                    self._rng, self.map_model.bounds, agent.body_radius, accept, "agent goal"
                )


def generate_procedural_map(
    map_seed: int,
    n_polygons: int,
    bounds: Bounds,
    spawn: tuple[float, float],
    goal: tuple[float, float],
) -> MapModel:
    """Procedural episode map with clearance disks at the spawn and goal."""
    return generate_map(
        map_seed,
        n_polygons,
        bounds,
        clearance_points=[
            (spawn[0], spawn[1], SPAWN_CLEARANCE),
            (goal[0], goal[1], SPAWN_CLEARANCE),
        ],
    )


def make_validation_suite() -> list[EpisodeSpec]:
    """100 deterministic maximum-difficulty episodes (seeds 0..99)."""
    return [
        EpisodeSpec(
            seed=seed,
            map_source=ProceduralMap(n_polygons=MAX_POLYGONS),
            n_agents=MAX_AGENTS,
        )
        for seed in range(100)
    ]
