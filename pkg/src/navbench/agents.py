"""Robot kinematics, human agents, leg/ellipse rendering, collision checks.

The robot takes normalized [-1, 1] velocity commands in its base frame and is
integrated exactly (closed-form rigid-frame integral) over each time step.
Human agents are disks driven by a policy; for the LiDAR they are rendered
either as two moving leg circles or as three circles approximating a torso
ellipse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .geometry import (
    Circle,
    MapModel,
    Pose,
    TWO_PI,
    _wall_signed_distance,
    distance_to_surfaces,
)

# Leg rendering constants: leg disk radius, lateral offset from the body
# center, swing amplitude at full speed, and distance walked per gait cycle.
LEG_RADIUS = 0.1
LEG_OFFSET = 0.1
LEG_AMPLITUDE = 0.15
STRIDE_LENGTH = 0.6

# Torso ellipse approximation: three disks spread across the shoulder axis.
ELLIPSE_DISK_RADIUS = 0.2
ELLIPSE_DISK_SPREAD = 0.1


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


@dataclass(frozen=True)
class Action:
    """Normalized velocity command [vx, vy, omega], each clamped to [-1, 1]."""

    vx: float = 0.0
    vy: float = 0.0
    omega: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "vx", _clamp(float(self.vx), -1.0, 1.0))
        object.__setattr__(self, "vy", _clamp(float(self.vy), -1.0, 1.0))
        object.__setattr__(self, "omega", _clamp(float(self.omega), -1.0, 1.0))

    @classmethod
    def from_array(cls, arr: Sequence[float]) -> "Action":
        vx, vy, omega = (float(v) for v in arr)
        return cls(vx, vy, omega)

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.omega])


@dataclass(frozen=True)
class KinematicsConfig:
    """Robot base parameters and the simulation time step."""

    mode: Literal["holonomic", "diff_drive"] = "holonomic"
    integration: Literal["instantaneous", "first_order_lag"] = "instantaneous"
    v_max: float = 1.0
    omega_max: float = 1.0
    tau: float = 0.5
    robot_radius: float = 0.3
    dt: float = 0.2

    def __post_init__(self) -> None:
        if self.mode not in ("holonomic", "diff_drive"):
            raise ValueError(f"unknown kinematics mode {self.mode!r}")
        if self.integration not in ("instantaneous", "first_order_lag"):
            raise ValueError(f"unknown integration {self.integration!r}")
        for name in ("v_max", "omega_max", "tau", "robot_radius", "dt"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class RobotState:
    """Robot pose plus body-frame velocity (vx, vy, omega)."""

    pose: Pose = Pose()
    body_velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)


def step_robot(state: RobotState, action: Action, cfg: KinematicsConfig) -> RobotState:
    """Advance the robot one time step.

    The commanded body velocity is the action scaled by (v_max, v_max,
    omega_max); differential drive discards the lateral component.  With
    instantaneous integration the body velocity becomes the command; with the
    first-order lag it relaxes toward the command with time constant tau.  The
    pose then follows the exact constant-twist integral over dt.
    """
    cmd_vx = action.vx * cfg.v_max
    cmd_vy = 0.0 if cfg.mode == "diff_drive" else action.vy * cfg.v_max
    cmd_w = action.omega * cfg.omega_max

    vx, vy, w = state.body_velocity
    if cfg.integration == "instantaneous":
        vx, vy, w = cmd_vx, cmd_vy, cmd_w
    else:
        alpha = min(1.0, cfg.dt / cfg.tau)
        vx += (cmd_vx - vx) * alpha
        vy += (cmd_vy - vy) * alpha
        w += (cmd_w - w) * alpha

    theta = state.pose.theta
    if abs(w) < 1e-12:
        c, s = math.cos(theta), math.sin(theta)
        dx = (vx * c - vy * s) * cfg.dt
        dy = (vx * s + vy * c) * cfg.dt
        new_theta = theta
    else:
        theta1 = theta + w * cfg.dt
        s0, c0 = math.sin(theta), math.cos(theta)
        s1, c1 = math.sin(theta1), math.cos(theta1)
        dx = (vx * (s1 - s0) + vy * (c1 - c0)) / w
        dy = (vx * (c0 - c1) + vy * (s1 - s0)) / w
        new_theta = theta1

    return RobotState(
        pose=Pose(state.pose.x + dx, state.pose.y + dy, new_theta),
        body_velocity=(vx, vy, w),
    )


@dataclass
class HumanAgent:
    """A disk pedestrian with a policy, a goal, and a rendering mode."""

    position: tuple[float, float]
    goal: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    heading: float = 0.0
    body_radius: float = 0.3
    policy: Literal["orca", "constant_velocity", "static"] = "orca"
    pref_speed: float = 1.0
    gait_phase: float = 0.0
    render_mode: Literal["legs", "ellipse"] = "legs"

    def speed(self) -> float:
        return math.hypot(self.velocity[0], self.velocity[1])


def leg_circles(agent: HumanAgent) -> list[Circle]:
    """Two leg disks, offset sideways from the body and swinging in antiphase.

    The swing amplitude scales with speed up to LEG_AMPLITUDE, so a standing
    agent shows two stationary circles at +/- LEG_OFFSET.
    """
    hx, hy = math.cos(agent.heading), math.sin(agent.heading)
    px, py = -hy, hx
    amplitude = LEG_AMPLITUDE * min(1.0, agent.speed() / agent.pref_speed)
    swing = amplitude * math.sin(agent.gait_phase)
    x, y = agent.position
    c1 = (x + px * LEG_OFFSET + hx * swing, y + py * LEG_OFFSET + hy * swing)
    c2 = (x - px * LEG_OFFSET - hx * swing, y - py * LEG_OFFSET - hy * swing)
    return [(c1, LEG_RADIUS), (c2, LEG_RADIUS)]


def ellipse_circles(agent: HumanAgent) -> list[Circle]:
    """Three disks approximating a 0.3 x 0.2 m torso ellipse.

    The 0.3 m semi-axis lies along the shoulder line (perpendicular to the
    heading); the disks are spread across that axis.
    """
    hx, hy = math.cos(agent.heading), math.sin(agent.heading)
    px, py = -hy, hx
    x, y = agent.position
    return [
        ((x - px * ELLIPSE_DISK_SPREAD, y - py * ELLIPSE_DISK_SPREAD), ELLIPSE_DISK_RADIUS),
        ((x, y), ELLIPSE_DISK_RADIUS),
        ((x + px * ELLIPSE_DISK_SPREAD, y + py * ELLIPSE_DISK_SPREAD), ELLIPSE_DISK_RADIUS),
    ]


def rendered_circles(agent: HumanAgent) -> list[Circle]:
    """The circles the LiDAR actually sees for this agent."""
    if agent.render_mode == "legs":
        return leg_circles(agent)
    return ellipse_circles(agent)


def advance_gait(agent: HumanAgent, dt: float) -> None:
    """Advance the walking phase: one full cycle per STRIDE_LENGTH traveled."""
    agent.gait_phase = (agent.gait_phase + TWO_PI * agent.speed() * dt / STRIDE_LENGTH) % TWO_PI


@dataclass(frozen=True)
class CollisionReport:
    collided: bool
    min_clearance: float
    with_: Literal["obstacle", "agent", "wall", "none"]


def check_collision(
    robot: RobotState,
    map_model: MapModel,
    agents: Iterable[HumanAgent],
    cfg: KinematicsConfig,
) -> CollisionReport:
    """Surface-to-surface clearance between the robot disk and everything else.

    Agents are tested against both their rendered circles (what the LiDAR
    sees) and their body disk, taking the minimum.  collided means the robot
    center is closer than robot_radius to some surface.
    """
    x, y = robot.pose.x, robot.pose.y
    static_d = distance_to_surfaces(map_model, [], (x, y))
    wall_d = _wall_signed_distance(map_model.bounds, x, y)
    best_cat, best_d = ("wall", wall_d)
    if static_d < wall_d:
        best_cat, best_d = ("obstacle", static_d)
    for agent in agents:
        circles = rendered_circles(agent)
        circles.append((agent.position, agent.body_radius))
        for (cx, cy), r in circles:
            d = math.hypot(x - cx, y - cy) - r
            if d < best_d:
                best_cat, best_d = ("agent", d)
    clearance = best_d - cfg.robot_radius
    collided = clearance < 0.0
    return CollisionReport(
        collided=collided,
        min_clearance=clearance,
        with_=best_cat if collided else "none",
    )
