"""Robot control policies for the harness: built-ins and external subprocesses.

Built-in baselines: "stop" (zero action), "straight" (full speed at the goal,
no avoidance) and "orca" (the robot joins the reciprocal-avoidance game using
privileged world state).  External learned policies run as subprocesses
speaking a JSON-lines protocol: the harness writes one object per step

    {"s_l": [...], "s_r": [...], "step": k}

and expects exactly one response line {"a": [vx, vy, omega]}; components are
clamped to [-1, 1].  A malformed response aborts the episode as a policy
error; it never crashes the harness.
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
from typing import Protocol

import numpy as np

from .agents import Action
from .env import NavEnv, Observation
from .orca import OrcaDisk, OrcaParams, orca_velocity

BUILTIN_POLICIES = ("orca", "straight", "stop")


class PolicyProtocolError(RuntimeError):
    """An external policy broke the JSON-lines protocol."""


class Policy(Protocol):
    def act(self, obs: Observation, env: NavEnv) -> Action: ...

    def close(self) -> None: ...


class StopPolicy:
    """Always commands zero velocity; can only ever time out."""

    def act(self, obs: Observation, env: NavEnv) -> Action:
        return Action(0.0, 0.0, 0.0)

    def close(self) -> None:
        pass


class StraightPolicy:
    """Full speed straight at the goal (robot frame), ignoring obstacles."""

    def act(self, obs: Observation, env: NavEnv) -> Action:
        gx, gy = float(obs.s_r[0]), float(obs.s_r[1])
        d = math.hypot(gx, gy)
        if d < 1e-9:
            return Action(0.0, 0.0, 0.0)
        # Slow down on final approach so the goal is not overshot.
        kin = env.spec.kinematics
        speed = min(1.0, d / (kin.v_max * kin.dt))
        return Action(gx / d * speed, gy / d * speed, 0.0)

    def close(self) -> None:
        pass


class OrcaRobotPolicy:
    """Drive the robot as a reciprocal-avoidance agent toward its goal.

    Uses privileged environment state (agent positions and velocities), so it
    serves as a strong non-learned baseline and as the training-data driver.
    """

    def __init__(self, params: OrcaParams | None = None):
        self.params = params if params is not None else OrcaParams()

    def act(self, obs: Observation, env: NavEnv) -> Action:
        kin = env.spec.kinematics
        pose = env.robot.pose
        px, py = pose.x, pose.y
        dx = env.goal[0] - px
        dy = env.goal[1] - py
        dist = math.hypot(dx, dy)
        v_max = kin.v_max
        if dist < 1e-9:
            pref = (0.0, 0.0)
        elif dist < v_max * kin.dt:
            pref = (dx / kin.dt, dy / kin.dt)
        else:
            pref = (dx / dist * v_max, dy / dist * v_max)

        vxw, vyw = env._robot_world_velocity()
        neighbors = [
            OrcaDisk(agent.position, agent.velocity, agent.body_radius)
            for agent in env.agents
        ]
        segments = env._nearby_segments((px, py), kin.robot_radius)
        vx, vy = orca_velocity(
            OrcaDisk((px, py), (vxw, vyw), kin.robot_radius),
            neighbors,
            segments,
            self.params,
            pref,
            max_speed=v_max,
            dt=kin.dt,
        )
        # World velocity back to a body-frame command.
        c, s = math.cos(pose.theta), math.sin(pose.theta)
        bx = (c * vx + s * vy) / v_max
        by = (-s * vx + c * vy) / v_max
        return Action(bx, by, 0.0)

    def close(self) -> None:
        pass


class SubprocessPolicy:
    """JSON-lines policy endpoint over a child process's standard streams."""

    def __init__(self, command: str):
        self.command = command
        self._proc: subprocess.Popen | None = None

    def _ensure_started(self) -> None:
        if self._proc is None:
            self._proc = subprocess.Popen(
                shlex.split(self.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )

    def act(self, obs: Observation, env: NavEnv) -> Action:
        self._ensure_started()
        proc = self._proc
        s_l = np.asarray(obs.s_l, dtype=float).reshape(-1)
        request = json.dumps(
            {
                "s_l": [float(v) for v in s_l],
                "s_r": [float(v) for v in obs.s_r],
                "step": env.step_index,
            },
            separators=(",", ":"),
        )
        try:
            proc.stdin.write(request + "\n")
            proc.stdin.flush()
            line = proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise PolicyProtocolError(f"policy process I/O failed: {exc}") from exc
        if not line:
            raise PolicyProtocolError("policy process closed its output stream")
        try:
            response = json.loads(line)
            a = response["a"]
            vx, vy, omega = (float(v) for v in a)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise PolicyProtocolError(
                f"malformed policy response {line.strip()!r}: {exc}"
            ) from exc
        return Action(vx, vy, omega)

    def close(self) -> None:
        if self._proc is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
            self._proc = None


def make_policy(name: str) -> Policy:
    """Build a policy from a CLI string: a builtin name or "subprocess:CMD"."""
    if name == "stop":
        return StopPolicy()
    if name == "straight":
        return StraightPolicy()
    if name == "orca":
        return OrcaRobotPolicy()
    if name.startswith("subprocess:"):
        command = name[len("subprocess:"):].strip()
        if not command:
            raise ValueError("subprocess policy needs a command")
        return SubprocessPolicy(command)
    raise ValueError(
        f"unknown policy {name!r}; use one of {BUILTIN_POLICIES} or 'subprocess:CMD'"
    )
