"""Optimal reciprocal collision avoidance for disk agents.

Each neighbor induces a half-plane of permitted velocities derived from the
truncated velocity obstacle; the agent picks the permitted velocity closest to
its preferred velocity by incremental 2D linear programming.  When the
half-planes are mutually infeasible (dense crowds), a projective 3D fallback
minimizes the largest constraint violation while keeping obstacle constraints
hard.  Everything is plain float arithmetic with a fixed constraint order, so
results are bit-deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

EPSILON = 1e-10


@dataclass(frozen=True)
class OrcaParams:
    time_horizon_agents: float = 5.0
    time_horizon_obstacles: float = 1.0
    neighbor_dist: float = 10.0
    max_neighbors: int = 10

    def __post_init__(self) -> None:
        if (
            self.time_horizon_agents <= 0.0
            or self.time_horizon_obstacles <= 0.0
            or self.neighbor_dist <= 0.0
            or self.max_neighbors <= 0
        ):
            raise ValueError("all OrcaParams fields must be positive")


@dataclass(frozen=True)
class OrcaDisk:
    """Minimal view of an agent for the solver: a moving disk."""

    position: tuple[float, float]
    velocity: tuple[float, float]
    radius: float


@dataclass(frozen=True)
class Line:
    """Directed line; permitted velocities lie to its left: det(dir, v - pt) >= 0."""

    point: tuple[float, float]
    direction: tuple[float, float]


def _det(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * by - ay * bx


def _vo_escape(
    rel_px: float,
    rel_py: float,
    rel_vx: float,
    rel_vy: float,
    combined_radius: float,
    horizon: float,
    dt: float,
) -> tuple[float, float, float, float]:
    """Change u moving the relative velocity onto the truncated VO boundary.

    The velocity obstacle of a disk of combined_radius at relative position
    (rel_px, rel_py) is a cone truncated by the disk of radius r/horizon
    centered at rel_p/horizon.  Returns (ux, uy, dirx, diry) where (dirx,
    diry) is the constraint-line direction (feasible side to its left); u may
    point either way across the boundary depending on whether the current
    relative velocity is inside or outside the VO.  Already-overlapping disks
    are pushed apart within one dt instead.
    """
    dist_sq = rel_px * rel_px + rel_py * rel_py
    r_sq = combined_radius * combined_radius

    if dist_sq > r_sq:
        inv_t = 1.0 / horizon
        # Vector from the truncation-disk center to the relative velocity.
        wx = rel_vx - rel_px * inv_t
        wy = rel_vy - rel_py * inv_t
        w_len_sq = wx * wx + wy * wy
        dot = wx * rel_px + wy * rel_py
        if dot < 0.0 and dot * dot > r_sq * w_len_sq:
            # Project onto the truncation disk.
            w_len = math.sqrt(w_len_sq)
            nx = wx / w_len
            ny = wy / w_len
            scale = combined_radius * inv_t - w_len
            return scale * nx, scale * ny, ny, -nx
        # Project onto the nearer cone leg; the line direction is the leg.
        leg = math.sqrt(dist_sq - r_sq)
        if _det(rel_px, rel_py, wx, wy) > 0.0:
            dx = (rel_px * leg - rel_py * combined_radius) / dist_sq
            dy = (rel_px * combined_radius + rel_py * leg) / dist_sq
        else:
            dx = -(rel_px * leg + rel_py * combined_radius) / dist_sq
            dy = -(-rel_px * combined_radius + rel_py * leg) / dist_sq
        dot2 = rel_vx * dx + rel_vy * dy
        return dot2 * dx - rel_vx, dot2 * dy - rel_vy, dx, dy

    # Already colliding: exit the overlap within one time step.
    inv_dt = 1.0 / dt
    wx = rel_vx - rel_px * inv_dt
    wy = rel_vy - rel_py * inv_dt
    w_len = math.hypot(wx, wy)
    if w_len < EPSILON:
        # Perfectly symmetric overlap; push along +x deterministically.
        nx, ny = 1.0, 0.0
    else:
        nx, ny = wx / w_len, wy / w_len
    scale = combined_radius * inv_dt - w_len
    return scale * nx, scale * ny, ny, -nx


def nearest_point_on_segment(
    px: float, py: float, ax: float, ay: float, bx: float, by: float
) -> tuple[float, float]:
    ex = bx - ax
    ey = by - ay
    denom = ex * ex + ey * ey
    if denom < EPSILON:
        return ax, ay
    t = ((px - ax) * ex + (py - ay) * ey) / denom
    t = 0.0 if t < 0.0 else 1.0 if t > 1.0 else t
    return ax + t * ex, ay + t * ey


def build_orca_lines(
    self_disk: OrcaDisk,
    neighbors: Sequence[OrcaDisk],
    obstacle_segments: Iterable[tuple[tuple[float, float], tuple[float, float]]],
    params: OrcaParams,
    dt: float,
) -> tuple[list[Line], int]:
    """Half-plane constraints for one agent; returns (lines, n_obstacle_lines).

    Obstacle lines come first (they stay hard in the infeasible fallback).
    Each segment contributes its nearest point as a static obstacle with full
    responsibility; neighbors are processed nearest-first with reciprocity
    1/2.
    """
    px, py = self_disk.position
    vx, vy = self_disk.velocity
    lines: list[Line] = []

    horizon_obs = params.time_horizon_obstacles
    # Beyond this distance no velocity can reach the segment within the
    # obstacle horizon, so the constraint would never bind.
    speed = math.hypot(vx, vy)
    cull = self_disk.radius + horizon_obs * max(speed, 1.0) + 1e-6
    for (ax, ay), (bx, by) in obstacle_segments:
        qx, qy = nearest_point_on_segment(px, py, ax, ay, bx, by)
        rel_px = qx - px
        rel_py = qy - py
        if math.hypot(rel_px, rel_py) > cull:
            continue
        ux, uy, dirx, diry = _vo_escape(
            rel_px, rel_py, vx, vy, self_disk.radius, horizon_obs, dt
        )
        lines.append(Line((vx + ux, vy + uy), (dirx, diry)))
    n_obstacle_lines = len(lines)

    ranked = []
    for idx, other in enumerate(neighbors):
        dx = other.position[0] - px
        dy = other.position[1] - py
        d = math.hypot(dx, dy)
        if d <= params.neighbor_dist:
            ranked.append((d, idx, other))
    ranked.sort(key=lambda item: (item[0], item[1]))
    for _, _, other in ranked[: params.max_neighbors]:
        rel_px = other.position[0] - px
        rel_py = other.position[1] - py
        rel_vx = vx - other.velocity[0]
        rel_vy = vy - other.velocity[1]
        combined = self_disk.radius + other.radius
        ux, uy, dirx, diry = _vo_escape(
            rel_px, rel_py, rel_vx, rel_vy, combined, params.time_horizon_agents, dt
        )
        lines.append(Line((vx + 0.5 * ux, vy + 0.5 * uy), (dirx, diry)))
    return lines, n_obstacle_lines


def _linear_program1(
    lines: Sequence[Line],
    line_no: int,
    radius: float,
    opt_x: float,
    opt_y: float,
    direction_opt: bool,
    result: tuple[float, float],
) -> tuple[bool, tuple[float, float]]:
    """Optimize along lines[line_no] subject to lines[:line_no] and the disk."""
    ptx, pty = lines[line_no].point
    dx, dy = lines[line_no].direction
    dot = ptx * dx + pty * dy
    disc = dot * dot + radius * radius - (ptx * ptx + pty * pty)
    if disc < 0.0:
        return False, result
    sqrt_disc = math.sqrt(disc)
    t_left = -dot - sqrt_disc
    t_right = -dot + sqrt_disc

    for i in range(line_no):
        pix, piy = lines[i].point
        dix, diy = lines[i].direction
        denom = _det(dx, dy, dix, diy)
        numer = _det(dix, diy, ptx - pix, pty - piy)
        if abs(denom) <= EPSILON:
            if numer < 0.0:
                return False, result
            continue
        t = numer / denom
        if denom >= 0.0:
            t_right = min(t_right, t)
        else:
            t_left = max(t_left, t)
        if t_left > t_right:
            return False, result

    if direction_opt:
        if opt_x * dx + opt_y * dy > 0.0:
            t = t_right
        else:
            t = t_left
    else:
        t = dx * (opt_x - ptx) + dy * (opt_y - pty)
        t = max(t_left, min(t_right, t))
    return True, (ptx + t * dx, pty + t * dy)


def _linear_program2(
    lines: Sequence[Line],
    radius: float,
    opt_x: float,
    opt_y: float,
    direction_opt: bool,
) -> tuple[int, tuple[float, float]]:
    """Incremental 2D LP; returns (first failing line index or len, result)."""
    if direction_opt:
        result = (opt_x * radius, opt_y * radius)
    elif opt_x * opt_x + opt_y * opt_y > radius * radius:
        n = math.hypot(opt_x, opt_y)
        result = (opt_x / n * radius, opt_y / n * radius)
    else:
        result = (opt_x, opt_y)

    for i, line in enumerate(lines):
        px, py = line.point
        dx, dy = line.direction
        if _det(dx, dy, px - result[0], py - result[1]) > 0.0:
            ok, new_result = _linear_program1(
                lines, i, radius, opt_x, opt_y, direction_opt, result
            )
            if not ok:
                return i, result
            result = new_result
    return len(lines), result


def _linear_program3(
    lines: Sequence[Line],
    n_obstacle_lines: int,
    begin_line: int,
    radius: float,
    result: tuple[float, float],
) -> tuple[float, float]:
    """Minimize the maximum violation over the relaxable (agent) constraints."""
    distance = 0.0
    for i in range(begin_line, len(lines)):
        px, py = lines[i].point
        dx, dy = lines[i].direction
        if _det(dx, dy, px - result[0], py - result[1]) > distance:
            proj: list[Line] = list(lines[:n_obstacle_lines])
            for j in range(n_obstacle_lines, i):
                pjx, pjy = lines[j].point
                djx, djy = lines[j].direction
                denom = _det(dx, dy, djx, djy)
                if abs(denom) <= EPSILON:
                    if dx * djx + dy * djy > 0.0:
                        continue  # parallel, same direction: redundant
                    point = (0.5 * (px + pjx), 0.5 * (py + pjy))
                else:
                    t = _det(djx, djy, px - pjx, py - pjy) / denom
                    point = (px + t * dx, py + t * dy)
                ddx = djx - dx
                ddy = djy - dy
                n = math.hypot(ddx, ddy)
                proj.append(Line(point, (ddx / n, ddy / n)))
            count, new_result = _linear_program2(proj, radius, -dy, dx, True)
            if count >= len(proj):
                result = new_result
            distance = _det(dx, dy, px - result[0], py - result[1])
    return result


def solve_velocity(
    lines: Sequence[Line],
    n_obstacle_lines: int,
    max_speed: float,
    pref_velocity: tuple[float, float],
) -> tuple[float, float]:
    """Velocity of norm <= max_speed closest to pref_velocity given the lines."""
    count, result = _linear_program2(
        lines, max_speed, pref_velocity[0], pref_velocity[1], False
    )
    if count < len(lines):
        result = _linear_program3(lines, n_obstacle_lines, count, max_speed, result)
    return result


def orca_velocity(
    self_disk: OrcaDisk,
    neighbors: Sequence[OrcaDisk],
    obstacle_segments: Iterable[tuple[tuple[float, float], tuple[float, float]]],
    params: OrcaParams,
    pref_velocity: tuple[float, float],
    max_speed: float,
    dt: float = 0.2,
) -> tuple[float, float]:
    """New velocity closest to pref_velocity that respects all constraints.

    Always returns a velocity of norm <= max_speed: when the constraints are
    infeasible the fallback minimizes the largest violation instead of
    failing.
    """
    lines, n_obs = build_orca_lines(self_disk, neighbors, obstacle_segments, params, dt)
    return solve_velocity(lines, n_obs, max_speed, pref_velocity)
