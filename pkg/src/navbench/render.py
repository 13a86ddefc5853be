"""Record rendering: per-step sensor frames and whole-episode trajectories.

Frames are drawn straight from recorded scans (robot frame, no world state
needed): a scan panel on the left and the rings occupancy grid on the right,
using exactly three gray levels for the grid.  Trajectory images replay the
recorded actions through the environment, so they need the episode spec that
produced the record (cmd_run writes it as a sidecar file).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from .agents import Action
from .env import EpisodeSpec, NavEnv
from .geometry import LidarConfig
from .representations import RingsConfig, rings_encode
from .geometry import Scan

# Trajectory color convention: blue success, orange failure, grey agents.
SUCCESS_COLOR = (40, 100, 235)
FAILURE_COLOR = (245, 130, 20)
AGENT_COLOR = (170, 170, 170)
GOAL_COLOR = (220, 40, 40)
OBSTACLE_COLOR = (70, 70, 70)
ROBOT_COLOR = (20, 160, 60)

# Frame layout: 256 px scan panel | 4 px separator | 256 px rings panel.
FRAME_PANEL = 256
FRAME_SEPARATOR = 4
FRAME_SIZE = (2 * FRAME_PANEL + FRAME_SEPARATOR, FRAME_PANEL)
RINGS_REGION = (FRAME_PANEL + FRAME_SEPARATOR, 0, FRAME_SIZE[0], FRAME_PANEL)
RINGS_GRAYS = {0.0: 0, 0.5: 128, 1.0: 255}


def frame_image(
    scan_ranges: np.ndarray,
    lidar: LidarConfig | None = None,
    rings_cfg: RingsConfig | None = None,
) -> Image.Image:
    """Compose the scan + rings frame for one recorded step."""
    if lidar is None:
        lidar = LidarConfig(n_beams=len(scan_ranges))
    if rings_cfg is None:
        rings_cfg = RingsConfig(r_max=lidar.max_range)
    ranges = np.asarray(scan_ranges, dtype=float)

    img = Image.new("RGB", FRAME_SIZE, (30, 30, 30))
    draw = ImageDraw.Draw(img)

    # Scan panel: hit points in the robot frame, robot at the center.
    draw.rectangle((0, 0, FRAME_PANEL - 1, FRAME_PANEL - 1), fill=(0, 0, 0))
    scale = (FRAME_PANEL / 2 - 2) / lidar.max_range
    cx = cy = FRAME_PANEL / 2
    angles = lidar.beam_angles()
    xs = cx + ranges * np.cos(angles) * scale
    ys = cy - ranges * np.sin(angles) * scale
    hit = ranges < lidar.max_range
    for x, y in zip(xs[hit], ys[hit]):
        draw.point((x, y), fill=(255, 255, 255))
    draw.ellipse((cx - 2, cy - 2, cx + 2, cy + 2), fill=ROBOT_COLOR)

    # Rings panel: angular columns left to right, radius growing downward.
    grid = rings_encode(Scan(ranges=ranges), angles, rings_cfg).cells
    gray = np.zeros(grid.shape, dtype=np.uint8)
    for value, level in RINGS_GRAYS.items():
        gray[grid == value] = level
    cell = Image.fromarray(gray.T, mode="L").convert("RGB")
    cell = cell.resize((FRAME_PANEL, FRAME_PANEL), resample=Image.NEAREST)
    img.paste(cell, (FRAME_PANEL + FRAME_SEPARATOR, 0))
    return img


def render_frames(
    episodes: list,
    out_dir,
    lidar: LidarConfig | None = None,
) -> list[str]:
    """One PNG per recorded step: frame_e<episode>_s<step>.png."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for ei, episode in enumerate(episodes):
        for si in range(len(episode.steps)):
            img = frame_image(episode.steps["s_l"][si], lidar=lidar)
            path = os.path.join(out_dir, f"frame_e{ei:03d}_s{si:04d}.png")
            img.save(path)
            paths.append(path)
    return paths


@dataclass
class TrajectoryRender:
    path: str
    outcome: str


def _world_to_px(x, y, bounds, scale, pad):
    xmin, ymin, xmax, ymax = bounds
    return (pad + (x - xmin) * scale, pad + (ymax - y) * scale)


def render_trajectory(
    spec: EpisodeSpec,
    actions: np.ndarray,
    out_path,
    pixels_per_meter: float = 24.0,
) -> TrajectoryRender:
    """Replay recorded actions and draw the map, agents, and robot path.

    The path is blue for a successful episode and orange for any failure
    (collision or timeout); dynamic agents leave grey body-disk stamps.
    """
    env = NavEnv(spec)
    env.reset()
    robot_path = [(env.robot.pose.x, env.robot.pose.y)]
    agent_stamps = [[a.position for a in env.agents]]
    outcome = "running"
    for arr in actions:
        result = env.step(Action.from_array(arr))
        robot_path.append((env.robot.pose.x, env.robot.pose.y))
        if env.step_index % 5 == 0:
            agent_stamps.append([a.position for a in env.agents])
        if result.done:
            outcome = result.outcome
            break

    bounds = env.map_model.bounds
    xmin, ymin, xmax, ymax = bounds
    pad = 10
    scale = pixels_per_meter
    size = (
        int((xmax - xmin) * scale) + 2 * pad,
        int((ymax - ymin) * scale) + 2 * pad,
    )
    img = Image.new("RGB", size, (255, 255, 255))
    draw = ImageDraw.Draw(img)

    draw.rectangle(
        (
            _world_to_px(xmin, ymax, bounds, scale, pad),
            _world_to_px(xmax, ymin, bounds, scale, pad),
        ),
        outline=(0, 0, 0),
        width=2,
    )
    for poly in env.map_model.polygons:
        pts = [_world_to_px(x, y, bounds, scale, pad) for x, y in poly]
        draw.polygon(pts, fill=OBSTACLE_COLOR)

    for stamp in agent_stamps:
        for (ax, ay) in stamp:
            r = 0.3 * scale
            px, py = _world_to_px(ax, ay, bounds, scale, pad)
            draw.ellipse((px - r, py - r, px + r, py + r), outline=AGENT_COLOR, width=2)

    gx, gy = _world_to_px(env.goal[0], env.goal[1], bounds, scale, pad)
    gr = 0.5 * scale
    draw.ellipse((gx - gr, gy - gr, gx + gr, gy + gr), outline=GOAL_COLOR, width=3)

    color = SUCCESS_COLOR if outcome == "success" else FAILURE_COLOR
    px_path = [_world_to_px(x, y, bounds, scale, pad) for x, y in robot_path]
    sx, sy = px_path[0]
    draw.ellipse((sx - 4, sy - 4, sx + 4, sy + 4), fill=ROBOT_COLOR)
    if len(px_path) >= 2:
        draw.line(px_path, fill=color, width=3)
    ex, ey = px_path[-1]
    draw.ellipse((ex - 3, ey - 3, ex + 3, ey + 3), fill=color)

    img.save(out_path)
    return TrajectoryRender(path=str(out_path), outcome=outcome)


def env_frame_array(env: NavEnv) -> np.ndarray:
    """Current-state frame as an HxWx3 uint8 array (for gym-style render)."""
    obs = env._last_observation
    if obs is None:
        raise RuntimeError("environment has no observation yet; call reset first")
    img = frame_image(obs.scan.ranges, lidar=env.spec.lidar)
    return np.asarray(img)
