"""The evaluation scenario suite: 9 scenario templates on 3 fixed maps.

Scenarios 7-9 follow their canonical definitions (trivial close goal, one
obstacle in between, circle crossing with antipodal goals); scenarios 1-6 are
reconstructions of a widely used navigation protocol: short free-path goal,
long-range goal, dense static crowd, narrow passage, crossing pedestrian flow,
and a goal hidden behind clutter.  All spawn points are found by seeded
geometric search against the fixed maps, so the suite is identical on every
build.
"""

from __future__ import annotations

import functools
import json
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .env import (
    AgentSpec,
    EpisodeSpec,
    NamedMap,
    RandomLayout,
    ScriptedLayout,
    SpecFormatError,
    spec_from_dict,
    spec_to_dict,
)
from .geometry import MapModel, distance_to_surfaces, signed_distances
from .maps import MAP_NAMES, builtin_map

SCENARIO_IDS = tuple(range(1, 10))
SCENARIO_NAMES = {
    1: "short_free_path",
    2: "long_range_goal",
    3: "static_crowd",
    4: "narrow_passage",
    5: "crossing_flow",
    6: "blocked_goal",
    7: "trivial_close_goal",
    8: "single_obstacle",
    9: "circle_crossing",
}


@dataclass(frozen=True)
class ScenarioCase:
    scenario_id: int
    map_name: str
    spec: EpisodeSpec


class ScenarioSearchError(RuntimeError):
    """A scenario template could not be realized on a map."""


# --------------------------------------------------------------------------
# Geometric search helpers
# --------------------------------------------------------------------------

_REACH_MARGIN = 0.35
_REACH_RESOLUTION = 0.25


class _MapContext:
    """A fixed map plus cached free-space data for fast scenario search."""

    def __init__(self, map_model: MapModel):
        self.map_model = map_model
        xmin, ymin, xmax, ymax = map_model.bounds
        self.nx = int((xmax - xmin) / _REACH_RESOLUTION) + 1
        self.ny = int((ymax - ymin) / _REACH_RESOLUTION) + 1
        xs = xmin + (np.arange(self.nx) + 0.5) * _REACH_RESOLUTION
        ys = ymin + (np.arange(self.ny) + 0.5) * _REACH_RESOLUTION
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.column_stack((gx.ravel(), gy.ravel()))
        self.free = (
            signed_distances(map_model, pts) >= _REACH_MARGIN
        ).reshape(self.nx, self.ny)

    def clearance(self, point) -> float:
        return distance_to_surfaces(self.map_model, [], point)

    def path_clearance(self, p, q, step: float = 0.1) -> float:
        """Minimum obstacle clearance along the straight segment p-q."""
        d = math.hypot(q[0] - p[0], q[1] - p[1])
        ts = np.linspace(0.0, 1.0, max(2, int(d / step) + 1))
        pts = np.column_stack(
            (p[0] + ts * (q[0] - p[0]), p[1] + ts * (q[1] - p[1]))
        )
        return float(signed_distances(self.map_model, pts).min())

    def polygons_crossed(self, p, q, step: float = 0.05) -> int:
        """Number of distinct polygons the straight segment p-q passes through."""
        from .geometry import _points_in_polygon

        d = math.hypot(q[0] - p[0], q[1] - p[1])
        ts = np.linspace(0.0, 1.0, max(2, int(d / step) + 1))
        pts = np.column_stack(
            (p[0] + ts * (q[0] - p[0]), p[1] + ts * (q[1] - p[1]))
        )
        return sum(
            1
            for poly in self.map_model.polygons
            if bool(_points_in_polygon(pts, poly).any())
        )

    def reachable(self, p, q) -> bool:
        """Breadth-first search over the cached coarse free-space grid."""
        xmin, ymin, _, _ = self.map_model.bounds

        def cell(pt):
            i = min(max(int((pt[0] - xmin) / _REACH_RESOLUTION), 0), self.nx - 1)
            j = min(max(int((pt[1] - ymin) / _REACH_RESOLUTION), 0), self.ny - 1)
            return i, j

        def snap(c):
            if self.free[c]:
                return c
            for radius in range(1, 4):
                for di in range(-radius, radius + 1):
                    for dj in range(-radius, radius + 1):
                        i, j = c[0] + di, c[1] + dj
                        if 0 <= i < self.nx and 0 <= j < self.ny and self.free[i, j]:
                            return (i, j)
            return None

        start = snap(cell(p))
        target = snap(cell(q))
        if start is None or target is None:
            return False
        seen = np.zeros_like(self.free)
        queue = deque([start])
        seen[start] = True
        while queue:
            i, j = queue.popleft()
            if (i, j) == target:
                return True
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ni, nj = i + di, j + dj
                if (
                    0 <= ni < self.nx
                    and 0 <= nj < self.ny
                    and self.free[ni, nj]
                    and not seen[ni, nj]
                ):
                    seen[ni, nj] = True
                    queue.append((ni, nj))
        return False


def _sample_clear(rng, ctx: _MapContext, clearance: float, tries: int = 4000):
    xmin, ymin, xmax, ymax = ctx.map_model.bounds
    inset = max(clearance, 0.4)
    for _ in range(tries):
        x = float(rng.uniform(xmin + inset, xmax - inset))
        y = float(rng.uniform(ymin + inset, ymax - inset))
        if ctx.clearance((x, y)) >= clearance:
            return (x, y)
    return None


def _find_pair(
    rng,
    ctx: _MapContext,
    dmin: float,
    dmax: float,
    point_clearance: float = 0.6,
    min_path_clearance: float | None = None,
    max_path_clearance: float | None = None,
    crossed_min: int | None = None,
    crossed_max: int | None = None,
    require_reachable: bool = True,
    tries: int = 3000,
):
    for _ in range(tries):
        p = _sample_clear(rng, ctx, point_clearance, tries=50)
        q = _sample_clear(rng, ctx, point_clearance, tries=50)
        if p is None or q is None:
            continue
        d = math.hypot(q[0] - p[0], q[1] - p[1])
        if not (dmin <= d <= dmax):
            continue
        if min_path_clearance is not None or max_path_clearance is not None:
            pc = ctx.path_clearance(p, q)
            if min_path_clearance is not None and pc < min_path_clearance:
                continue
            if max_path_clearance is not None and pc > max_path_clearance:
                continue
        if crossed_min is not None or crossed_max is not None:
            crossed = ctx.polygons_crossed(p, q)
            if crossed_min is not None and crossed < crossed_min:
                continue
            if crossed_max is not None and crossed > crossed_max:
                continue
        if require_reachable and not ctx.reachable(p, q):
            continue
        return p, q
    return None


def _search(attempts, what: str, map_name: str):
    """Run progressively relaxed search attempts; fail loudly if all miss."""
    for attempt in attempts:
        result = attempt()
        if result is not None:
            return result
    raise ScenarioSearchError(f"could not construct {what} on map {map_name!r}")


# --------------------------------------------------------------------------
# Scenario templates
# --------------------------------------------------------------------------

def _base_spec(map_name: str, scenario_id: int, map_index: int, **kwargs) -> EpisodeSpec:
    seed = 10_000 + 1_000 * map_index + 100 * scenario_id
    return EpisodeSpec(
        seed=seed,
        map_source=NamedMap(map_name),
        scenario_id=scenario_id,
        map_label=map_name,
        **kwargs,
    )


def _build_scenario(ctx: _MapContext, map_name: str, map_index: int, sid: int) -> EpisodeSpec:
    rng = np.random.default_rng(7_700 + 13 * map_index + sid)

    if sid == 1:  # short free-path goal
        p, q = _search(
            [
                lambda: _find_pair(rng, ctx, 3.5, 4.5, min_path_clearance=0.45),
                lambda: _find_pair(rng, ctx, 3.0, 5.0, min_path_clearance=0.40),
            ],
            SCENARIO_NAMES[sid],
            map_name,
        )
        return _base_spec(map_name, sid, map_index, robot_spawn=p, goal=q, n_agents=0)

    if sid == 2:  # long-range goal across the map
        p, q = _search(
            [
                lambda: _find_pair(rng, ctx, 14.0, 30.0),
                lambda: _find_pair(rng, ctx, 12.0, 30.0),
                lambda: _find_pair(rng, ctx, 10.0, 30.0),
            ],
            SCENARIO_NAMES[sid],
            map_name,
        )
        return _base_spec(map_name, sid, map_index, robot_spawn=p, goal=q, n_agents=2)

    if sid == 3:  # dense static crowd between robot and goal
        p, q = _search(
            [
                lambda: _find_pair(rng, ctx, 7.0, 9.0, min_path_clearance=0.40),
                lambda: _find_pair(rng, ctx, 6.0, 10.0, min_path_clearance=0.35),
                lambda: _find_pair(rng, ctx, 5.0, 11.0),
            ],
            SCENARIO_NAMES[sid],
            map_name,
        )
        mid = ((p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0)
        crowd: list[AgentSpec] = []
        tries = 0
        while len(crowd) < 8 and tries < 8000:
            tries += 1
            ang = float(rng.uniform(0.0, 2.0 * math.pi))
            rad = float(rng.uniform(0.0, 2.2))
            x = mid[0] + rad * math.cos(ang)
            y = mid[1] + rad * math.sin(ang)
            if ctx.clearance((x, y)) < 0.35:
                continue
            if any(math.hypot(x - a.position[0], y - a.position[1]) < 0.75 for a in crowd):
                continue
            if math.hypot(x - p[0], y - p[1]) < 1.0 or math.hypot(x - q[0], y - q[1]) < 1.0:
                continue
            crowd.append(AgentSpec(position=(x, y), goal=(x, y), policy="static"))
        return _base_spec(
            map_name,
            sid,
            map_index,
            robot_spawn=p,
            goal=q,
            n_agents=len(crowd),
            agent_layout=ScriptedLayout(agents=tuple(crowd)),
        )

    if sid == 4:  # narrow passage on the straight route
        p, q = _search(
            [
                lambda: _find_pair(
                    rng, ctx, 5.0, 8.0, min_path_clearance=0.31, max_path_clearance=0.55
                ),
                lambda: _find_pair(
                    rng, ctx, 4.0, 9.0, min_path_clearance=0.31, max_path_clearance=0.70
                ),
                lambda: _find_pair(
                    rng, ctx, 3.0, 10.0, min_path_clearance=0.31, max_path_clearance=0.90
                ),
            ],
            SCENARIO_NAMES[sid],
            map_name,
        )
        return _base_spec(map_name, sid, map_index, robot_spawn=p, goal=q, n_agents=0)

    if sid == 5:  # crossing pedestrian flow
        p, q = _search(
            [
                lambda: _find_pair(rng, ctx, 5.0, 7.0, min_path_clearance=0.45),
                lambda: _find_pair(rng, ctx, 4.0, 8.0, min_path_clearance=0.40),
            ],
            SCENARIO_NAMES[sid],
            map_name,
        )
        ux, uy = q[0] - p[0], q[1] - p[1]
        d = math.hypot(ux, uy)
        ux, uy = ux / d, uy / d
        wx, wy = -uy, ux
        mid = ((p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0)
        flow: list[AgentSpec] = []
        for offset in (3.5, 3.0, 2.5, 2.0):
            flow = []
            for k, along in enumerate((-2.4, -0.8, 0.8, 2.4)):
                side = 1.0 if k % 2 == 0 else -1.0
                start = (
                    mid[0] + side * offset * wx + along * ux,
                    mid[1] + side * offset * wy + along * uy,
                )
                goal = (
                    mid[0] - side * offset * wx + along * ux,
                    mid[1] - side * offset * wy + along * uy,
                )
                if ctx.clearance(start) < 0.35 or ctx.clearance(goal) < 0.35:
                    flow = []
                    break
                flow.append(
                    AgentSpec(position=start, goal=goal, policy="constant_velocity")
                )
            if flow:
                break
        if not flow:
            # Fall back to avoidance-driven crossers that route themselves.
            tries = 0
            while len(flow) < 4 and tries < 4000:
                tries += 1
                along = float(rng.uniform(-2.5, 2.5))
                offset = float(rng.uniform(2.0, 4.0))
                side = 1.0 if tries % 2 == 0 else -1.0
                start = (
                    mid[0] + side * offset * wx + along * ux,
                    mid[1] + side * offset * wy + along * uy,
                )
                goal = (
                    mid[0] - side * offset * wx + along * ux,
                    mid[1] - side * offset * wy + along * uy,
                )
                if ctx.clearance(start) < 0.35 or ctx.clearance(goal) < 0.35:
                    continue
                flow.append(AgentSpec(position=start, goal=goal, policy="orca"))
            if not flow:
                raise ScenarioSearchError(
                    f"could not place crossing flow on map {map_name!r}"
                )
        return _base_spec(
            map_name,
            sid,
            map_index,
            robot_spawn=p,
            goal=q,
            n_agents=len(flow),
            agent_layout=ScriptedLayout(agents=tuple(flow)),
        )

    if sid == 6:  # goal hidden behind clutter; straight line blocked
        p, q = _search(
            [
                lambda: _find_pair(rng, ctx, 6.0, 10.0, crossed_min=2),
                lambda: _find_pair(rng, ctx, 5.0, 12.0, crossed_min=1),
                lambda: _find_pair(
                    rng, ctx, 5.0, 12.0, min_path_clearance=None, max_path_clearance=0.25
                ),
            ],
            SCENARIO_NAMES[sid],
            map_name,
        )
        return _base_spec(map_name, sid, map_index, robot_spawn=p, goal=q, n_agents=0)

    if sid == 7:  # trivial: goal 1.5 m ahead, nothing in between
        p, q = _search(
            [
                lambda: _find_pair(rng, ctx, 1.4, 1.6, min_path_clearance=0.50),
                lambda: _find_pair(rng, ctx, 1.3, 1.7, min_path_clearance=0.45),
            ],
            SCENARIO_NAMES[sid],
            map_name,
        )
        return _base_spec(map_name, sid, map_index, robot_spawn=p, goal=q, n_agents=0)

    if sid == 8:  # easy: close goal with a single obstacle in between
        p, q = _search(
            [
                lambda: _find_pair(rng, ctx, 2.8, 4.2, crossed_min=1, crossed_max=1),
                lambda: _find_pair(rng, ctx, 2.5, 5.0, crossed_min=1, crossed_max=1),
                lambda: _find_pair(rng, ctx, 2.5, 6.0, crossed_min=1, crossed_max=2),
            ],
            SCENARIO_NAMES[sid],
            map_name,
        )
        return _base_spec(map_name, sid, map_index, robot_spawn=p, goal=q, n_agents=0)

    if sid == 9:  # circle crossing with antipodal goals, no obstacles inside
        n_agents = 5
        found = None
        for circle_r in (2.0, 1.7, 1.4):
            center = _sample_clear(rng, ctx, circle_r + 0.55)
            if center is not None:
                found = (center, circle_r)
                break
        if found is None:
            raise ScenarioSearchError(
                f"could not place a clear circle on map {map_name!r}"
            )
        center, circle_r = found
        agents = []
        for k in range(n_agents):
            ang = 2.0 * math.pi * k / n_agents
            # Stagger spawn radii: simultaneous arrival at the center is a
            # stable deadlock of reciprocal avoidance.
            r_k = circle_r + float(rng.uniform(-0.2, 0.2))
            pos = (
                center[0] + r_k * math.cos(ang),
                center[1] + r_k * math.sin(ang),
            )
            goal = (
                center[0] - r_k * math.cos(ang),
                center[1] - r_k * math.sin(ang),
            )
            agents.append(AgentSpec(position=pos, goal=goal, policy="orca"))
        # The robot joins the crossing from the midpoint of one gap.
        robot_ang = -math.pi / n_agents
        spawn = (
            center[0] + circle_r * math.cos(robot_ang),
            center[1] + circle_r * math.sin(robot_ang),
        )
        goal = (
            center[0] - circle_r * math.cos(robot_ang),
            center[1] - circle_r * math.sin(robot_ang),
        )
        return _base_spec(
            map_name,
            sid,
            map_index,
            robot_spawn=spawn,
            goal=goal,
            n_agents=n_agents,
            agent_layout=ScriptedLayout(agents=tuple(agents)),
        )

    raise ValueError(f"unknown scenario id {sid}")


@functools.lru_cache(maxsize=1)
def _cached_suite() -> tuple[ScenarioCase, ...]:
    cases = []
    for map_index, map_name in enumerate(MAP_NAMES):
        ctx = _MapContext(builtin_map(map_name))
        for sid in SCENARIO_IDS:
            spec = _build_scenario(ctx, map_name, map_index, sid)
            cases.append(ScenarioCase(scenario_id=sid, map_name=map_name, spec=spec))
    return tuple(cases)


def make_test_suite() -> list[ScenarioCase]:
    """All 27 evaluation cases: 3 maps x 9 scenarios, frozen across builds."""
    return list(_cached_suite())


# --------------------------------------------------------------------------
# Scenario files
# --------------------------------------------------------------------------

def save_scenario(spec: EpisodeSpec, path) -> None:
    """Write a scenario spec as stable, hand-editable JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_scenario(path) -> EpisodeSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecFormatError(f"{path}: invalid JSON: {exc}") from exc
    return spec_from_dict(data)


def export_test_suite(directory) -> list[str]:
    """Write every suite case to directory as <map>_<id>.json; returns paths."""
    import os

    os.makedirs(directory, exist_ok=True)
    paths = []
    for case in make_test_suite():
        path = os.path.join(directory, f"{case.map_name}_{case.scenario_id}.json")
        save_scenario(case.spec, path)
        paths.append(path)
    return paths
