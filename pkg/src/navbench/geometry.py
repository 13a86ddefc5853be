"""Static 2D world geometry: polygon maps, signed surface distances, LiDAR raycasting.

A world is an axis-aligned rectangle whose four edges act as solid walls, plus
a set of simple polygons.  Everything is metric (meters, radians).  All
functions are pure: identical inputs give bit-identical outputs, so scans and
maps can be replayed exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

Bounds = tuple[float, float, float, float]
Circle = tuple[tuple[float, float], float]

DEFAULT_BOUNDS: Bounds = (-10.0, -10.0, 10.0, 10.0)

# Convex obstacle sampling ranges used by generate_map.
POLYGON_VERTEX_RANGE = (3, 8)
POLYGON_RADIUS_RANGE = (0.3, 1.5)
MAX_PLACEMENT_ATTEMPTS = 1000
_MIN_VERTEX_GAP = 0.15  # radians between consecutive circumcircle angles


class PlacementExhaustedError(RuntimeError):
    """Rejection sampling ran out of attempts ("placement-exhausted")."""


class MapFormatError(ValueError):
    """A map file or polygon violates the map invariants."""


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    w = theta % TWO_PI
    if w > math.pi:
        w -= TWO_PI
    return w


@dataclass(frozen=True)
class Pose:
    """Planar pose; theta is normalized to (-pi, pi] on construction."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@lru_cache(maxsize=32)
def _beam_angles(n_beams: int, angular_span: float) -> np.ndarray:
    angles = np.arange(n_beams, dtype=float) * (angular_span / n_beams)
    angles.setflags(write=False)
    return angles


@dataclass(frozen=True)
class LidarConfig:
    """Planar range sensor: evenly spaced beams, beam 0 along robot +x, CCW."""

    n_beams: int = 1080
    angular_span: float = TWO_PI
    max_range: float = 25.0
    mount_offset: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.n_beams < 1:
            raise ValueError("n_beams must be >= 1")
        if not (0.0 < self.angular_span <= TWO_PI):
            raise ValueError("angular_span must be in (0, 2*pi]")
        if self.max_range <= 0.0:
            raise ValueError("max_range must be > 0")

    def beam_angles(self) -> np.ndarray:
        """Beam directions relative to the robot heading, shape (n_beams,)."""
        return _beam_angles(self.n_beams, self.angular_span)


@dataclass
class Scan:
    """One LiDAR sweep: ranges in meters, max_range for beams that hit nothing."""

    ranges: np.ndarray
    timestamp_step: int = 0


def _signed_area(verts: np.ndarray) -> float:
    x = verts[:, 0]
    y = verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _orientation(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _segments_cross(a1, a2, b1, b2) -> bool:
    """True if segments a1a2 and b1b2 intersect (including touching)."""
    d1 = _orientation(b1, b2, a1)
    d2 = _orientation(b1, b2, a2)
    d3 = _orientation(a1, a2, b1)
    d4 = _orientation(a1, a2, b2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True

    def on_segment(p, q, r):
        return (
            min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
            and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])
        )

    if d1 == 0 and on_segment(b1, b2, a1):
        return True
    if d2 == 0 and on_segment(b1, b2, a2):
        return True
    if d3 == 0 and on_segment(a1, a2, b1):
        return True
    if d4 == 0 and on_segment(a1, a2, b2):
        return True
    return False


def validate_polygon(verts: np.ndarray, bounds: Bounds, index: int) -> None:
    """Raise MapFormatError (naming the polygon index) on any invariant violation."""
    if verts.ndim != 2 or verts.shape[1] != 2:
        raise MapFormatError(f"polygon {index}: vertices must be an Nx2 array")
    n = len(verts)
    if n < 3:
        raise MapFormatError(f"polygon {index}: needs at least 3 vertices, got {n}")
    xmin, ymin, xmax, ymax = bounds
    inside = (
        (verts[:, 0] > xmin)
        & (verts[:, 0] < xmax)
        & (verts[:, 1] > ymin)
        & (verts[:, 1] < ymax)
    )
    if not bool(inside.all()):
        bad = int(np.argmin(inside))
        raise MapFormatError(
            f"polygon {index}: vertex {bad} not strictly inside bounds"
        )
    edges = [(verts[i], verts[(i + 1) % n]) for i in range(n)]
    for i, (a1, a2) in enumerate(edges):
        if float(np.hypot(*(a2 - a1))) < 1e-9:
            raise MapFormatError(f"polygon {index}: zero-length edge {i}")
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j - i) == 1 or (i == 0 and j == n - 1):
                continue  # adjacent edges share a vertex legitimately
            if _segments_cross(edges[i][0], edges[i][1], edges[j][0], edges[j][1]):
                raise MapFormatError(
                    f"polygon {index}: edges {i} and {j} intersect (not simple)"
                )


@dataclass
class MapModel:
    """Polygon obstacles inside a rectangular bounding wall.

    Polygon vertex order is normalized to counter-clockwise.  Treat instances
    as immutable after construction; derived edge arrays are cached lazily.
    """

    name: str
    bounds: Bounds
    polygons: list[np.ndarray]

    def __post_init__(self) -> None:
        self.bounds = tuple(float(v) for v in self.bounds)
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmax > xmin and ymax > ymin):
            raise MapFormatError("bounds must have positive width and height")
        polys = []
        for i, poly in enumerate(self.polygons):
            arr = np.asarray(poly, dtype=float)
            validate_polygon(arr, self.bounds, index=i)
            if _signed_area(arr) < 0.0:
                arr = arr[::-1].copy()
            arr.setflags(write=False)
            polys.append(arr)
        self.polygons = polys
        self._segments: tuple[np.ndarray, np.ndarray] | None = None
        self._poly_edges: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    @property
    def wall_segments(self) -> np.ndarray:
        """The four bounding-wall edges, shape (4, 2, 2)."""
        xmin, ymin, xmax, ymax = self.bounds
        return np.array(
            [
                [[xmin, ymin], [xmax, ymin]],
                [[xmax, ymin], [xmax, ymax]],
                [[xmax, ymax], [xmin, ymax]],
                [[xmin, ymax], [xmin, ymin]],
            ]
        )

    def all_segments(self) -> tuple[np.ndarray, np.ndarray]:
        """(start, end) arrays of every solid segment: polygon edges + walls."""
        if self._segments is None:
            starts = [w[0] for w in self.wall_segments]
            ends = [w[1] for w in self.wall_segments]
            for poly in self.polygons:
                starts.extend(poly)
                ends.extend(np.roll(poly, -1, axis=0))
            a = np.asarray(starts, dtype=float)
            b = np.asarray(ends, dtype=float)
            a.setflags(write=False)
            b.setflags(write=False)
            self._segments = (a, b)
        return self._segments

    def polygon_edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Concatenated polygon edges plus per-polygon offsets for reduction."""
        if self._poly_edges is None:
            starts, ends, offsets = [], [], [0]
            for poly in self.polygons:
                starts.extend(poly)
                ends.extend(np.roll(poly, -1, axis=0))
                offsets.append(offsets[-1] + len(poly))
            a = np.asarray(starts, dtype=float).reshape(-1, 2)
            b = np.asarray(ends, dtype=float).reshape(-1, 2)
            self._poly_edges = (a, b, np.asarray(offsets))
        return self._poly_edges


def _point_in_polygon(point: Sequence[float], verts: np.ndarray) -> bool:
    """Even-odd rule; boundary points may land either side (distance is 0 there)."""
    x, y = float(point[0]), float(point[1])
    vx = verts[:, 0]
    vy = verts[:, 1]
    nx = np.roll(vx, -1)
    ny = np.roll(vy, -1)
    crosses = (vy > y) != (ny > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_at_y = vx + (y - vy) * (nx - vx) / (ny - vy)
    hits = crosses & (x_at_y > x)
    return bool(np.count_nonzero(hits) % 2)


def _point_segment_distances(point: Sequence[float], a: np.ndarray, b: np.ndarray) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    e = b - a
    pa = p - a
    denom = np.einsum("ij,ij->i", e, e)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.einsum("ij,ij->i", pa, e) / denom
    t = np.clip(np.nan_to_num(t), 0.0, 1.0)
    closest = a + t[:, None] * e
    return np.hypot(p[0] - closest[:, 0], p[1] - closest[:, 1])


def polygon_signed_distance(verts: np.ndarray, point: Sequence[float]) -> float:
    """Distance from point to the polygon boundary; negative inside."""
    a = verts
    b = np.roll(verts, -1, axis=0)
    d = float(_point_segment_distances(point, a, b).min())
    return -d if _point_in_polygon(point, verts) else d


def _wall_signed_distance(bounds: Bounds, x: float, y: float) -> float:
    xmin, ymin, xmax, ymax = bounds
    inner = min(x - xmin, xmax - x, y - ymin, ymax - y)
    if inner >= 0.0:
        return inner
    dx = max(xmin - x, 0.0, x - xmax)
    dy = max(ymin - y, 0.0, y - ymax)
    return -math.hypot(dx, dy)


def distance_to_surfaces(
    map_model: MapModel,
    dynamic_circles: Iterable[Circle],
    point: Sequence[float],
) -> float:
    """Minimum distance from point to any obstacle surface; negative when inside.

    Surfaces are the bounding wall, polygon boundaries and dynamic circle
    boundaries; a penetrating point reports the penetration depth, negated.
    """
    x, y = float(point[0]), float(point[1])
    best = _wall_signed_distance(map_model.bounds, x, y)
    a, b, offsets = map_model.polygon_edges()
    if len(a):
        edge_d = _point_segment_distances((x, y), a, b)
        per_poly = np.minimum.reduceat(edge_d, offsets[:-1])
        for i, poly in enumerate(map_model.polygons):
            d = float(per_poly[i])
            if _point_in_polygon((x, y), poly):
                d = -d
            if d < best:
                best = d
    for (cx, cy), r in dynamic_circles:
        d = math.hypot(x - cx, y - cy) - r
        if d < best:
            best = d
    return best


def _points_in_polygon(pts: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Vectorized even-odd test: pts (N, 2) against one polygon."""
    x = pts[:, 0][:, None]
    y = pts[:, 1][:, None]
    vx = verts[:, 0][None, :]
    vy = verts[:, 1][None, :]
    nx = np.roll(verts[:, 0], -1)[None, :]
    ny = np.roll(verts[:, 1], -1)[None, :]
    crosses = (vy > y) != (ny > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_at_y = vx + (y - vy) * (nx - vx) / (ny - vy)
    hits = crosses & (x_at_y > x)
    return (np.count_nonzero(hits, axis=1) % 2).astype(bool)


def signed_distances(
    map_model: MapModel,
    points: np.ndarray,
    dynamic_circles: Sequence[Circle] = (),
) -> np.ndarray:
    """Vectorized distance_to_surfaces over an (N, 2) array of points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x = pts[:, 0]
    y = pts[:, 1]
    xmin, ymin, xmax, ymax = map_model.bounds
    inner = np.minimum.reduce([x - xmin, xmax - x, y - ymin, ymax - y])
    dx = np.maximum(np.maximum(xmin - x, x - xmax), 0.0)
    dy = np.maximum(np.maximum(ymin - y, y - ymax), 0.0)
    best = np.where(inner >= 0.0, inner, -np.hypot(dx, dy))

    a, b, offsets = map_model.polygon_edges()
    if len(a):
        e = b - a
        pa = pts[:, None, :] - a[None, :, :]
        denom = np.einsum("ij,ij->i", e, e)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.einsum("nmj,mj->nm", pa, e) / denom[None, :]
        t = np.clip(np.nan_to_num(t), 0.0, 1.0)
        closest = a[None, :, :] + t[:, :, None] * e[None, :, :]
        d = np.hypot(pts[:, None, 0] - closest[:, :, 0], pts[:, None, 1] - closest[:, :, 1])
        per_poly = np.minimum.reduceat(d, offsets[:-1], axis=1)
        for i, poly in enumerate(map_model.polygons):
            signed = np.where(_points_in_polygon(pts, poly), -per_poly[:, i], per_poly[:, i])
            best = np.minimum(best, signed)

    for (cx, cy), r in dynamic_circles:
        best = np.minimum(best, np.hypot(x - cx, y - cy) - r)
    return best


def raycast_scan(
    map_model: MapModel,
    dynamic_circles: Sequence[Circle],
    pose: Pose,
    cfg: LidarConfig,
    timestamp_step: int = 0,
) -> Scan:
    """Cast cfg.n_beams rays against polygon edges, walls and dynamic circles.

    Beam i points along pose.theta + i * angular_span / n_beams, originating at
    the mount point.  Beams with no hit within range report exactly max_range.
    """
    rel = cfg.beam_angles()
    ang = pose.theta + rel
    dirx = np.cos(ang)
    diry = np.sin(ang)
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    mx, my = cfg.mount_offset
    ox = pose.x + c * mx - s * my
    oy = pose.y + s * mx + c * my

    best = np.full(cfg.n_beams, float(cfg.max_range))

    a, b = map_model.all_segments()
    ex = b[:, 0] - a[:, 0]
    ey = b[:, 1] - a[:, 1]
    rx = a[:, 0] - ox
    ry = a[:, 1] - oy
    t_num = rx * ey - ry * ex  # (M,)
    denom = dirx[:, None] * ey[None, :] - diry[:, None] * ex[None, :]  # (N, M)
    s_num = rx[None, :] * diry[:, None] - ry[None, :] * dirx[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = t_num[None, :] / denom
        u = s_num / denom
    ok = (np.abs(denom) > 1e-12) & (t >= 0.0) & (u >= 0.0) & (u <= 1.0)
    t = np.where(ok, t, np.inf)
    np.minimum(best, t.min(axis=1), out=best)

    if dynamic_circles:
        centers = np.asarray([c0 for c0, _ in dynamic_circles], dtype=float)
        radii = np.asarray([r for _, r in dynamic_circles], dtype=float)
        ocx = ox - centers[:, 0]
        ocy = oy - centers[:, 1]
        bq = dirx[:, None] * ocx[None, :] + diry[:, None] * ocy[None, :]  # (N, C)
        cq = (ocx * ocx + ocy * ocy - radii * radii)[None, :]
        disc = bq * bq - cq
        sq = np.sqrt(np.maximum(disc, 0.0))
        t1 = -bq - sq
        t2 = -bq + sq
        tc = np.where(t1 >= 0.0, t1, np.where(t2 >= 0.0, t2, np.inf))
        tc = np.where(disc >= 0.0, tc, np.inf)
        np.minimum(best, tc.min(axis=1), out=best)

    return Scan(ranges=best, timestamp_step=timestamp_step)


def generate_map(
    seed: int,
    n_polygons: int,
    bounds: Bounds = DEFAULT_BOUNDS,
    clearance_points: Sequence[tuple[float, float, float]] = (),
    name: str | None = None,
) -> MapModel:
    """Scatter n_polygons random convex polygons (3-8 vertices) inside bounds.

    Each polygon is inscribed in a circumcircle of radius drawn uniformly from
    [0.3, 1.5] m and rejected if it intersects any (x, y, radius) clearance
    disk, which keeps spawn and goal locations free.  The same arguments yield
    a bit-identical map.

    Raises PlacementExhaustedError after 1000 failed attempts for one polygon.
    """
    if n_polygons < 0:
        raise ValueError("n_polygons must be >= 0")
    for i, (_, _, r) in enumerate(clearance_points):
        if r <= 0.0:
            raise ValueError(f"clearance radius {i} must be > 0")
    rng = np.random.default_rng(int(seed))
    xmin, ymin, xmax, ymax = (float(v) for v in bounds)
    lo, hi = POLYGON_RADIUS_RANGE
    polygons: list[np.ndarray] = []
    for i in range(int(n_polygons)):
        for _attempt in range(MAX_PLACEMENT_ATTEMPTS):
            n_verts = int(rng.integers(POLYGON_VERTEX_RANGE[0], POLYGON_VERTEX_RANGE[1] + 1))
            radius = float(rng.uniform(lo, hi))
            angles = np.sort(rng.uniform(0.0, TWO_PI, n_verts))
            cx_lo, cx_hi = xmin + radius + 1e-6, xmax - radius - 1e-6
            cy_lo, cy_hi = ymin + radius + 1e-6, ymax - radius - 1e-6
            if cx_lo >= cx_hi or cy_lo >= cy_hi:
                continue
            cx = float(rng.uniform(cx_lo, cx_hi))
            cy = float(rng.uniform(cy_lo, cy_hi))
            gaps = np.diff(angles)
            wrap_gap = angles[0] + TWO_PI - angles[-1]
            if min(gaps.min() if len(gaps) else wrap_gap, wrap_gap) < _MIN_VERTEX_GAP:
                continue
            verts = np.column_stack(
                (cx + radius * np.cos(angles), cy + radius * np.sin(angles))
            )
            if any(
                polygon_signed_distance(verts, (px, py)) < cr
                for px, py, cr in clearance_points
            ):
                continue
            polygons.append(verts)
            break
        else:
            raise PlacementExhaustedError(
                f"placement-exhausted: polygon {i} not placed after "
                f"{MAX_PLACEMENT_ATTEMPTS} attempts"
            )
    map_name = name if name is not None else f"procedural-{seed}-{n_polygons}"
    return MapModel(name=map_name, bounds=(xmin, ymin, xmax, ymax), polygons=polygons)


def map_to_dict(map_model: MapModel) -> dict:
    return {
        "name": map_model.name,
        "bounds": [float(v) for v in map_model.bounds],
        "polygons": [[[float(x), float(y)] for x, y in poly] for poly in map_model.polygons],
    }


def map_from_dict(data: dict) -> MapModel:
    try:
        name = str(data["name"])
        bounds = tuple(float(v) for v in data["bounds"])
        raw_polys = data["polygons"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MapFormatError(f"malformed map object: {exc}") from exc
    if len(bounds) != 4:
        raise MapFormatError("bounds must be [xmin, ymin, xmax, ymax]")
    polys = [np.asarray(p, dtype=float) for p in raw_polys]
    return MapModel(name=name, bounds=bounds, polygons=polys)


def save_map(map_model: MapModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(map_to_dict(map_model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_map(path) -> MapModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MapFormatError(f"{path}: invalid JSON: {exc}") from exc
    return map_from_dict(data)
