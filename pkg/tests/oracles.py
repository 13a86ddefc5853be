"""Independent brute-force oracles used to verify the library's fast paths.

Everything here is deliberately naive (marching, dense sampling, scalar
loops) and never calls the code paths it checks.
"""

from __future__ import annotations

import math

import numpy as np


def point_in_convex(points: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Inside test for CCW convex polygons, vectorized over points."""
    pts = np.atleast_2d(points)
    inside = np.ones(len(pts), dtype=bool)
    n = len(verts)
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % n]
        cross = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
        inside &= cross >= 0.0
    return inside


def points_inside_any_obstacle(
    pts: np.ndarray,
    bounds,
    polygons,
    circles,
) -> np.ndarray:
    """True where a point is out of bounds, inside a polygon, or in a circle."""
    xmin, ymin, xmax, ymax = bounds
    hit = (pts[:, 0] < xmin) | (pts[:, 0] > xmax) | (pts[:, 1] < ymin) | (pts[:, 1] > ymax)
    for poly in polygons:
        hit |= point_in_convex(pts, poly)
    for (cx, cy), r in circles:
        hit |= np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) < r
    return hit


def marching_first_hit(
    origin,
    direction,
    bounds,
    polygons,
    circles,
    max_range: float,
    step: float = 1e-4,
    cap: float | None = None,
):
    """First ray parameter whose sample point lies inside an obstacle.

    Marches t = step, 2*step, ... up to cap (or max_range) and reports the
    first inside sample, or None.  cap only limits work; it never changes
    which points are tested up to it.
    """
    limit = max_range if cap is None else min(cap, max_range)
    n = int(limit / step)
    if n <= 0:
        return None
    ts = (np.arange(n, dtype=float) + 1.0) * step
    pts = np.column_stack(
        (origin[0] + ts * direction[0], origin[1] + ts * direction[1])
    )
    hit = points_inside_any_obstacle(pts, bounds, polygons, circles)
    idx = np.argmax(hit)
    if not hit[idx]:
        return None
    return float(ts[idx])


def boundary_points(bounds, polygons, circles, spacing: float) -> np.ndarray:
    """Dense samples of every obstacle boundary."""
    xmin, ymin, xmax, ymax = bounds
    samples = []

    def sample_segment(a, b):
        d = math.hypot(b[0] - a[0], b[1] - a[1])
        n = max(2, int(d / spacing) + 1)
        t = np.linspace(0.0, 1.0, n)
        samples.append(
            np.column_stack((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
        )

    walls = [
        ((xmin, ymin), (xmax, ymin)),
        ((xmax, ymin), (xmax, ymax)),
        ((xmax, ymax), (xmin, ymax)),
        ((xmin, ymax), (xmin, ymin)),
    ]
    for a, b in walls:
        sample_segment(a, b)
    for poly in polygons:
        for i in range(len(poly)):
            sample_segment(poly[i], poly[(i + 1) % len(poly)])
    for (cx, cy), r in circles:
        n = max(8, int(2.0 * math.pi * r / spacing) + 1)
        ang = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        samples.append(np.column_stack((cx + r * np.cos(ang), cy + r * np.sin(ang))))
    return np.vstack(samples)


def sampled_surface_distance(
    point,
    bounds,
    polygons,
    circles,
    spacing: float = 5e-4,
    boundary: np.ndarray | None = None,
) -> float:
    """Signed distance via dense boundary sampling plus exact inside tests.

    Pass a precomputed boundary array to amortize sampling over many queries
    of the same scene.
    """
    pts = boundary if boundary is not None else boundary_points(
        bounds, polygons, circles, spacing
    )
    d = float(np.hypot(pts[:, 0] - point[0], pts[:, 1] - point[1]).min())
    inside = bool(
        points_inside_any_obstacle(np.array([point], dtype=float), bounds, polygons, circles)[0]
    )
    return -d if inside else d


def polygon_disk_distance(verts: np.ndarray, center, radius: float) -> float:
    """Exhaustive vertex/edge distance from a polygon to a disk boundary."""
    best = math.inf
    n = len(verts)
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % n]
        ex, ey = b[0] - a[0], b[1] - a[1]
        denom = ex * ex + ey * ey
        t = ((center[0] - a[0]) * ex + (center[1] - a[1]) * ey) / denom
        t = min(max(t, 0.0), 1.0)
        cx, cy = a[0] + t * ex, a[1] + t * ey
        best = min(best, math.hypot(center[0] - cx, center[1] - cy))
    if point_in_convex(np.array([center], dtype=float), verts)[0]:
        return -radius  # center swallowed by the polygon: definitely intersecting
    return best - radius


def halfplane_feasible(lines, velocities: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Mask of sampled velocities satisfying every half-plane constraint."""
    ok = np.ones(len(velocities), dtype=bool)
    for line in lines:
        px, py = line.point
        dx, dy = line.direction
        # Feasible side: det(direction, v - point) >= 0.
        det = dx * (velocities[:, 1] - py) - dy * (velocities[:, 0] - px)
        ok &= det >= -tol
    return ok


def sample_disk(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    ang = rng.random(n) * 2.0 * np.pi
    return np.column_stack((r * np.cos(ang), r * np.sin(ang)))


def halfplane_lp_oracle(lines, max_speed: float, pref, n: int, rng) -> tuple:
    """Sampled solve: nearest feasible velocity to pref, or None if none found.

    A global round of n samples is followed by local re-sampling around the
    incumbent best (shrinking neighborhoods), which pins the optimum down far
    below the global sample spacing while staying a pure sampling method.
    Also returns the smallest sampled maximum-violation, for checking the
    infeasible-case fallback.
    """

    def evaluate(velocities):
        inside = np.hypot(velocities[:, 0], velocities[:, 1]) <= max_speed
        velocities = velocities[inside]
        feasible = halfplane_feasible(lines, velocities)
        worst = np.zeros(len(velocities))
        for line in lines:
            px, py = line.point
            dx, dy = line.direction
            det = dx * (velocities[:, 1] - py) - dy * (velocities[:, 0] - px)
            worst = np.maximum(worst, -det)
        return velocities, feasible, worst

    velocities = np.vstack([sample_disk(rng, n, max_speed), [[pref[0], pref[1]]]])
    velocities, feasible, worst = evaluate(velocities)
    best_violation = float(worst.min())
    if not feasible.any():
        return None, best_violation

    cand = velocities[feasible]
    dist = np.hypot(cand[:, 0] - pref[0], cand[:, 1] - pref[1])
    best = cand[int(np.argmin(dist))]
    best_dist = float(dist.min())
    # The objective can be nearly flat along a constraint line, so the
    # incumbent may sit well along that valley: walk it with repeated rounds
    # at each radius before shrinking.
    n_local = max(20_000, n // 5)
    for radius in (0.3, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 0.0005):
        radius *= max_speed
        for _ in range(4):
            local = best + sample_disk(rng, n_local, radius)
            local, feasible, _ = evaluate(local)
            if not feasible.any():
                break
            cand = local[feasible]
            dist = np.hypot(cand[:, 0] - pref[0], cand[:, 1] - pref[1])
            if float(dist.min()) >= best_dist:
                break
            best_dist = float(dist.min())
            best = cand[int(np.argmin(dist))]
    return (float(best[0]), float(best[1])), best_violation


def violation_of(lines, v) -> float:
    worst = 0.0
    for line in lines:
        px, py = line.point
        dx, dy = line.direction
        det = dx * (v[1] - py) - dy * (v[0] - px)
        worst = max(worst, -det)
    return worst


def naive_worldmodel_error(pred_sl, pred_sr, true_sl, true_sr) -> tuple[float, float]:
    """Scalar-loop MSE over flattened sequences."""
    sl_total = 0.0
    sl_count = 0
    sr_total = 0.0
    sr_count = 0
    for t in range(len(pred_sl)):
        for a, b in zip(np.ravel(pred_sl[t]), np.ravel(true_sl[t])):
            sl_total += (float(a) - float(b)) ** 2
            sl_count += 1
        for a, b in zip(np.ravel(pred_sr[t]), np.ravel(true_sr[t])):
            sr_total += (float(a) - float(b)) ** 2
            sr_count += 1
    return sl_total / sl_count, sr_total / sr_count


def radial_bin_linear_search(distance: float, edges: np.ndarray):
    """Scan the edge array for the half-open bin containing distance."""
    if distance >= edges[-1]:
        return None
    if distance < edges[0]:
        return 0
    for k in range(len(edges) - 1):
        if edges[k] <= distance < edges[k + 1]:
            return k
    return None
