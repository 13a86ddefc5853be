"""Built-in evaluation maps: sparse, dense, and a corridor-style layout.

"simple" and "complex" are procedurally scattered convex clutter with frozen
seeds; "realistic" is a hand-laid arrangement of corridor walls, doorways and
room clutter standing in for a floor plan built from real sensor logs.
"""

from __future__ import annotations

import numpy as np

from .geometry import DEFAULT_BOUNDS, MapModel, generate_map

_SIMPLE_SEED = 114
_COMPLEX_SEED = 2203

MAP_NAMES = ("simple", "complex", "realistic")


def _rect(x0: float, y0: float, x1: float, y1: float) -> np.ndarray:
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])


def _realistic_map() -> MapModel:
    polygons = [
        # Central corridor walls with offset doorways.
        _rect(-9.5, 1.2, -1.5, 1.6),
        _rect(0.5, 1.2, 9.5, 1.6),
        _rect(-9.5, -1.6, 3.0, -1.2),
        _rect(4.6, -1.6, 9.5, -1.2),
        # Room dividers.
        _rect(-3.2, 1.6, -2.8, 6.5),
        _rect(3.0, 4.0, 3.4, 9.5),
        _rect(-0.2, -9.5, 0.2, -4.0),
        # Furniture-scale clutter.
        _rect(-7.1, 5.1, -5.9, 5.9),
        _rect(6.0, 6.3, 7.0, 7.3),
        np.array([[5.4, -6.8], [6.6, -6.4], [5.8, -5.6]]),
        np.array([[-6.6, -7.0], [-5.4, -6.6], [-6.2, -5.4]]),
        _rect(-8.2, -4.2, -7.2, -3.4),
    ]
    return MapModel(name="realistic", bounds=DEFAULT_BOUNDS, polygons=polygons)


def builtin_map(name: str) -> MapModel:
    """Return one of the built-in maps by name; raises KeyError otherwise."""
    if name == "simple":
        return generate_map(_SIMPLE_SEED, 4, DEFAULT_BOUNDS, name="simple")
    if name == "complex":
        return generate_map(_COMPLEX_SEED, 14, DEFAULT_BOUNDS, name="complex")
    if name == "realistic":
        return _realistic_map()
    raise KeyError(f"unknown built-in map {name!r}; choose from {MAP_NAMES}")
