"""Argument checks shared by the functional API and the estimators."""

from __future__ import annotations

import numbers

from .exceptions import DataError

BACKENDS = ("auto", "dense", "power")


def check_alpha(alpha, *, allow_one=False) -> float:
    if not isinstance(alpha, numbers.Real):
        raise TypeError(f"alpha must be a real number, got {type(alpha).__name__}")
    alpha = float(alpha)
    upper_ok = alpha <= 1.0 if allow_one else alpha < 1.0
    if not (alpha >= 0.0 and upper_ok):
        bound = "[0, 1]" if allow_one else "[0, 1)"
        raise ValueError(f"alpha must lie in {bound}, got {alpha}")
    return alpha


def check_positive_int(value, name: str, *, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_probability(value, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_backend(backend: str) -> str:
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")
    return backend


def check_graph_partition(graph, partition) -> None:
    """Raise :class:`DataError` unless ``partition`` covers ``graph`` with two nonempty sides."""
    if partition.n_vertices != graph.n_vertices:
        raise DataError(f"partition covers {partition.n_vertices} vertices, graph has {graph.n_vertices}")
    n_x = int(partition.in_x.sum())
    if n_x == 0 or n_x == graph.n_vertices:
        raise DataError("both sides of the partition must be nonempty")
    if not partition.x_star or not partition.y_star:
        raise DataError("high-degree sets must be nonempty")


def check_vertex(graph, v, name="vertex") -> int:
    if isinstance(v, bool) or not isinstance(v, numbers.Integral):
        raise TypeError(f"{name} must be an integer id")
    if not 0 <= v < graph.n_vertices:
        raise DataError(f"{name} {v} outside 0..{graph.n_vertices - 1}")
    return int(v)
