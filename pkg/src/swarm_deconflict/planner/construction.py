"""Uniform cubic B-spline candidates converted to Bézier segments."""

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from ..models.core import DynamicLimits, TrajectorySpline
from ..trajectory.spline import check_dynamic_limits


# Knot dilation factor per feasibility repair step
DILATION = 1.25

State = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _polyline_points(start: np.ndarray, via: Sequence[np.ndarray], end: np.ndarray, count: int) -> np.ndarray:
    """count points strictly inside the polyline start -> via -> end, equally spaced by arc length"""
    nodes = np.vstack([start, *via, end])
    lengths = np.linalg.norm(np.diff(nodes, axis=0), axis=1)
    total = float(lengths.sum())
    if count <= 0:
        return np.empty((0, 3))
    if total < 1e-12:
        return np.repeat(start[None], count, axis=0)
    cum = np.concatenate(([0.0], np.cumsum(lengths)))
    targets = total * np.arange(1, count + 1) / (count + 1)
    out = np.empty((count, 3))
    for k, s in enumerate(targets):
        i = min(int(np.searchsorted(cum, s, side="right")) - 1, len(lengths) - 1)
        frac = 0.0 if lengths[i] < 1e-12 else (s - cum[i]) / lengths[i]
        out[k] = nodes[i] + frac * (nodes[i + 1] - nodes[i])
    return out


def bspline_control_points(state: State, via: Sequence[np.ndarray], target: np.ndarray, n_segments: int, h: float) -> np.ndarray:
    """B-spline control points: first three from the start state, last three at the target"""
    p, v, a = (np.asarray(x, dtype=float) for x in state)
    c1 = p - a * h * h / 6.0
    c0 = p + a * h * h / 3.0 - h * v
    c2 = p + a * h * h / 3.0 + h * v
    interior = _polyline_points(c2, via, target, n_segments - 3)
    tail = np.repeat(np.asarray(target, dtype=float)[None], 3, axis=0)
    return np.vstack([c0, c1, c2, interior, tail])


def to_bezier(ctrl: np.ndarray) -> np.ndarray:
    """Bézier control points of every span of a uniform cubic B-spline"""
    c0, c1, c2, c3 = ctrl[:-3], ctrl[1:-2], ctrl[2:-1], ctrl[3:]
    return np.stack([
        (c0 + 4.0 * c1 + c2) / 6.0,
        (4.0 * c1 + 2.0 * c2) / 6.0,
        (2.0 * c1 + 4.0 * c2) / 6.0,
        (c1 + 4.0 * c2 + c3) / 6.0,
    ], axis=1)


def segment_count(distance: float) -> int:
    return int(min(max(3, math.ceil(distance) + 3), 12))


def build_tail(
    owner: str,
    seq: int,
    state: State,
    t_switch: float,
    via: Sequence[np.ndarray],
    target: np.ndarray,
    limits: DynamicLimits,
    max_dilations: int = 25,
    duration: Optional[float] = None,
) -> Optional[TrajectorySpline]:
    """Rest-at-target trajectory from the start state, dilated until limits pass.

    Returns:
        The first feasible dilation, or None when none passes within the budget
    """
    p = np.asarray(state[0], dtype=float)
    target = np.asarray(target, dtype=float)
    via = [np.asarray(w, dtype=float) for w in via]
    path = float(np.linalg.norm(np.diff(np.vstack([p, *via, target]), axis=0), axis=1).sum())
    n = segment_count(path)
    if duration is None:
        duration = max(path / (0.5 * limits.v_max), 0.5)
    h = duration / n

    for _ in range(max_dilations + 1):
        segments = to_bezier(bspline_control_points(state, via, target, n, h))
        segments[0, 0] = p
        segments[-1, 1:] = target
        knots = t_switch + h * np.arange(n + 1)
        knots[0] = t_switch
        tail = TrajectorySpline(owner, seq, segments, knots, terminal_hover=True)
        if not check_dynamic_limits(tail, limits):
            return tail
        h *= DILATION
    return None
