"""Evaluation, restriction and checks for piecewise cubic Bézier trajectories."""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from ..models.core import (
    DynamicLimits,
    LimitViolation,
    TrajectoryError,
    TrajectorySpline,
)


logger = logging.getLogger(__name__)

# Tolerance shared by the limit check and its sampling oracle
LIMIT_TOLERANCE = 1e-9

_BINOMIAL = {
    0: np.array([1.0]),
    1: np.array([1.0, 1.0]),
    2: np.array([1.0, 2.0, 1.0]),
    3: np.array([1.0, 3.0, 3.0, 1.0]),
}


def derivative_control_points(ctrl: np.ndarray, durations: np.ndarray, order: int) -> np.ndarray:
    """Bézier control points of the order-th time derivative.

    Args:
        ctrl: Control points, shape (..., 4, 3)
        durations: Segment durations, shape (...)
        order: Derivative order 0..3

    Returns:
        Control points of shape (..., 4 - order, 3)
    """
    pts = np.asarray(ctrl, dtype=float)
    dt = np.asarray(durations, dtype=float)[..., None, None]
    degree = 3
    for _ in range(order):
        pts = degree * np.diff(pts, axis=-2) / dt
        degree -= 1
    return pts


def _bernstein(u: np.ndarray, degree: int) -> np.ndarray:
    """Bernstein basis values, shape (len(u), degree + 1)"""
    u = np.asarray(u, dtype=float)[:, None]
    k = np.arange(degree + 1)
    return _BINOMIAL[degree] * u ** k * (1.0 - u) ** (degree - k)


def _starts_at_rest(traj: TrajectorySpline) -> bool:
    first = traj.segments[0]
    return bool(np.allclose(first[0], first[1], atol=1e-12) and np.allclose(first[1], first[2], atol=1e-12))


def sample(traj: TrajectorySpline, times: Sequence[float], order: int = 0) -> np.ndarray:
    """Evaluate a trajectory at many times, shape (len(times), 3).

    Times outside the knot range are clamped: position holds the boundary
    value, derivatives follow the hover rules of ``evaluate``.
    """
    if order not in (0, 1, 2, 3):
        raise TrajectoryError(f"derivative order must be 0..3, got {order}")
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    knots = traj.knots
    out = np.empty((len(ts), 3))

    idx = np.clip(np.searchsorted(knots, ts, side="right") - 1, 0, traj.n_segments - 1)
    dts = traj.durations[idx]
    u = np.clip((ts - knots[idx]) / dts, 0.0, 1.0)
    dctrl = derivative_control_points(traj.segments[idx], dts, order)
    basis = _bernstein(u, 3 - order)
    out[:] = np.einsum("mk,mkd->md", basis, dctrl)

    before = ts < knots[0]
    after = ts > knots[-1]
    if order == 0:
        out[before] = traj.segments[0, 0]
        out[after] = traj.segments[-1, 3]
    else:
        if np.any(before) and _starts_at_rest(traj):
            out[before] = 0.0
        if np.any(after) and traj.terminal_hover:
            out[after] = 0.0
    return out


def evaluate(traj: TrajectorySpline, t: float, order: int = 0) -> np.ndarray:
    """State of a trajectory at time t (position, velocity, acceleration or jerk)"""
    return sample(traj, [t], order)[0]


def state_at(traj: TrajectorySpline, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return evaluate(traj, t, 0), evaluate(traj, t, 1), evaluate(traj, t, 2)


def continuity_gap(prev: TrajectorySpline, nxt: TrajectorySpline, t_switch: float) -> Tuple[float, float, float]:
    """Norms of the position, velocity and acceleration jumps at t_switch"""
    return tuple(  # type: ignore[return-value]
        float(np.linalg.norm(evaluate(prev, t_switch, k) - evaluate(nxt, t_switch, k)))
        for k in range(3)
    )


def interior_gaps(traj: TrajectorySpline) -> np.ndarray:
    """Largest position/velocity/acceleration jump over all interior knots"""
    if traj.n_segments < 2:
        return np.zeros(3)
    dts = traj.durations
    gaps = []
    for order in range(3):
        d = derivative_control_points(traj.segments, dts, order)
        jump = d[1:, 0] - d[:-1, -1]
        gaps.append(float(np.max(np.linalg.norm(jump, axis=1))))
    return np.array(gaps)


def is_c2(traj: TrajectorySpline, tol: float = 1e-9) -> bool:
    return bool(np.all(interior_gaps(traj) <= tol))


def check_dynamic_limits(traj: TrajectorySpline, lim: DynamicLimits) -> List[LimitViolation]:
    """Derivative-hull bound check; an empty result proves compliance for all t"""
    violations = []
    dts = traj.durations
    for order in (1, 2, 3):
        bound = np.max(np.abs(derivative_control_points(traj.segments, dts, order)), axis=1)
        limit = lim.for_order(order)
        for seg, axis in zip(*np.nonzero(bound > limit + LIMIT_TOLERANCE)):
            violations.append(LimitViolation(
                segment=int(seg),
                order=order,
                axis=int(axis),
                bound=float(bound[seg, axis]),
                limit=limit,
            ))
    return violations


def restrict_segments(ctrl: np.ndarray, u0: np.ndarray, u1: np.ndarray) -> np.ndarray:
    """Control points of cubic segments restricted to [u0, u1] in local parameter.

    Uses the blossom of each segment, so all arrays broadcast over the
    leading dimension.
    """
    ctrl = np.asarray(ctrl, dtype=float)
    u0 = np.asarray(u0, dtype=float)[..., None]
    u1 = np.asarray(u1, dtype=float)[..., None]

    def blossom(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
        p = ctrl
        # de Casteljau with a different parameter per level
        q = [(1 - a) * p[..., i, :] + a * p[..., i + 1, :] for i in range(3)]
        r = [(1 - b) * q[i] + b * q[i + 1] for i in range(2)]
        return (1 - c) * r[0] + c * r[1]

    return np.stack([
        blossom(u0, u0, u0),
        blossom(u0, u0, u1),
        blossom(u0, u1, u1),
        blossom(u1, u1, u1),
    ], axis=-2)


def window_control_points(traj: TrajectorySpline, edges: np.ndarray) -> np.ndarray:
    """Control points of the trajectory over each interval between sorted edges.

    Intervals must not straddle a knot. Intervals outside the knot range get
    a constant curve at the clamped boundary position.

    Returns:
        Array of shape (len(edges) - 1, 4, 3)
    """
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    knots = traj.knots
    idx = np.clip(np.searchsorted(knots, mid, side="right") - 1, 0, traj.n_segments - 1)
    dts = traj.durations[idx]
    u0 = np.clip((lo - knots[idx]) / dts, 0.0, 1.0)
    u1 = np.clip((hi - knots[idx]) / dts, 0.0, 1.0)
    out = restrict_segments(traj.segments[idx], u0, u1)

    before = mid < knots[0]
    after = mid > knots[-1]
    out[before] = traj.segments[0, 0]
    out[after] = traj.segments[-1, 3]
    return out


def refine_edges(t0: float, t1: float, *trajs: TrajectorySpline) -> np.ndarray:
    """Common knot refinement of several trajectories over [t0, t1]"""
    inner = [t0, t1]
    for traj in trajs:
        knots = traj.knots
        inner.extend(knots[(knots > t0) & (knots < t1)].tolist())
    return np.unique(np.asarray(inner, dtype=float))


def restrict(traj: TrajectorySpline, t0: float, t1: float) -> TrajectorySpline:
    """The part of a trajectory inside [t0, t1] as a stand-alone trajectory"""
    if not t1 - t0 > 1e-12:
        raise TrajectoryError(f"degenerate restriction window [{t0}, {t1}]")
    edges = refine_edges(t0, t1, traj)
    keep = np.diff(edges) > 1e-12
    edges = np.concatenate((edges[:-1][keep], edges[-1:]))
    ctrl = window_control_points(traj, edges)
    hover = traj.terminal_hover and t1 >= traj.t_end
    return TrajectorySpline(traj.owner, traj.seq, ctrl, edges, terminal_hover=hover)


def splice(prefix: TrajectorySpline, tail: TrajectorySpline, t_from: float, owner: str, seq: int) -> TrajectorySpline:
    """Prefix on [t_from, tail start] followed by the tail.

    The tail must start where the prefix is at tail.t_start; the result
    keeps the tail's terminal hover flag.
    """
    t_switch = tail.t_start
    if t_switch - t_from <= 1e-12:
        return tail.relabel(owner, seq)
    head = restrict(prefix, t_from, t_switch)
    segments = np.concatenate([head.segments, tail.segments])
    knots = np.concatenate([head.knots, tail.knots[1:]])
    return TrajectorySpline(owner, seq, segments, knots, terminal_hover=tail.terminal_hover)


def hover_spline(position: Sequence[float], t_start: float, owner: str, seq: int, duration: float = 1.0) -> TrajectorySpline:
    """Constant-position trajectory"""
    point = np.asarray(position, dtype=float).reshape(3)
    segments = np.broadcast_to(point, (1, 4, 3))
    return TrajectorySpline(owner, seq, segments, [t_start, t_start + duration], terminal_hover=True)


def segment_bounds(traj: TrajectorySpline) -> Tuple[np.ndarray, np.ndarray]:
    """Per-segment axis-aligned bounding boxes of the control points"""
    return traj.segments.min(axis=1), traj.segments.max(axis=1)
