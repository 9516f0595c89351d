"""Conservative continuous-time box collision checks between trajectories."""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from ..models.core import (
    AgentBox,
    CollisionInputError,
    ConflictReport,
    StoreSnapshot,
    TrajectorySpline,
)
from ..trajectory.spline import refine_edges, sample, window_control_points


logger = logging.getLogger(__name__)

# Time bisection floor (s); unresolved windows of this length are conflicts
RESOLUTION = 1e-3


def _candidate_normals() -> np.ndarray:
    axes = np.eye(3)
    faces = np.array([
        [1, 1, 0], [1, -1, 0], [1, 0, 1], [1, 0, -1], [0, 1, 1], [0, 1, -1],
    ], dtype=float)
    bodies = np.array([
        [1, 1, 1], [1, 1, -1], [1, -1, 1], [-1, 1, 1],
    ], dtype=float)
    normals = np.vstack([axes, faces, bodies])
    return normals / np.linalg.norm(normals, axis=1, keepdims=True)


NORMALS = _candidate_normals()


def box_margin(delta: np.ndarray, half_extents: np.ndarray) -> np.ndarray:
    """Signed box-metric margin of center offsets; negative means overlap"""
    return np.max(np.abs(delta) - half_extents, axis=-1)


def _separated_batch(ctrl_a: np.ndarray, ctrl_b: np.ndarray, half_extents: np.ndarray) -> np.ndarray:
    """Separation proof per interval, shape (m,) of bool"""
    lo_a, hi_a = ctrl_a.min(axis=1), ctrl_a.max(axis=1)
    lo_b, hi_b = ctrl_b.min(axis=1), ctrl_b.max(axis=1)
    aabb = np.any((lo_b - hi_a >= half_extents) | (lo_a - hi_b >= half_extents), axis=1)

    # Both curves share the time parameterization, so the offset curve is
    # itself a Bézier curve whose hull must avoid the combined box.
    diff = ctrl_b - ctrl_a
    proj = diff @ NORMALS.T
    support = np.abs(NORMALS) @ half_extents
    plane = np.any(
        (proj.min(axis=1) >= support) | (proj.max(axis=1) <= -support), axis=1
    )
    return aabb | plane


def segment_separated(ctrl_a: np.ndarray, ctrl_b: np.ndarray, half_extents: Sequence[float]) -> bool:
    """True only if two cubic segments on a common window never overlap.

    Args:
        ctrl_a: Control points of A, shape (4, 3)
        ctrl_b: Control points of B over the same time window, shape (4, 3)
        half_extents: Combined half extents of both boxes
    """
    e = np.asarray(half_extents, dtype=float)
    return bool(_separated_batch(np.asarray(ctrl_a)[None], np.asarray(ctrl_b)[None], e)[0])


def _hull_lower_bound(ctrl_a: np.ndarray, ctrl_b: np.ndarray, half_extents: np.ndarray) -> float:
    diff = ctrl_b - ctrl_a
    lo, hi = diff.min(axis=0), diff.max(axis=0)
    closest = np.where(lo > 0, lo, np.where(hi < 0, -hi, 0.0))
    return float(np.max(closest - half_extents))


def check_pair(
    traj_a: TrajectorySpline,
    traj_b: TrajectorySpline,
    box_a: AgentBox,
    box_b: AgentBox,
    window: Tuple[float, float],
    resolution: float = RESOLUTION,
) -> ConflictReport:
    """Continuous box-overlap check of two trajectories over a time window"""
    t0, t1 = float(window[0]), float(window[1])
    if not t1 > t0:
        raise CollisionInputError(f"degenerate check window [{t0}, {t1}]")

    pair = (traj_a.owner, traj_b.owner)
    e = box_a.combined(box_b)
    edges = refine_edges(t0, t1, traj_a, traj_b)
    ctrl_a = window_control_points(traj_a, edges)
    ctrl_b = window_control_points(traj_b, edges)

    all_a, all_b = ctrl_a.reshape(-1, 3), ctrl_b.reshape(-1, 3)
    if np.any((all_b.min(axis=0) - all_a.max(axis=0) >= e) | (all_a.min(axis=0) - all_b.max(axis=0) >= e)):
        return ConflictReport.clean(pair, _sampled_margin(traj_a, traj_b, e, edges))

    separated = _separated_batch(ctrl_a, ctrl_b, e)
    if np.all(separated):
        return ConflictReport.clean(pair, _sampled_margin(traj_a, traj_b, e, edges))

    # Depth-first, earliest window first, so the first unresolved window
    # found is the earliest one.
    stack: List[Tuple[float, float, np.ndarray, np.ndarray]] = []
    for i in reversed(np.nonzero(~separated)[0]):
        stack.append((edges[i], edges[i + 1], ctrl_a[i], ctrl_b[i]))

    while stack:
        lo, hi, seg_a, seg_b = stack.pop()
        if hi - lo <= resolution:
            margin = min(
                _hull_lower_bound(seg_a, seg_b, e),
                float(np.min(_sampled_margin_array(traj_a, traj_b, e, np.linspace(lo, hi, 5)))),
            )
            logger.debug(f"Conflict {pair[0]}/{pair[1]} at t={lo:.4f}, margin {margin:.4f}")
            return ConflictReport(
                in_conflict=True,
                min_margin=margin,
                pair=pair,
                first_overlap_time=float(lo),
            )
        halves = np.array([lo, 0.5 * (lo + hi), hi])
        sub_a = window_control_points(traj_a, halves)
        sub_b = window_control_points(traj_b, halves)
        sep = _separated_batch(sub_a, sub_b, e)
        for j in (1, 0):
            if not sep[j]:
                stack.append((halves[j], halves[j + 1], sub_a[j], sub_b[j]))

    return ConflictReport.clean(pair, _sampled_margin(traj_a, traj_b, e, edges))


def _sampled_margin_array(traj_a: TrajectorySpline, traj_b: TrajectorySpline, e: np.ndarray, times: np.ndarray) -> np.ndarray:
    return box_margin(sample(traj_b, times) - sample(traj_a, times), e)


def _sampled_margin(traj_a: TrajectorySpline, traj_b: TrajectorySpline, e: np.ndarray, edges: np.ndarray) -> float:
    """Box margin at interval edges and midpoints of a proven-clean window"""
    times = np.concatenate([edges, 0.5 * (edges[:-1] + edges[1:])])
    return max(0.0, float(np.min(_sampled_margin_array(traj_a, traj_b, e, times))))


def check_against_store(
    candidate: TrajectorySpline,
    snapshot: StoreSnapshot,
    box: AgentBox,
    t_now: float,
    min_window: float = RESOLUTION,
) -> ConflictReport:
    """Check a candidate against every comm, opt and obstacle entry.

    Each window runs from t_now to the end of the longer trajectory.

    Returns:
        The first conflict found, or a clean report with the smallest margin
    """
    best = float("inf")
    for entry in snapshot.entries:
        t_end = max(candidate.t_end, entry.traj.t_end, t_now + min_window)
        report = check_pair(candidate, entry.traj, box, entry.box, (t_now, t_end))
        if report.in_conflict:
            return report
        best = min(best, report.min_margin)
    return ConflictReport.clean((candidate.owner, ""), best)
