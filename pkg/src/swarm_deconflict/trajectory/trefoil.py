"""Trefoil-knot obstacle paths and their spline fits."""

import logging
import math
from typing import Sequence

import numpy as np

from ..models.core import ObstacleConfig, TrajectoryError, TrajectorySpline, TrefoilParams
from .spline import sample


logger = logging.getLogger(__name__)


def _shape(theta: float, order: int) -> np.ndarray:
    """Unit trefoil and its derivatives with respect to the angle"""
    s1, c1 = math.sin(theta), math.cos(theta)
    s2, c2 = math.sin(2 * theta), math.cos(2 * theta)
    s3, c3 = math.sin(3 * theta), math.cos(3 * theta)
    if order == 0:
        return np.array([s1 + 2 * s2, c1 - 2 * c2, -s3])
    if order == 1:
        return np.array([c1 + 4 * c2, -s1 + 4 * s2, -3 * c3])
    return np.array([-s1 - 8 * s2, -c1 + 8 * c2, 9 * s3])


def trefoil_position(p: TrefoilParams, t: float, order: int = 0) -> np.ndarray:
    """Position (order 0), velocity (1) or acceleration (2) on the trefoil"""
    if order not in (0, 1, 2):
        raise TrajectoryError(f"trefoil derivative order must be 0..2, got {order}")
    theta = p.angular_rate * t + p.phase
    value = np.asarray(p.scale) * _shape(theta, order) * p.angular_rate ** order
    if order == 0:
        value = value + np.asarray(p.center)
    return value


def obstacle_as_spline(
    p: TrefoilParams,
    t0: float,
    t1: float,
    n_segments: int,
    owner: str = "obstacle",
) -> TrajectorySpline:
    """Cubic Hermite fit of a trefoil over [t0, t1].

    Positions and analytic velocities are matched at every segment
    boundary, so the fit passes through the path exactly at the knots but
    is only C1: acceleration jumps at interior knots. Planned trajectories
    are C2; obstacle fits are exempt because they are only used as
    collision constraints, which read positions.
    """
    if not t1 > t0:
        raise TrajectoryError(f"degenerate obstacle horizon [{t0}, {t1}]")
    if n_segments < 1:
        raise TrajectoryError("obstacle fit needs at least one segment")

    knots = np.linspace(t0, t1, n_segments + 1)
    pos = np.array([trefoil_position(p, t, 0) for t in knots])
    vel = np.array([trefoil_position(p, t, 1) for t in knots])
    dt = np.diff(knots)[:, None]

    segments = np.empty((n_segments, 4, 3))
    segments[:, 0] = pos[:-1]
    segments[:, 1] = pos[:-1] + vel[:-1] * dt / 3.0
    segments[:, 2] = pos[1:] - vel[1:] * dt / 3.0
    segments[:, 3] = pos[1:]
    return TrajectorySpline(owner, 0, segments, knots, terminal_hover=False)


def segments_for_horizon(p: TrefoilParams, t0: float, t1: float, per_period: int) -> int:
    return max(1, int(math.ceil((t1 - t0) / p.period * per_period)))


def random_trefoil(rng: np.random.Generator, config: ObstacleConfig) -> TrefoilParams:
    """Draw trefoil parameters from the configured ranges"""
    center = [rng.uniform(lo, hi) for lo, hi in config.center_range]
    scale = rng.uniform(config.scale_range[0], config.scale_range[1], size=3)
    rate = rng.uniform(config.rate_range[0], config.rate_range[1])
    if rng.random() < 0.5:
        rate = -rate
    phase = rng.uniform(0.0, 2.0 * math.pi)
    logger.debug(f"Trefoil at {np.round(center, 2).tolist()} rate {rate:.3f} rad/s")
    return TrefoilParams(center=tuple(center), scale=tuple(scale), angular_rate=float(rate), phase=float(phase))


def fit_error(p: TrefoilParams, traj: TrajectorySpline, times: Sequence[float]) -> float:
    """Largest distance between the fit and the analytic path at the given times"""
    ts = np.asarray(times, dtype=float)
    exact = np.array([trefoil_position(p, t) for t in ts])
    return float(np.max(np.linalg.norm(sample(traj, ts) - exact, axis=1)))
