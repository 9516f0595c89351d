"""Abstract planner interface."""

import logging
from abc import ABC, abstractmethod
from typing import Optional, Sequence, Union

import numpy as np

from ..collision.checker import check_against_store
from ..models.core import PlanRequest, PlannerConfig, TrajectorySpline
from ..trajectory.spline import check_dynamic_limits, hover_spline, splice


logger = logging.getLogger(__name__)

Seed = Union[int, Sequence[int]]


def hover_plan(position: Sequence[float], t_switch: float, owner: str = "", seq: int = 0) -> TrajectorySpline:
    """Hold position from t_switch on"""
    return hover_spline(position, t_switch, owner, seq)


class TrajectoryPlanner(ABC):
    """Base class for candidate generators used in the Optimization phase"""

    def __init__(self, config: Optional[PlannerConfig] = None):
        self.config = config or PlannerConfig()

    @abstractmethod
    def plan(self, request: PlanRequest, seed: Seed) -> Optional[TrajectorySpline]:
        """Return a candidate or None when no candidate is feasible"""
        pass

    def hover_plan(self, position: Sequence[float], t_switch: float, owner: str = "", seq: int = 0) -> TrajectorySpline:
        return hover_plan(position, t_switch, owner, seq)

    def accept(self, request: PlanRequest, tail: TrajectorySpline) -> Optional[TrajectorySpline]:
        """Join the tail to the committed prefix and keep it only if it is feasible and clean"""
        candidate = splice(request.prefix, tail, request.t_from, request.owner, request.traj_seq)
        if check_dynamic_limits(candidate, request.limits):
            return None
        report = check_against_store(candidate, request.snapshot, request.box, request.t_from)
        if report.in_conflict:
            logger.debug(
                f"{request.owner}: candidate conflicts with {report.pair[1]} at t={report.first_overlap_time}"
            )
            return None
        return candidate

    @staticmethod
    def start_position(request: PlanRequest) -> np.ndarray:
        return np.asarray(request.start_state[0], dtype=float)
