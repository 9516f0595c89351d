"""Planner with a fixed target per iteration, used by the scripted case runs."""

import logging
from typing import List, Optional, Sequence

import numpy as np

from ..models.core import PlanRequest, PlannerConfig, TrajectorySpline
from .base import Seed, TrajectoryPlanner
from .construction import build_tail


logger = logging.getLogger(__name__)


class ScriptedPlanner(TrajectoryPlanner):
    """Plans straight to targets[iteration - 1].

    A None entry, or an iteration past the end of the script, holds the
    current position. The result is still filtered against the snapshot,
    so a conflict visible during Optimization yields no candidate.
    """

    def __init__(self, targets: Sequence[Optional[Sequence[float]]], config: Optional[PlannerConfig] = None, duration: Optional[float] = None):
        super().__init__(config)
        self.targets: List[Optional[np.ndarray]] = [
            None if t is None else np.asarray(t, dtype=float) for t in targets
        ]
        self.duration = duration

    def plan(self, request: PlanRequest, seed: Seed) -> Optional[TrajectorySpline]:
        index = request.iteration - 1
        target = self.targets[index] if 0 <= index < len(self.targets) else None
        if target is None:
            target = self.start_position(request)
        tail = build_tail(
            request.owner, request.traj_seq, request.start_state, request.t_switch,
            [], target, request.limits, self.config.max_dilations, self.duration,
        )
        if tail is None:
            logger.debug(f"{request.owner}: no feasible tail to scripted target {target.tolist()}")
            return None
        return self.accept(request, tail)
