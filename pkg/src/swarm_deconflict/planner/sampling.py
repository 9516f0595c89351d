"""Sampling planner: a lattice of detour candidates filtered by the store snapshot."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..models.core import PlanRequest, TrajectorySpline
from .base import Seed, TrajectoryPlanner
from .construction import build_tail


logger = logging.getLogger(__name__)

# Fraction of the speed limit used to size reachable targets
CRUISE_FRACTION = 0.5
# Costs equal to this many digits keep layout order, so straight wins ties
COST_DIGITS = 9


@dataclass
class Layout:
    """One candidate: hover target and optional via point"""
    target: np.ndarray
    via: Tuple[np.ndarray, ...] = ()
    label: str = ""


def _frame(direction: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Horizontal and vertical unit vectors perpendicular to the direction"""
    up = np.array([0.0, 0.0, 1.0])
    lateral = np.cross(up, direction)
    if np.linalg.norm(lateral) < 1e-9:
        lateral = np.array([0.0, 1.0, 0.0])
    lateral = lateral / np.linalg.norm(lateral)
    vertical = np.cross(direction, lateral)
    norm = np.linalg.norm(vertical)
    vertical = up if norm < 1e-9 else vertical / norm
    return lateral, vertical


class SamplingPlanner(TrajectoryPlanner):
    """Generates K candidate layouts, repairs them by time dilation and
    returns the cheapest one that is clean against the snapshot.

    Cost is the estimated arrival time plus a weighted detour length. The
    remaining distance after a candidate is priced at the average speed of
    the dilated straight tail, so every candidate is timed with the same
    speed profile. The stop layout is only taken when no candidate that
    makes progress is clean.
    """

    def layouts(self, request: PlanRequest, rng: np.random.Generator) -> List[Layout]:
        cfg = self.config
        p, v, _ = (np.asarray(x, dtype=float) for x in request.start_state)
        goal = np.asarray(request.goal, dtype=float)
        reach = CRUISE_FRACTION * request.limits.v_max * request.horizon

        step = goal - p
        dist = float(np.linalg.norm(step))
        if dist > reach:
            step = step * (reach / dist)
        if dist < 1e-9:
            return [Layout(goal.copy(), (), "goal")]

        direction = step / np.linalg.norm(step)
        lateral, vertical = _frame(direction)
        span = max(min(float(np.linalg.norm(step)), 4.0), 1.0)

        layouts = [Layout(p + step, (), "straight")]
        for f in cfg.progress_fractions:
            if f < 1.0:
                layouts.append(Layout(p + f * step, (), f"progress-{f:g}"))

        detours = []
        for plane, axis, scale in (("lateral", lateral, 1.0), ("vertical", vertical, 0.5)):
            for f in cfg.progress_fractions[:2]:
                for frac in cfg.lateral_fractions:
                    for sign in (1.0, -1.0):
                        jitter = 1.0 + rng.uniform(-0.2, 0.2)
                        via = p + 0.5 * f * step + sign * frac * scale * span * jitter * axis
                        detours.append((plane, Layout(p + f * step, (via,), f"{plane}-{f:g}-{sign * frac:g}")))

        layouts.extend(layout for plane, layout in detours if plane == "lateral")
        for frac in cfg.lateral_fractions:
            for sign in (1.0, -1.0):
                side = p + 0.3 * step + sign * frac * span * lateral
                layouts.append(Layout(side, (), f"sidestep-{sign * frac:g}"))
        layouts.extend(layout for plane, layout in detours if plane == "vertical")

        speed = float(np.linalg.norm(v))
        brake = p + v * speed / request.limits.a_max if speed > 0 else p.copy()
        stop = Layout(brake, (), "stop")
        return layouts[: max(cfg.candidates - 1, 0)] + [stop]

    def _cost(self, request: PlanRequest, layout: Layout, tail: TrajectorySpline, speed: float) -> float:
        p = np.asarray(request.start_state[0], dtype=float)
        nodes = np.vstack([p, *layout.via, layout.target])
        path = float(np.linalg.norm(np.diff(nodes, axis=0), axis=1).sum())
        detour = path - float(np.linalg.norm(layout.target - p))
        remaining = float(np.linalg.norm(np.asarray(request.goal) - layout.target))
        duration = tail.t_end - tail.t_start
        return duration + remaining / speed + self.config.detour_weight * detour

    def _reference_speed(self, request: PlanRequest, built: List[Tuple[Layout, TrajectorySpline]]) -> float:
        """Average speed of the straight tail, or the cruise speed without one"""
        p = np.asarray(request.start_state[0], dtype=float)
        for layout, tail in built:
            if layout.label != "straight":
                continue
            distance = float(np.linalg.norm(layout.target - p))
            if distance > 1e-6:
                return distance / (tail.t_end - tail.t_start)
        return CRUISE_FRACTION * request.limits.v_max

    def plan(self, request: PlanRequest, seed: Seed) -> Optional[TrajectorySpline]:
        rng = np.random.default_rng(seed)
        built: List[Tuple[Layout, TrajectorySpline]] = []
        for layout in self.layouts(request, rng):
            tail = build_tail(
                request.owner, request.traj_seq, request.start_state, request.t_switch,
                list(layout.via), layout.target, request.limits, self.config.max_dilations,
            )
            if tail is not None:
                built.append((layout, tail))

        speed = self._reference_speed(request, built)
        scored = [
            (layout.label == "stop", round(self._cost(request, layout, tail, speed), COST_DIGITS), index, layout, tail)
            for index, (layout, tail) in enumerate(built)
        ]
        scored.sort(key=lambda item: item[:3])
        for _, cost, _, layout, tail in scored:
            candidate = self.accept(request, tail)
            if candidate is not None:
                logger.debug(f"{request.owner}: chose {layout.label} (cost {cost:.3f})")
                return candidate

        logger.debug(f"{request.owner}: no clean candidate among {len(scored)}")
        return None
