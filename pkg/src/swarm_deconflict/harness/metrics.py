"""Run metrics computed from the executed (committed) trajectory timelines."""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..models.core import AgentBox, AgentMetrics, MetricsReport, TrajectorySpline
from ..simnet.engine import RunResult
from ..trajectory.spline import sample


logger = logging.getLogger(__name__)

SAMPLE_DT = 0.01
STOP_SPEED = 0.05
STOP_MIN_DURATION = 0.5
DEADLOCK_SPEED = 0.01
DEADLOCK_WINDOW = 10.0
# Touching boxes are not an overlap
OVERLAP_TOLERANCE = 1e-9

Timeline = Sequence[Tuple[float, TrajectorySpline]]


def sample_times(t_final: float, dt: float = SAMPLE_DT) -> np.ndarray:
    """Uniform grid on [0, t_final] that always includes t_final"""
    n = int(np.floor(round(t_final / dt, 9)))
    times = dt * np.arange(n + 1)
    if times[-1] < t_final:
        times = np.append(times, t_final)
    return times


def sample_timeline(timeline: Timeline, times: np.ndarray, order: int = 0) -> np.ndarray:
    """Executed state at each time: the trajectory committed most recently at or before it"""
    starts = np.array([t for t, _ in timeline])
    idx = np.clip(np.searchsorted(starts, times, side="right") - 1, 0, None)
    out = np.empty((len(times), 3))
    for k, (_, traj) in enumerate(timeline):
        mask = idx == k
        if np.any(mask):
            out[mask] = sample(traj, times[mask], order)
    return out


def _low_speed_runs(times: np.ndarray, speed: np.ndarray, threshold: float) -> List[Tuple[float, float]]:
    """Maximal [start, end] intervals where speed stays below threshold"""
    runs = []
    low = speed < threshold
    start: Optional[int] = None
    for i, flag in enumerate(low):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((times[start], times[i - 1]))
            start = None
    if start is not None:
        runs.append((times[start], times[-1]))
    return runs


def count_stops(times: np.ndarray, speed: np.ndarray, t_begin: float, t_arrive: float) -> Tuple[int, float]:
    """Stops between first motion and arrival: speed below STOP_SPEED for at least STOP_MIN_DURATION"""
    moving = np.nonzero((speed >= STOP_SPEED) & (times >= t_begin))[0]
    if len(moving) == 0:
        return 0, 0.0
    window = (times >= times[moving[0]]) & (times <= t_arrive)
    stops, stop_time = 0, 0.0
    for lo, hi in _low_speed_runs(times[window], speed[window], STOP_SPEED):
        if hi - lo >= STOP_MIN_DURATION - 1e-9 and hi < t_arrive:
            stops += 1
            stop_time += hi - lo
    return stops, stop_time


def find_collisions(
    positions: Dict[str, np.ndarray],
    boxes: Dict[str, AgentBox],
    times: np.ndarray,
    agent_ids: Sequence[str],
) -> List[Dict[str, object]]:
    """First sampled box overlap of every colliding pair involving at least one agent"""
    ids = list(positions)
    agents = set(agent_ids)
    collisions = []
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            if a not in agents and b not in agents:
                continue
            e = boxes[a].combined(boxes[b])
            margin = np.max(np.abs(positions[a] - positions[b]) - e, axis=1)
            hits = np.nonzero(margin < -OVERLAP_TOLERANCE)[0]
            if len(hits):
                k = int(hits[0])
                collisions.append({"pair": [a, b], "t": float(times[k]), "margin": float(margin[k])})
    return collisions


def compute_metrics(run: RunResult, start_times: Optional[Dict[str, float]] = None) -> MetricsReport:
    """Collision, deadlock, travel, smoothness and protocol metrics of a finished run"""
    start_times = start_times or {}
    times = sample_times(run.t_final)
    dt = np.diff(times)

    positions: Dict[str, np.ndarray] = {}
    boxes: Dict[str, AgentBox] = dict(run.boxes)
    arrivals: Dict[str, float] = {}
    for record in run.trace.of_kind("done"):
        arrivals[record["agent"]] = float(record["detail"]["t_arrive"])

    per_agent: List[AgentMetrics] = []
    deadlock = False
    gaps = np.zeros(3)
    for agent in run.agents:
        timeline = run.timelines[agent.id]
        pos = sample_timeline(timeline, times, 0)
        vel = sample_timeline(timeline, times, 1)
        jerk = sample_timeline(timeline, times, 3)
        positions[agent.id] = pos
        speed = np.linalg.norm(vel, axis=1)

        done = agent.id in arrivals
        t_begin = start_times.get(agent.id, 0.0)
        t_arrive = min(arrivals[agent.id], run.t_final) if done else run.t_final
        upto = times <= t_arrive

        travel_times = times[upto]
        if travel_times[-1] < t_arrive:
            travel_times = np.append(travel_times, t_arrive)
        steps = np.linalg.norm(np.diff(sample_timeline(timeline, travel_times, 0), axis=0), axis=1)
        jerk_sq = np.sum(jerk[:-1] ** 2, axis=1)
        jerk_integral = float(np.sum(jerk_sq[upto[:-1]] * dt[upto[:-1]]))
        num_stops, stop_time = count_stops(times, speed, t_begin, t_arrive)

        if not done and run.t_final >= DEADLOCK_WINDOW:
            tail = times >= run.t_final - DEADLOCK_WINDOW
            if np.all(speed[tail] < DEADLOCK_SPEED):
                deadlock = True

        for record in run.trace.of_kind("commit"):
            if record["agent"] == agent.id:
                gaps = np.maximum(gaps, np.asarray(record["detail"]["gaps"], dtype=float))

        counters = agent.state.counters
        per_agent.append(AgentMetrics(
            agent=agent.id,
            done=done,
            travel_time=max(t_arrive - t_begin, 0.0),
            travel_distance=float(np.sum(steps)),
            straight_distance=float(np.linalg.norm(np.asarray(agent.state.goal, dtype=float) - pos[0])),
            num_stops=num_stops,
            stop_time=float(stop_time),
            jerk_integral=jerk_integral,
            rejections=counters.rejections,
            delay_check_aborts=counters.delay_check_aborts,
            commits=counters.commits,
            planner_failures=counters.planner_failures,
        ))

    for traj, box in run.obstacles:
        positions[traj.owner] = sample(traj, times)
        boxes[traj.owner] = box

    collisions = find_collisions(positions, boxes, times, [a.id for a in run.agents])
    if collisions:
        logger.warning(f"{len(collisions)} colliding pairs, first {collisions[0]['pair']} at t={collisions[0]['t']:.2f}")

    return MetricsReport(
        collision_free=not collisions,
        deadlock=deadlock,
        status=run.status,
        t_final=run.t_final,
        agents=per_agent,
        delay_histogram=run.ledger.histogram(),
        max_delay=run.ledger.max_observed,
        rejections=sum(m.rejections for m in per_agent),
        delay_check_aborts=sum(m.delay_check_aborts for m in per_agent),
        commits=sum(m.commits for m in per_agent),
        collisions=collisions,
        max_commit_gaps=tuple(float(g) for g in gaps),  # type: ignore[arg-type]
    )
