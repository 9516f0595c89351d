"""Scenario assembly and single-run execution."""

import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..deconfliction.agent import AgentState, DeconflictionAgent
from ..deconfliction.peer_store import PeerStore
from ..models.core import AgentBox, MetricsReport, ScenarioConfig, TrajectorySpline, Variant
from ..planner.base import TrajectoryPlanner
from ..planner.sampling import SamplingPlanner
from ..planner.scripted import ScriptedPlanner
from ..simnet.delay import DelayModel
from ..simnet.engine import PlannerLatency, RunResult, SimulationEngine
from ..simnet.trace import TRACE_FILE
from ..trajectory.spline import hover_spline
from ..trajectory.trefoil import obstacle_as_spline, random_trefoil, segments_for_horizon
from ..utils.config_manager import validate_config
from ..utils.csv_writer import HISTOGRAM_FILE, LEDGER_FILE, METRICS_FILE, CSVWriter
from .metrics import compute_metrics


logger = logging.getLogger(__name__)

# Obstacle paths extend past t_end so late checks never see them clamp
OBSTACLE_MARGIN = 10.0


@dataclass
class ScenarioRun:
    """Result of run_scenario"""
    metrics: MetricsReport
    result: RunResult
    output_dir: Optional[str] = None


def build_obstacles(config: ScenarioConfig) -> List[Tuple[TrajectorySpline, AgentBox]]:
    """Trefoil obstacles fitted over the whole run"""
    rng = np.random.default_rng([config.seed, 4])
    box = AgentBox(config.obstacles.half_extents)
    t1 = config.t_end + OBSTACLE_MARGIN
    obstacles = []
    for k in range(config.obstacles.count):
        params = random_trefoil(rng, config.obstacles)
        n = segments_for_horizon(params, 0.0, t1, config.obstacles.segments_per_period)
        obstacles.append((obstacle_as_spline(params, 0.0, t1, n, owner=f"obstacle{k:02d}"), box))
    return obstacles


def build_engine(config: ScenarioConfig) -> SimulationEngine:
    """Agents, planners, delay model and obstacles for one run

    Raises:
        ConfigError: if the configuration is invalid
    """
    validate_config(config)
    rng = np.random.default_rng([config.seed, 3])
    specs = config.agent_specs()

    overrides = {s.id: s.planner_latency for s in specs if s.planner_latency is not None}
    latency = PlannerLatency(config.planner_latency_min, config.planner_latency_max, overrides, config.seed)

    agents: List[DeconflictionAgent] = []
    planners: Dict[str, TrajectoryPlanner] = {}
    start_times: Dict[str, float] = {}
    for spec in specs:
        variant = Variant.parse(spec.variant or config.variant)
        delay_check = spec.delay_check if spec.delay_check is not None else config.delay_check
        jitter = float(rng.uniform(0.0, config.start_jitter)) if config.start_jitter > 0 else 0.0
        start_times[spec.id] = spec.start_time if spec.start_time is not None else jitter

        switch_lead = latency.upper_bound + config.check_latency + delay_check + 2 * config.tick
        state = AgentState(
            id=spec.id,
            goal=np.asarray(spec.goal, dtype=float),
            variant=variant,
            delay_check=delay_check,
            box=config.box,
            traj_comm=hover_spline(spec.start, 0.0, spec.id, 0),
            store=PeerStore(config.box),
        )
        agents.append(DeconflictionAgent(
            state,
            config.limits,
            config.planner.horizon,
            switch_lead,
            goal_tolerance=config.goal_tolerance,
            max_planner_failures=config.max_planner_failures,
        ))
        if spec.targets is not None:
            planners[spec.id] = ScriptedPlanner(spec.targets, config.planner)
        else:
            planners[spec.id] = SamplingPlanner(config.planner)

    logger.debug(f"Built {len(agents)} agents for seed {config.seed}")
    return SimulationEngine(
        agents,
        planners,
        DelayModel(config.delay, config.seed),
        latency,
        tick=config.tick,
        check_latency=config.check_latency,
        obstacles=build_obstacles(config),
        start_times=start_times,
        seed=config.seed,
    )


def write_outputs(run: RunResult, metrics: MetricsReport, output_dir: str) -> str:
    """trace.jsonl, ledger.csv, metrics.json and the delay histogram"""
    os.makedirs(output_dir, exist_ok=True)
    writer = CSVWriter()
    run.trace.write(os.path.join(output_dir, TRACE_FILE))
    writer.write_ledger(run.ledger, os.path.join(output_dir, LEDGER_FILE))
    writer.write_metrics(metrics, os.path.join(output_dir, METRICS_FILE))
    writer.write_histogram(metrics.delay_histogram, os.path.join(output_dir, HISTOGRAM_FILE), run.ledger.bucket)
    return output_dir


def run_scenario(config: ScenarioConfig, output_dir: Optional[str] = None) -> ScenarioRun:
    """Run one scenario to t_end (or until every agent is done) and compute its metrics"""
    engine = build_engine(config)
    logger.info(
        f"Running seed {config.seed}: {len(engine.agents)} agents, {len(engine.obstacles)} obstacles, "
        f"variant {config.variant}, delay {config.delay.mode}/{config.delay.introduced:g}s, "
        f"delay check {config.delay_check:g}s"
    )
    result = engine.run_until(config.t_end)
    metrics = compute_metrics(result, engine.start_times)
    if output_dir:
        write_outputs(result, metrics, output_dir)
    logger.info(
        f"Seed {config.seed} finished ({metrics.status}): collision_free={metrics.collision_free} "
        f"deadlock={metrics.deadlock} commits={metrics.commits}"
    )
    return ScenarioRun(metrics=metrics, result=result, output_dir=output_dir)
