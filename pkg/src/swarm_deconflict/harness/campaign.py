"""Monte-Carlo campaigns over seeds, introduced delays and variants."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from ..models.core import DelayMode, ScenarioConfig, Variant
from ..simnet.delay import guarantee_monitor
from ..utils.csv_writer import CSVWriter, summarize_runs
from ..utils.error_handler import ErrorHandler, handle_run_failure, handle_run_outcome
from .audit import verify_trace
from .scenario import run_scenario


logger = logging.getLogger(__name__)

# Delay Check window paired with each introduced delay
DELAY_CHECK_MARGIN = 0.075

RUNS_FILE = "runs.csv"
SUMMARY_FILE = "summary.csv"


@dataclass(frozen=True)
class RunSpec:
    """One cell member of a campaign"""
    run_id: str
    config: ScenarioConfig
    output_dir: Optional[str] = None
    audit: bool = False


@dataclass
class CampaignResult:
    runs: pd.DataFrame
    summary: pd.DataFrame
    output_dir: Optional[str] = None


def run_id_for(seed: int, delay: float, variant: str) -> str:
    return f"s{seed}_d{int(round(delay * 1000))}_{variant}"


def cell_config(template: ScenarioConfig, seed: int, delay: float, variant: str) -> ScenarioConfig:
    """Template with the seed, variant, introduced delay and paired Delay Check window"""
    mode = template.delay.mode
    if mode == DelayMode.SCRIPTED.value:
        mode = DelayMode.FIXED.value
    return replace(
        template,
        seed=seed,
        variant=Variant.parse(variant).value,
        delay_check=delay + DELAY_CHECK_MARGIN,
        delay=replace(template.delay, mode=mode, introduced=delay),
    )


def _row(spec: RunSpec) -> Dict[str, Any]:
    cfg = spec.config
    return {
        'seed': cfg.seed,
        'delay_introduced': cfg.delay.introduced,
        'delay_check': cfg.delay_check,
        'variant': cfg.variant,
    }


def execute_run(spec: RunSpec) -> Tuple[Dict[str, Any], Optional[BaseException]]:
    """Run one campaign member; failures become a status instead of an exception"""
    row = _row(spec)
    try:
        run = run_scenario(spec.config, spec.output_dir)
    except Exception as e:
        row['status'] = f"failed: {e}"
        return row, e

    metrics = run.metrics
    agents = metrics.agents
    count = max(len(agents), 1)
    violations = guarantee_monitor(run.result.ledger, run.result.delay_checks)
    row.update({
        'status': metrics.status,
        'collision_free': metrics.collision_free,
        'deadlock': metrics.deadlock,
        'monitor_violations': len(violations),
        'rejections': metrics.rejections,
        'delay_check_aborts': metrics.delay_check_aborts,
        'commits': metrics.commits,
        'rejections_per_commit': metrics.rejections_per_commit,
        'mean_travel_time': sum(a.travel_time for a in agents) / count,
        'mean_travel_distance': sum(a.travel_distance for a in agents) / count,
        'mean_num_stops': sum(a.num_stops for a in agents) / count,
        'mean_stop_time': sum(a.stop_time for a in agents) / count,
        'mean_jerk_integral': sum(a.jerk_integral for a in agents) / count,
        'max_delay': metrics.max_delay,
        'max_commit_gap': max(metrics.max_commit_gaps),
    })
    # Not a runs.csv column; only feeds the campaign warnings
    row['stopped_agents'] = sorted({r["agent"] for r in run.result.trace.records if r["kind"] == "stopped"})
    if spec.audit:
        row['audit_clean'] = verify_trace(run.result.trace.records).audit_clean
    return row, None


def campaign(
    template: ScenarioConfig,
    seeds: Sequence[int],
    delays: Sequence[float],
    variants: Sequence[str],
    output_dir: Optional[str] = None,
    workers: int = 1,
    keep_traces: bool = False,
    audit: bool = False,
    error_handler: Optional[ErrorHandler] = None,
) -> CampaignResult:
    """Cross product of seeds, introduced delays (s) and variants.

    Writes runs.csv and summary.csv under output_dir when given; run
    outputs go to output_dir/runs/<run_id> when keep_traces is set.
    """
    specs: List[RunSpec] = []
    for delay in delays:
        for variant in variants:
            for seed in seeds:
                run_id = run_id_for(seed, delay, variant)
                run_dir = os.path.join(output_dir, "runs", run_id) if output_dir and keep_traces else None
                specs.append(RunSpec(run_id, cell_config(template, seed, delay, variant), run_dir, audit))

    logger.info(f"Campaign: {len(specs)} runs ({len(seeds)} seeds x {len(delays)} delays x {len(variants)} variants)")
    if error_handler:
        error_handler.start_progress_tracking(len(specs))

    if workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(execute_run, specs))
    else:
        results = [execute_run(spec) for spec in specs]

    rows = []
    for spec, (row, error) in zip(specs, results):
        rows.append(row)
        if error is not None:
            logger.error(f"Run {spec.run_id} failed: {error}")
            if error_handler:
                handle_run_failure(error_handler, spec.run_id, error)
        elif error_handler:
            handle_run_outcome(error_handler, spec.run_id, row)
        if error_handler:
            error_handler.update_progress(spec.run_id, success=error is None)

    writer = CSVWriter()
    runs = pd.DataFrame(rows, columns=CSVWriter.RUN_HEADERS)
    summary = summarize_runs(rows)
    if output_dir:
        writer.write_runs(rows, os.path.join(output_dir, RUNS_FILE))
        writer.write_summary(summary, os.path.join(output_dir, SUMMARY_FILE))
    return CampaignResult(runs=runs, summary=summary, output_dir=output_dir)
