"""Command-line interface for the deconfliction simulator."""

import json
import logging
import os
import sys
from typing import List, Optional

import click

from .harness.audit import verify_trace
from .harness.campaign import campaign as run_campaign
from .harness.cases import run_all_cases
from .harness.scenario import run_scenario
from .models.core import ConfigError, ScenarioConfig, SwarmDeconflictError, TraceError, Variant
from .utils.config_manager import PRESETS, ConfigManager, default_output_dir
from .utils.error_handler import ErrorHandler, handle_config_error, handle_trace_error


# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def parse_seeds(value: str) -> List[int]:
    """'A..B' (inclusive) or a comma-separated list"""
    value = value.strip()
    try:
        if '..' in value:
            lo, hi = value.split('..', 1)
            first, last = int(lo), int(hi)
            if last < first:
                raise click.BadParameter(f"empty seed range {value}")
            return list(range(first, last + 1))
        return [int(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise click.BadParameter(f"seeds must be 'A..B' or a comma list, got {value!r}")


def parse_delays_ms(value: str) -> List[float]:
    """Comma-separated introduced delays in milliseconds, returned in seconds"""
    try:
        delays = [float(v) / 1000.0 for v in value.split(',') if v.strip()]
    except ValueError:
        raise click.BadParameter(f"delays must be comma-separated milliseconds, got {value!r}")
    if any(d < 0 for d in delays):
        raise click.BadParameter("delays must be >= 0")
    return delays


def parse_variants(value: str) -> List[str]:
    variants = []
    for name in value.split(','):
        if not name.strip():
            continue
        try:
            variants.append(Variant.parse(name.strip()).value)
        except ValueError as e:
            raise click.BadParameter(str(e))
    return variants


class SimulatorCLI:
    """Shared state of one CLI invocation"""

    def __init__(self, config_path: Optional[str] = None, log_directory: str = "logs"):
        self.config_manager = ConfigManager(config_path)
        self.error_handler = ErrorHandler(log_directory=log_directory, enable_console=False)

    def load_config(self) -> ScenarioConfig:
        try:
            return self.config_manager.load_config()
        except ConfigError as e:
            handle_config_error(self.error_handler, e, self.config_manager.config_path)
            raise


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose logging')
@click.option('--log-dir', default='logs', help='Directory for JSON-lines logs')
@click.pass_context
def cli(ctx, verbose, log_dir):
    """Swarm Deconflict - delay-robust trajectory deconfliction simulator"""

    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    ctx.ensure_object(dict)
    ctx.obj['log_dir'] = log_dir


def _session(ctx, config_path: Optional[str]) -> SimulatorCLI:
    session = SimulatorCLI(config_path, ctx.obj.get('log_dir', 'logs'))
    ctx.call_on_close(session.error_handler.close)
    return session


@cli.command()
@click.option('--config', '-c', 'config_path', help='Scenario configuration file (YAML or JSON)')
@click.option('--seed', type=int, help='Override the scenario seed')
@click.option('--out', '-o', help='Output directory (default: $SWARM_DECONFLICT_OUTPUT_DIR or ./runs)')
@click.pass_context
def run(ctx, config_path, seed, out):
    """Run one scenario and write trace, ledger, metrics and histogram"""

    session = _session(ctx, config_path)
    try:
        config = session.load_config()
        if seed is not None:
            config = session.config_manager.update_config({'seed': seed})
        output_dir = out or os.path.join(default_output_dir(), f"seed_{config.seed}")
        result = run_scenario(config, output_dir)
    except SwarmDeconflictError as e:
        click.echo(f"✗ {e}")
        sys.exit(1)

    metrics = result.metrics
    mark = "✓" if metrics.collision_free and not metrics.deadlock else "✗"
    click.echo(f"{mark} Run finished ({metrics.status}) at t={metrics.t_final:.2f}s")
    click.echo(f"  Collision free: {metrics.collision_free}")
    click.echo(f"  Deadlock: {metrics.deadlock}")
    click.echo(f"  Commits: {metrics.commits}")
    click.echo(f"  Rejections per commit: {metrics.rejections_per_commit:.3f}")
    click.echo(f"  Max delay: {metrics.max_delay * 1000:.1f} ms")
    click.echo(f"  Outputs: {output_dir}")


@cli.command()
@click.option('--config', '-c', 'config_path', help='Scenario configuration file used as the template')
@click.option('--seeds', default='0..9', show_default=True, help="Seed range 'A..B' or comma list")
@click.option('--delays', default='0,50,100,200,300', show_default=True, help='Introduced delays in ms')
@click.option('--variants', default='rmader,nocheck,mader', show_default=True, help='Protocol variants')
@click.option('--workers', default=1, show_default=True, type=click.IntRange(min=1), help='Parallel worker processes')
@click.option('--out', '-o', help='Output directory (default: $SWARM_DECONFLICT_OUTPUT_DIR/campaign)')
@click.option('--keep-traces', is_flag=True, help='Keep per-run trace, ledger and metrics')
@click.option('--audit', is_flag=True, help='Re-check every run trace offline')
@click.pass_context
def campaign(ctx, config_path, seeds, delays, variants, workers, out, keep_traces, audit):
    """Monte-Carlo campaign over seeds, introduced delays and variants"""

    session = _session(ctx, config_path)
    seed_list = parse_seeds(seeds)
    delay_list = parse_delays_ms(delays)
    variant_list = parse_variants(variants)
    output_dir = out or os.path.join(default_output_dir(), "campaign")

    try:
        template = session.load_config()
    except ConfigError as e:
        click.echo(f"✗ {e}")
        sys.exit(1)

    click.echo(f"Starting campaign: {len(seed_list) * len(delay_list) * len(variant_list)} runs")
    result = run_campaign(
        template,
        seed_list,
        delay_list,
        variant_list,
        output_dir=output_dir,
        workers=workers,
        keep_traces=keep_traces,
        audit=audit,
        error_handler=session.error_handler,
    )

    failed = int(result.runs['status'].astype(str).str.startswith('failed').sum()) if len(result.runs) else 0
    mark = "✓" if failed == 0 else "✗"
    click.echo(f"{mark} Campaign completed: {len(result.runs)} runs, {failed} failed")
    for _, row in result.summary.iterrows():
        click.echo(
            f"  {row['variant']:>8} delay {row['delay_introduced'] * 1000:5.0f} ms: "
            f"collision free {row['collision_free_rate'] * 100:5.1f}%  "
            f"deadlock {row['deadlock_rate'] * 100:5.1f}%"
        )
    click.echo(f"  Outputs: {output_dir}")
    if session.error_handler.has_errors() or session.error_handler.has_warnings():
        session.error_handler.generate_error_report(os.path.join(output_dir, "errors.txt"))
    if failed:
        sys.exit(1)


@cli.command()
@click.option('--delay-check', 'delay_check_ms', default=100.0, show_default=True, help='Delay Check window in ms')
@click.option('--json', 'as_json', is_flag=True, help='Print outcomes as JSON')
def cases(delay_check_ms, as_json):
    """Run the twelve scripted publish/receive timing cases"""

    if delay_check_ms <= 0:
        click.echo("✗ --delay-check must be > 0")
        sys.exit(1)
    outcomes = run_all_cases(delay_check_ms / 1000.0)

    if as_json:
        click.echo(json.dumps([o.to_dict() for o in outcomes], indent=2))
    else:
        for outcome in outcomes:
            if not outcome.constructible:
                click.echo(f"  case {outcome.case_id:2d}: not constructible")
                continue
            mark = "✗" if outcome.committed_conflict else "✓"
            click.echo(f"{mark} case {outcome.case_id:2d}: detected by {outcome.detector} in {outcome.phase}")

    if any(o.committed_conflict for o in outcomes):
        click.echo("✗ Committed trajectories conflict in at least one case")
        sys.exit(1)


@cli.command()
@click.option('--trace', 'trace_path', required=True, help='Run directory or trace.jsonl file')
@click.pass_context
def audit(ctx, trace_path):
    """Re-check committed timelines and delivery delays of a finished run"""

    session = _session(ctx, None)
    try:
        report = verify_trace(trace_path)
    except TraceError as e:
        handle_trace_error(session.error_handler, trace_path, e)
        click.echo(f"✗ {e}")
        sys.exit(2)

    click.echo(f"  Intervals checked: {report.intervals_checked}")
    click.echo(f"  Commits: {report.commits}")
    click.echo(f"  Deliveries: {report.deliveries}")
    click.echo(f"  Delay violations: {len(report.violations)}")
    click.echo(f"  Conflicts: {len(report.conflicts)}")
    for conflict in report.conflicts:
        click.echo(f"    {conflict['pair'][0]} / {conflict['pair'][1]} at t={conflict['t']:.3f}s")

    if not report.guarantee_holds:
        click.echo("✗ Delay bound held but committed trajectories conflict")
        sys.exit(1)
    click.echo("✓ Audit clean" if report.audit_clean else "✓ Conflicts explained by delay violations")


@cli.command('init-config')
@click.option('--preset', type=click.Choice(sorted(PRESETS)), default='default', show_default=True)
@click.option('--output', '-o', default='scenario.yaml', show_default=True, help='Template path (.yaml or .json)')
def init_config(preset, output):
    """Generate a scenario configuration template"""

    try:
        ConfigManager().save_config_template(output, preset)
    except (ConfigError, OSError) as e:
        click.echo(f"✗ Error generating config template: {e}")
        sys.exit(1)
    click.echo(f"✓ Configuration template generated: {output}")
    click.echo("  Edit the file to customize agents, obstacles and delays")


if __name__ == '__main__':
    cli()
