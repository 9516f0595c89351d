"""Scenario runs, metrics, trace audit, timing cases and campaigns"""

from .audit import AuditReport, verify_trace
from .campaign import CampaignResult, campaign, cell_config, execute_run
from .cases import generate_case_script, generate_case_scripts, run_all_cases, run_case
from .metrics import compute_metrics
from .scenario import ScenarioRun, build_engine, run_scenario

__all__ = [
    'AuditReport',
    'CampaignResult',
    'ScenarioRun',
    'build_engine',
    'campaign',
    'cell_config',
    'compute_metrics',
    'execute_run',
    'generate_case_script',
    'generate_case_scripts',
    'run_all_cases',
    'run_case',
    'run_scenario',
    'verify_trace',
]
