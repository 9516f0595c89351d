"""Structured error handling and JSON logging for simulation runs and campaigns."""

import json
import logging
import sys
import traceback
from collections import Counter
from dataclasses import asdict, dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..models.core import ConfigError, TraceError, TrajectoryError


class ErrorSeverity(Enum):
    """Error severity levels"""
    DEBUG = "debug"
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    """Error categories for classification"""
    CONFIGURATION = "configuration"
    TRAJECTORY = "trajectory"
    SIMULATION = "simulation"
    TRACE = "trace"
    CAMPAIGN = "campaign"
    SYSTEM = "system"


@dataclass
class ErrorDetail:
    """Detailed error information"""
    timestamp: str
    severity: str
    category: str
    error_code: str
    message: str
    run_id: Optional[str] = None
    agent: Optional[str] = None
    field_name: Optional[str] = None
    sim_time: Optional[float] = None
    stack_trace: Optional[str] = None
    context: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization"""
        return asdict(self)


@dataclass
class CampaignProgress:
    """Progress of a batch of simulation runs"""
    total_runs: int
    finished_runs: int = 0
    successful_runs: int = 0
    failed_runs: int = 0
    current_run: Optional[str] = None
    start_time: Optional[datetime] = None

    @property
    def completion_percentage(self) -> float:
        if self.total_runs == 0:
            return 0.0
        return (self.finished_runs / self.total_runs) * 100

    @property
    def success_rate(self) -> float:
        if self.finished_runs == 0:
            return 0.0
        return (self.successful_runs / self.finished_runs) * 100

    def to_dict(self) -> Dict[str, Any]:
        return {
            'total_runs': self.total_runs,
            'finished_runs': self.finished_runs,
            'successful_runs': self.successful_runs,
            'failed_runs': self.failed_runs,
            'current_run': self.current_run,
            'start_time': self.start_time.isoformat() if self.start_time else None,
            'completion_percentage': self.completion_percentage,
            'success_rate': self.success_rate,
        }


class JSONFormatter(logging.Formatter):
    """One JSON object per log record"""

    EXTRA_FIELDS = ('error_code', 'category', 'run_id', 'agent', 'sim_time', 'context')

    def format(self, record: logging.LogRecord) -> str:
        log_entry = {
            'timestamp': datetime.fromtimestamp(record.created).isoformat(),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
            'module': record.module,
            'function': record.funcName,
            'line': record.lineno,
        }
        for name in self.EXTRA_FIELDS:
            if hasattr(record, name):
                log_entry[name] = getattr(record, name)
        return json.dumps(log_entry, default=str)


class ErrorHandler:
    """Collects errors and warnings and routes them to jsonl and console logs"""

    def __init__(self, log_directory: str = "logs", enable_console: bool = True, console_level: int = logging.INFO):
        self.log_directory = Path(log_directory)
        self.log_directory.mkdir(parents=True, exist_ok=True)

        self.errors: List[ErrorDetail] = []
        self.warnings: List[ErrorDetail] = []
        self.progress: Optional[CampaignProgress] = None

        self._setup_logging(enable_console, console_level)

        self.error_codes = {
            # Configuration errors
            "CONFIG_FILE_NOT_FOUND": "C001",
            "INVALID_CONFIG_FORMAT": "C002",
            "INVALID_CONFIG_VALUE": "C003",

            # Trajectory errors
            "MALFORMED_TRAJECTORY": "T001",

            # Simulation errors
            "RUN_FAILED": "R001",
            "PLANNER_FAILURE": "R002",
            "DEADLOCK": "R003",
            "COLLISION": "R004",

            # Trace errors
            "TRACE_NOT_FOUND": "A001",
            "TRACE_CORRUPT": "A002",
            "GUARANTEE_VIOLATION": "A003",

            "UNEXPECTED_ERROR": "S999",
        }

    def _setup_logging(self, enable_console: bool, console_level: int) -> None:
        """Attach jsonl file, jsonl error and console handlers to the package logger"""
        self.logger = logging.getLogger('swarm_deconflict')
        self.logger.setLevel(logging.DEBUG)
        for handler in list(self.logger.handlers):
            handler.close()
        self.logger.handlers.clear()

        stamp = datetime.now().strftime('%Y%m%d')
        file_handler = logging.FileHandler(self.log_directory / f"simulation_{stamp}.jsonl")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(JSONFormatter())
        self.logger.addHandler(file_handler)

        if enable_console:
            console_handler = logging.StreamHandler(sys.stdout)
            console_handler.setLevel(console_level)
            console_handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(message)s'))
            self.logger.addHandler(console_handler)

        error_handler = logging.FileHandler(self.log_directory / f"errors_{stamp}.jsonl")
        error_handler.setLevel(logging.ERROR)
        error_handler.setFormatter(JSONFormatter())
        self.logger.addHandler(error_handler)

    def close(self) -> None:
        """Detach and close the handlers installed by this instance"""
        for handler in list(self.logger.handlers):
            handler.close()
            self.logger.removeHandler(handler)

    def log_error(
        self,
        message: str,
        error_type: str,
        category: ErrorCategory = ErrorCategory.SYSTEM,
        run_id: Optional[str] = None,
        agent: Optional[str] = None,
        field_name: Optional[str] = None,
        sim_time: Optional[float] = None,
        exception: Optional[BaseException] = None,
        context: Optional[Dict[str, Any]] = None,
    ) -> ErrorDetail:
        """Record an error and emit it on the structured logger"""
        error_code = self.error_codes.get(error_type, "S999")
        stack_trace = None
        if exception is not None:
            stack_trace = ''.join(
                traceback.format_exception(type(exception), exception, exception.__traceback__)
            )

        detail = ErrorDetail(
            timestamp=datetime.now().isoformat(),
            severity=ErrorSeverity.ERROR.value,
            category=category.value,
            error_code=error_code,
            message=message,
            run_id=run_id,
            agent=agent,
            field_name=field_name,
            sim_time=sim_time,
            stack_trace=stack_trace,
            context=context or {},
        )
        self.errors.append(detail)
        self.logger.error(
            message,
            extra={
                'error_code': error_code,
                'category': category.value,
                'run_id': run_id,
                'agent': agent,
                'sim_time': sim_time,
                'context': context or {},
            },
        )
        return detail

    def log_warning(
        self,
        message: str,
        warning_type: str,
        category: ErrorCategory = ErrorCategory.SYSTEM,
        run_id: Optional[str] = None,
        agent: Optional[str] = None,
        context: Optional[Dict[str, Any]] = None,
    ) -> ErrorDetail:
        """Record a warning and emit it on the structured logger"""
        warning_code = self.error_codes.get(warning_type, "W999")
        detail = ErrorDetail(
            timestamp=datetime.now().isoformat(),
            severity=ErrorSeverity.WARNING.value,
            category=category.value,
            error_code=warning_code,
            message=message,
            run_id=run_id,
            agent=agent,
            context=context or {},
        )
        self.warnings.append(detail)
        self.logger.warning(
            message,
            extra={
                'error_code': warning_code,
                'category': category.value,
                'run_id': run_id,
                'agent': agent,
                'context': context or {},
            },
        )
        return detail

    def log_info(self, message: str, context: Optional[Dict[str, Any]] = None) -> None:
        self.logger.info(message, extra={'context': context or {}})

    def start_progress_tracking(self, total_runs: int) -> CampaignProgress:
        """Start tracking a batch of runs"""
        self.progress = CampaignProgress(total_runs=total_runs, start_time=datetime.now())
        self.log_info(f"Starting campaign of {total_runs} runs")
        return self.progress

    def update_progress(self, run_id: Optional[str] = None, success: Optional[bool] = None) -> None:
        """Count a finished run; logs every 10 runs and at the end"""
        if not self.progress:
            return
        if run_id:
            self.progress.current_run = run_id
        if success is None:
            return

        self.progress.finished_runs += 1
        if success:
            self.progress.successful_runs += 1
        else:
            self.progress.failed_runs += 1

        if self.progress.finished_runs % 10 == 0 or self.progress.finished_runs == self.progress.total_runs:
            self.log_info(
                f"Progress: {self.progress.completion_percentage:.1f}% "
                f"({self.progress.finished_runs}/{self.progress.total_runs}) - "
                f"Success rate: {self.progress.success_rate:.1f}%",
                context={'progress': self.progress.to_dict()},
            )

    def get_error_summary(self) -> Dict[str, Any]:
        """Counts of errors and warnings by category"""
        return {
            'total_errors': len(self.errors),
            'total_warnings': len(self.warnings),
            'errors_by_category': dict(Counter(e.category for e in self.errors)),
            'warnings_by_category': dict(Counter(w.category for w in self.warnings)),
            'errors_by_code': dict(Counter(e.error_code for e in self.errors)),
            'runs_with_errors': len(set(e.run_id for e in self.errors if e.run_id)),
            'progress': self.progress.to_dict() if self.progress else None,
        }

    def generate_error_report(self, output_file: Optional[str] = None) -> str:
        """Write summary plus every error and warning as JSON; returns the path"""
        if output_file is None:
            output_file = str(self.log_directory / f"error_report_{datetime.now().strftime('%Y%m%d_%H%M%S')}.json")

        report = {
            'report_timestamp': datetime.now().isoformat(),
            'summary': self.get_error_summary(),
            'all_errors': [error.to_dict() for error in self.errors],
            'all_warnings': [warning.to_dict() for warning in self.warnings],
        }
        with open(output_file, 'w', encoding='utf-8') as f:
            json.dump(report, f, indent=2, default=str)

        self.log_info(f"Error report generated: {output_file}")
        return output_file

    def clear_errors(self) -> None:
        self.errors.clear()
        self.warnings.clear()
        self.progress = None

    def has_errors(self) -> bool:
        return len(self.errors) > 0

    def has_warnings(self) -> bool:
        return len(self.warnings) > 0

    def get_errors_for_run(self, run_id: str) -> List[ErrorDetail]:
        return [error for error in self.errors if error.run_id == run_id]


# Convenience functions for common error scenarios
def handle_config_error(error_handler: ErrorHandler, exception: Exception, source: Optional[str] = None) -> ErrorDetail:
    """Classify a configuration load failure"""
    if isinstance(exception, FileNotFoundError):
        return error_handler.log_error(
            f"Configuration file not found: {source}",
            "CONFIG_FILE_NOT_FOUND",
            ErrorCategory.CONFIGURATION,
            exception=exception,
        )
    field_name = exception.field_name if isinstance(exception, ConfigError) else None
    # Parse failures are reported against the whole file
    error_type = "INVALID_CONFIG_FORMAT" if field_name == "config" else "INVALID_CONFIG_VALUE"
    return error_handler.log_error(
        f"Invalid configuration: {exception}",
        error_type,
        ErrorCategory.CONFIGURATION,
        field_name=field_name,
        exception=exception,
        context={'source': source} if source else None,
    )


def handle_run_failure(error_handler: ErrorHandler, run_id: str, exception: BaseException) -> ErrorDetail:
    """A simulation run that raised instead of producing metrics"""
    if isinstance(exception, TrajectoryError):
        error_type, category = "MALFORMED_TRAJECTORY", ErrorCategory.TRAJECTORY
    elif isinstance(exception, ConfigError):
        error_type, category = "INVALID_CONFIG_VALUE", ErrorCategory.CONFIGURATION
    else:
        error_type, category = "RUN_FAILED", ErrorCategory.SIMULATION
    return error_handler.log_error(
        f"Run {run_id} failed: {exception}",
        error_type,
        category,
        run_id=run_id,
        exception=exception,
    )


def handle_trace_error(error_handler: ErrorHandler, trace_path: str, exception: Exception) -> ErrorDetail:
    """Missing or corrupt trace given to the audit"""
    if isinstance(exception, FileNotFoundError):
        return error_handler.log_error(
            f"Trace not found: {trace_path}",
            "TRACE_NOT_FOUND",
            ErrorCategory.TRACE,
            exception=exception,
        )
    error_type = "TRACE_CORRUPT" if isinstance(exception, TraceError) else "UNEXPECTED_ERROR"
    return error_handler.log_error(
        f"Cannot read trace {trace_path}: {exception}",
        error_type,
        ErrorCategory.TRACE,
        exception=exception,
        context={'trace': trace_path},
    )


def handle_run_outcome(error_handler: ErrorHandler, run_id: str, row: Dict[str, Any]) -> List[ErrorDetail]:
    """Warnings for a finished run that collided, deadlocked, saw late deliveries or had agents give up"""
    warnings = []
    if row.get('collision_free') is False:
        warnings.append(error_handler.log_warning(
            f"Run {run_id} has a collision", "COLLISION", ErrorCategory.SIMULATION, run_id=run_id,
        ))
    if row.get('deadlock'):
        warnings.append(error_handler.log_warning(
            f"Run {run_id} deadlocked", "DEADLOCK", ErrorCategory.SIMULATION, run_id=run_id,
        ))
    if row.get('monitor_violations'):
        warnings.append(error_handler.log_warning(
            f"Run {run_id}: {row['monitor_violations']} deliveries slower than the Delay Check window",
            "GUARANTEE_VIOLATION",
            ErrorCategory.CAMPAIGN,
            run_id=run_id,
            context={'monitor_violations': row['monitor_violations']},
        ))
    for agent in row.get('stopped_agents', ()):
        warnings.append(error_handler.log_warning(
            f"Run {run_id}: {agent} stopped after repeated planner failures",
            "PLANNER_FAILURE",
            ErrorCategory.SIMULATION,
            run_id=run_id,
            agent=agent,
        ))
    return warnings
