"""Configuration, error reporting and output writers"""

from .csv_writer import CSVWriter, summarize_runs
from .config_manager import ConfigManager, get_default_config_manager, preset_config
from .error_handler import (
    ErrorCategory,
    ErrorHandler,
    ErrorSeverity,
    handle_config_error,
    handle_run_failure,
    handle_run_outcome,
    handle_trace_error,
)

__all__ = [
    'CSVWriter',
    'summarize_runs',
    'ConfigManager',
    'get_default_config_manager',
    'preset_config',
    'ErrorHandler',
    'ErrorCategory',
    'ErrorSeverity',
    'handle_config_error',
    'handle_run_failure',
    'handle_run_outcome',
    'handle_trace_error',
]
