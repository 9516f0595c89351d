"""Tests for structured error logging."""

import json
import logging
import os
import shutil
import tempfile
import unittest

from swarm_deconflict.models.core import ConfigError, TraceError, TrajectoryError
from swarm_deconflict.utils.error_handler import (
    ErrorCategory,
    ErrorHandler,
    JSONFormatter,
    handle_config_error,
    handle_run_failure,
    handle_run_outcome,
    handle_trace_error,
)


class TestErrorHandler(unittest.TestCase):
    """Error collection, progress tracking and reports"""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.handler = ErrorHandler(log_directory=self.temp_dir, enable_console=False)

    def tearDown(self):
        self.handler.close()
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_config_error_keeps_field_name(self):
        detail = handle_config_error(self.handler, ConfigError("delay.mode", "unknown"), "scenario.yaml")
        self.assertEqual(detail.field_name, "delay.mode")
        self.assertEqual(detail.error_code, "C003")
        self.assertEqual(detail.category, ErrorCategory.CONFIGURATION.value)
        self.assertEqual(detail.context, {'source': 'scenario.yaml'})
        self.assertTrue(self.handler.has_errors())

    def test_run_failure_classification(self):
        codes = [
            handle_run_failure(self.handler, "r1", TrajectoryError("bad knots")).error_code,
            handle_run_failure(self.handler, "r2", ConfigError("t_end", "must be > 0")).error_code,
            handle_run_failure(self.handler, "r3", RuntimeError("boom")).error_code,
        ]
        self.assertEqual(codes, ["T001", "C003", "R001"])
        self.assertEqual(len(self.handler.get_errors_for_run("r3")), 1)
        self.assertIn("RuntimeError", self.handler.get_errors_for_run("r3")[0].stack_trace)

    def test_unparsable_config_is_a_format_error(self):
        detail = handle_config_error(self.handler, ConfigError("config", "cannot parse scenario.yaml"), "scenario.yaml")
        self.assertEqual(detail.error_code, "C002")

    def test_run_outcome_warnings(self):
        row = {
            'collision_free': False,
            'deadlock': True,
            'monitor_violations': 3,
            'stopped_agents': ["agent01", "agent04"],
        }
        warnings = handle_run_outcome(self.handler, "r5", row)
        self.assertEqual([w.error_code for w in warnings], ["R004", "R003", "A003", "R002", "R002"])
        self.assertEqual([w.agent for w in warnings[3:]], ["agent01", "agent04"])
        self.assertEqual(warnings[2].context, {'monitor_violations': 3})
        self.assertFalse(self.handler.has_errors())

    def test_clean_run_outcome_is_silent(self):
        row = {'collision_free': True, 'deadlock': False, 'monitor_violations': 0, 'stopped_agents': []}
        self.assertEqual(handle_run_outcome(self.handler, "r6", row), [])
        self.assertFalse(self.handler.has_warnings())

    def test_trace_errors(self):
        self.assertEqual(handle_trace_error(self.handler, "t", FileNotFoundError("x")).error_code, "A001")
        self.assertEqual(handle_trace_error(self.handler, "t", TraceError("corrupt")).error_code, "A002")

    def test_progress(self):
        progress = self.handler.start_progress_tracking(4)
        for run_id, ok in (("a", True), ("b", False), ("c", True)):
            self.handler.update_progress(run_id, success=ok)
        self.assertEqual(progress.finished_runs, 3)
        self.assertEqual(progress.failed_runs, 1)
        self.assertEqual(progress.current_run, "c")
        self.assertAlmostEqual(progress.completion_percentage, 75.0)

    def test_summary_and_report(self):
        handle_run_failure(self.handler, "r1", RuntimeError("boom"))
        handle_run_failure(self.handler, "r2", RuntimeError("boom"))
        self.handler.log_warning("slow", "DEADLOCK", ErrorCategory.SIMULATION, run_id="r1")
        summary = self.handler.get_error_summary()
        self.assertEqual(summary['total_errors'], 2)
        self.assertEqual(summary['total_warnings'], 1)
        self.assertEqual(summary['runs_with_errors'], 2)
        self.assertEqual(summary['errors_by_code'], {'R001': 2})
        self.assertEqual(summary['warnings_by_category'], {'simulation': 1})

        path = self.handler.generate_error_report(os.path.join(self.temp_dir, "report.json"))
        with open(path) as f:
            report = json.load(f)
        self.assertEqual(len(report['all_errors']), 2)
        self.assertEqual(report['all_warnings'][0]['error_code'], "R003")

        self.handler.clear_errors()
        self.assertFalse(self.handler.has_errors())
        self.assertFalse(self.handler.has_warnings())

    def test_errors_written_as_json_lines(self):
        handle_run_failure(self.handler, "r9", RuntimeError("boom"))
        self.handler.close()
        files = [f for f in os.listdir(self.temp_dir) if f.startswith("errors_")]
        self.assertEqual(len(files), 1)
        with open(os.path.join(self.temp_dir, files[0])) as f:
            entry = json.loads(f.readline())
        self.assertEqual(entry['run_id'], "r9")
        self.assertEqual(entry['error_code'], "R001")
        self.assertEqual(entry['level'], "ERROR")


class TestJSONFormatter(unittest.TestCase):

    def test_extra_fields(self):
        record = logging.LogRecord("swarm_deconflict.x", logging.INFO, __file__, 1, "hello %s", ("world",), None)
        record.agent = "agent03"
        entry = json.loads(JSONFormatter().format(record))
        self.assertEqual(entry['message'], "hello world")
        self.assertEqual(entry['agent'], "agent03")
        self.assertNotIn('run_id', entry)
