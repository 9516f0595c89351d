"""Tests for run output tables."""

import math
import os
import shutil
import tempfile
import unittest

import pandas as pd

from swarm_deconflict.models.core import AgentMetrics, MetricsReport
from swarm_deconflict.simnet.delay import DelayLedger, LedgerRecord
from swarm_deconflict.utils.csv_writer import CSVWriter, summarize_runs


def run_row(seed, variant="rmader", delay=0.05, collision_free=True, status="completed", **extra):
    row = {
        'seed': seed,
        'delay_introduced': delay,
        'delay_check': delay + 0.075,
        'variant': variant,
        'status': status,
        'collision_free': collision_free,
        'deadlock': False,
        'monitor_violations': 0,
        'rejections': 2,
        'delay_check_aborts': 1,
        'commits': 10,
        'rejections_per_commit': 0.3,
        'mean_travel_time': 5.0 + seed,
        'mean_travel_distance': 10.0,
        'mean_num_stops': 0.0,
        'mean_stop_time': 0.0,
        'mean_jerk_integral': 1.0,
        'max_delay': delay,
        'max_commit_gap': 0.0,
    }
    row.update(extra)
    return row


class TestCSVWriter(unittest.TestCase):
    """Ledger, metrics and histogram files"""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.writer = CSVWriter()

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_ledger_round_trip(self):
        ledger = DelayLedger()
        ledger.record(LedgerRecord("a", "b", 1, "opt", 0.1, 0.1 + 0.05))
        ledger.record(LedgerRecord("b", "a", 3, "comm", 1.0 / 3.0, 0.7))
        path = self.writer.write_ledger(ledger, os.path.join(self.temp_dir, "out", "ledger.csv"))
        again = self.writer.read_ledger(path)
        self.assertEqual(again.records, ledger.records)

        table = self.writer.read_table(path)
        self.assertEqual(list(table.columns), CSVWriter.LEDGER_HEADERS)

    def test_ledger_missing_columns(self):
        path = os.path.join(self.temp_dir, "bad.csv")
        with open(path, "w") as f:
            f.write("sender,receiver\na,b\n")
        with self.assertRaises(ValueError):
            self.writer.read_ledger(path)

    def test_metrics_round_trip(self):
        report = MetricsReport(
            collision_free=False,
            deadlock=False,
            status="completed",
            t_final=12.5,
            agents=[AgentMetrics("a", True, 4.2, 5.1, 5.0, 1, 0.6, 3.5, 2, 1, 7, 0)],
            delay_histogram={"50": 3},
            max_delay=0.052,
            rejections=2,
            delay_check_aborts=1,
            commits=7,
            collisions=[{"pair": ["a", "obstacle00"], "t": 3.2, "margin": -0.01}],
            max_commit_gaps=(1e-12, 0.0, 0.0),
        )
        path = self.writer.write_metrics(report, os.path.join(self.temp_dir, "metrics.json"))
        self.assertEqual(self.writer.read_metrics(path).to_dict(), report.to_dict())

    def test_histogram_format(self):
        path = self.writer.write_histogram({"100": 1, "50": 4}, os.path.join(self.temp_dir, "h.dat"))
        with open(path) as f:
            lines = f.read().splitlines()
        self.assertTrue(lines[0].startswith("#"))
        self.assertEqual(lines[1:], ["50 60 4", "100 110 1"])

    def test_runs_header_only(self):
        path = self.writer.write_runs([], os.path.join(self.temp_dir, "runs.csv"))
        with open(path) as f:
            self.assertEqual(f.read().strip(), ",".join(CSVWriter.RUN_HEADERS))


class TestSummarizeRuns(unittest.TestCase):
    """Per-cell rates"""

    def test_empty(self):
        summary = summarize_runs([])
        self.assertEqual(len(summary), 0)
        self.assertEqual(list(summary.columns), CSVWriter.SUMMARY_HEADERS)

    def test_cells(self):
        rows = [
            run_row(0),
            run_row(1, collision_free=False),
            run_row(0, variant="mader"),
            run_row(0, delay=0.2),
        ]
        summary = summarize_runs(rows)
        self.assertEqual(len(summary), 3)
        cell = summary[(summary['variant'] == 'rmader') & (summary['delay_introduced'] == 0.05)].iloc[0]
        self.assertEqual(cell['runs'], 2)
        self.assertEqual(cell['collision_free_rate'], 0.5)
        self.assertAlmostEqual(cell['mean_travel_time'], 5.5)
        self.assertAlmostEqual(cell['delay_check'], 0.125)

    def test_failed_runs_count_against_rate(self):
        failed = {'seed': 1, 'delay_introduced': 0.05, 'delay_check': 0.125, 'variant': 'rmader', 'status': 'failed: boom'}
        summary = summarize_runs([run_row(0), failed])
        cell = summary.iloc[0]
        self.assertEqual(cell['failed_runs'], 1)
        self.assertEqual(cell['collision_free_rate'], 0.5)
        self.assertAlmostEqual(cell['mean_travel_time'], 5.0)

    def test_all_failed_cell(self):
        failed = {'seed': 0, 'delay_introduced': 0.0, 'delay_check': 0.075, 'variant': 'rmader', 'status': 'failed: boom'}
        cell = summarize_runs([failed]).iloc[0]
        self.assertEqual(cell['collision_free_rate'], 0.0)
        self.assertTrue(math.isnan(cell['mean_travel_time']))

    def test_summary_written(self):
        temp_dir = tempfile.mkdtemp()
        try:
            path = CSVWriter().write_summary(summarize_runs([run_row(0)]), os.path.join(temp_dir, "summary.csv"))
            frame = pd.read_csv(path)
            self.assertEqual(list(frame.columns), CSVWriter.SUMMARY_HEADERS)
            self.assertEqual(frame['runs'].iloc[0], 1)
        finally:
            shutil.rmtree(temp_dir, ignore_errors=True)
