"""Tests for the command-line interface."""

import json
import os
import unittest

import click
import pytest
import yaml
from click.testing import CliRunner

from swarm_deconflict.cli import cli, parse_delays_ms, parse_seeds, parse_variants


SMALL_SCENARIO = {
    "t_end": 5.0,
    "agents": {"explicit": [
        {"id": "a", "start": [-2.0, 0.0, 1.0], "goal": [2.0, 0.3, 1.0]},
        {"id": "b", "start": [2.0, 0.0, 1.0], "goal": [-2.0, -0.3, 1.0]},
    ]},
}


def write_yaml(path, data):
    with open(path, "w") as f:
        yaml.safe_dump(data, f)


class TestParsers:
    """Option value parsing"""

    def test_seed_range(self):
        assert parse_seeds("0..3") == [0, 1, 2, 3]
        assert parse_seeds("1,4, 9") == [1, 4, 9]
        assert parse_seeds("") == []

    @pytest.mark.parametrize("value", ["3..1", "a..b", "1;2"])
    def test_bad_seeds(self, value):
        with pytest.raises(click.BadParameter):
            parse_seeds(value)

    def test_delays_in_seconds(self):
        assert parse_delays_ms("0,50,300") == [0.0, 0.05, 0.3]
        with pytest.raises(click.BadParameter):
            parse_delays_ms("-5")
        with pytest.raises(click.BadParameter):
            parse_delays_ms("fast")

    def test_variants(self):
        assert parse_variants("rmader,MADER_BASELINE,nocheck") == ["rmader", "mader", "nocheck"]
        with pytest.raises(click.BadParameter):
            parse_variants("fast")


class TestCommands(unittest.TestCase):
    """Commands run in an isolated directory"""

    def setUp(self):
        self.runner = CliRunner()

    def test_init_config(self):
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(cli, ['--log-dir', 'logs', 'init-config', '--preset', 'circle10', '-o', 'c.yaml'])
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("✓", result.output)
            with open('c.yaml') as f:
                data = yaml.safe_load(f)
            self.assertEqual(data['agents']['count'], 10)

    def test_cases_json(self):
        result = self.runner.invoke(cli, ['cases', '--json'])
        self.assertEqual(result.exit_code, 0, result.output)
        start = result.output.index('[')
        outcomes = json.loads(result.output[start:])
        self.assertEqual(len(outcomes), 12)
        self.assertFalse(outcomes[3]['constructible'])
        self.assertEqual((outcomes[11]['detector'], outcomes[11]['phase']), ("A", "DC"))

    def test_cases_rejects_bad_window(self):
        result = self.runner.invoke(cli, ['cases', '--delay-check', '0'])
        self.assertEqual(result.exit_code, 1)

    def test_run_then_audit(self):
        with self.runner.isolated_filesystem():
            write_yaml('scenario.yaml', SMALL_SCENARIO)
            result = self.runner.invoke(cli, ['--log-dir', 'logs', 'run', '-c', 'scenario.yaml', '--seed', '2', '-o', 'out'])
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("Collision free: True", result.output)
            self.assertTrue(os.path.exists(os.path.join('out', 'trace.jsonl')))

            result = self.runner.invoke(cli, ['--log-dir', 'logs', 'audit', '--trace', 'out'])
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("✓ Audit clean", result.output)

    def test_run_invalid_config(self):
        with self.runner.isolated_filesystem():
            write_yaml('scenario.yaml', {"delay_check": -1})
            result = self.runner.invoke(cli, ['--log-dir', 'logs', 'run', '-c', 'scenario.yaml'])
            self.assertEqual(result.exit_code, 1)
            self.assertIn("delay_check", result.output)

    def test_audit_missing_trace(self):
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(cli, ['--log-dir', 'logs', 'audit', '--trace', 'nowhere'])
            self.assertEqual(result.exit_code, 2)

    def test_campaign_empty_seeds(self):
        with self.runner.isolated_filesystem():
            write_yaml('scenario.yaml', SMALL_SCENARIO)
            result = self.runner.invoke(cli, [
                '--log-dir', 'logs', 'campaign', '-c', 'scenario.yaml',
                '--seeds', '', '--delays', '0', '--variants', 'rmader', '-o', 'camp',
            ])
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("0 runs", result.output)
            self.assertTrue(os.path.exists(os.path.join('camp', 'runs.csv')))
