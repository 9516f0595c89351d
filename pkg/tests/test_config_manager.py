"""Tests for configuration management."""

import json
import os
import shutil
import tempfile
import unittest
from unittest import mock

import yaml

from swarm_deconflict.models.core import ConfigError, ScenarioConfig
from swarm_deconflict.utils.config_manager import (
    OUTPUT_DIR_ENV,
    ConfigManager,
    config_from_dict,
    config_to_dict,
    default_output_dir,
    preset_config,
)


class TestConfigManager(unittest.TestCase):
    """Test cases for ConfigManager"""

    def setUp(self):
        """Set up test fixtures"""
        self.temp_dir = tempfile.mkdtemp()
        self.config_file = os.path.join(self.temp_dir, 'scenario.json')

    def tearDown(self):
        """Clean up test fixtures"""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def _write_json(self, data):
        with open(self.config_file, 'w') as f:
            json.dump(data, f)

    def test_empty_file_gives_defaults(self):
        """An empty YAML file yields the default scenario"""
        path = os.path.join(self.temp_dir, 'scenario.yaml')
        open(path, 'w').close()
        config = ConfigManager(config_path=path).load_config()

        self.assertIsInstance(config, ScenarioConfig)
        self.assertEqual(config.t_end, 40.0)
        self.assertEqual(config.delay_check, 0.075)
        self.assertEqual(config.agents.count, 6)
        self.assertEqual(config.variant, "rmader")

    def test_missing_file(self):
        with self.assertRaises(ConfigError) as ctx:
            ConfigManager(config_path=os.path.join(self.temp_dir, 'absent.yaml')).load_config()
        self.assertEqual(ctx.exception.field_name, "config")

    def test_json_file_loading(self):
        """Explicit agents switch the layout to explicit"""
        self._write_json({
            "seed": 3,
            "delay": {"mode": "jitter", "introduced": 0.05, "jitter_max": 0.02},
            "agents": {"explicit": [
                {"id": "x", "start": [0, 0, 1], "goal": [4, 0, 1], "delay_check": 0.2},
                {"id": "y", "start": [4, 0, 1], "goal": [0, 0, 1], "variant": "mader"},
            ]},
        })
        config = ConfigManager(config_path=self.config_file).load_config()

        self.assertEqual(config.seed, 3)
        self.assertEqual(config.delay.mode, "jitter")
        self.assertEqual(config.delay.jitter_max, 0.02)
        self.assertEqual(config.agents.layout, "explicit")
        specs = config.agent_specs()
        self.assertEqual([s.id for s in specs], ["x", "y"])
        self.assertEqual(specs[0].goal, (4.0, 0.0, 1.0))
        self.assertEqual(specs[0].delay_check, 0.2)
        self.assertEqual(specs[1].variant, "mader")

    def test_yaml_file_loading(self):
        path = os.path.join(self.temp_dir, 'scenario.yaml')
        with open(path, 'w') as f:
            yaml.safe_dump({"t_end": 12.5, "limits": {"v_max": 3.0}, "box": [0.3, 0.3, 0.2]}, f)
        config = ConfigManager(config_path=path).load_config()

        self.assertEqual(config.t_end, 12.5)
        self.assertEqual(config.limits.v_max, 3.0)
        self.assertEqual(config.limits.a_max, 20.0)

    def test_unsupported_format(self):
        path = os.path.join(self.temp_dir, 'scenario.toml')
        open(path, 'w').close()
        with self.assertRaises(ConfigError):
            ConfigManager(config_path=path).load_config()

    def test_config_validation(self):
        """Invalid values are reported with their field names"""
        cases = [
            ({"delay_check": 0}, "delay_check"),
            ({"agents": []}, "agents"),
            ({"t_end": "long"}, "t_end"),
            ({"variant": "fast"}, "variant"),
            ({"delay": {"mode": "lossy"}}, "delay.mode"),
            ({"agents": {"explicit": [{"id": "x", "start": [0, 0]}]}}, "agents.explicit[0].goal"),
            ({"planner_latency": {"min": 0.1, "max": 0.05}}, "planner_latency.max"),
        ]
        for data, field_name in cases:
            self._write_json(data)
            with self.assertRaises(ConfigError) as ctx:
                ConfigManager(config_path=self.config_file).load_config()
            self.assertEqual(ctx.exception.field_name, field_name, data)

    def test_bad_vector(self):
        self._write_json({"agents": {"explicit": [{"id": "x", "start": [0, 0], "goal": [1, 0, 0]}]}})
        with self.assertRaises(ConfigError) as ctx:
            ConfigManager(config_path=self.config_file).load_config()
        self.assertEqual(ctx.exception.field_name, "agents.explicit[0].start")

    def test_config_template_generation(self):
        """Templates load back into the preset they were generated from"""
        for preset in ("default", "circle10", "obstacles"):
            path = os.path.join(self.temp_dir, f'{preset}.yaml')
            ConfigManager().save_config_template(path, preset)
            config = ConfigManager(config_path=path).load_config()
            self.assertEqual(config_to_dict(config), config_to_dict(preset_config(preset)))

        circle = preset_config("circle10")
        self.assertEqual(circle.agents.count, 10)
        self.assertEqual(circle.agents.radius, 10.0)
        with self.assertRaises(ConfigError):
            ConfigManager().save_config_template(os.path.join(self.temp_dir, 'x.yaml'), 'huge')

    def test_config_caching(self):
        """Test configuration caching"""
        self._write_json({"seed": 1})
        manager = ConfigManager(config_path=self.config_file)
        self.assertEqual(manager.load_config().seed, 1)

        self._write_json({"seed": 2})
        self.assertEqual(manager.load_config().seed, 1)
        self.assertEqual(manager.load_config(force_reload=True).seed, 2)
        manager.reset_config()
        self.assertEqual(manager.load_config().seed, 2)

    def test_update_config(self):
        """Dotted overrides are applied and re-validated"""
        self._write_json({"seed": 1})
        manager = ConfigManager(config_path=self.config_file)
        config = manager.update_config({"seed": 5, "delay.introduced": 0.1, "no.such.key": 1})
        self.assertEqual(config.seed, 5)
        self.assertEqual(config.delay.introduced, 0.1)
        with self.assertRaises(ConfigError):
            manager.update_config({"t_end": -1.0})


class TestConfigDict(unittest.TestCase):
    """Key/value tree conversion"""

    def test_round_trip(self):
        config = preset_config("obstacles")
        data = config_to_dict(config)
        self.assertEqual(config_to_dict(config_from_dict(data)), data)

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError):
            preset_config("huge")

    def test_output_dir_from_environment(self):
        with mock.patch.dict(os.environ, {OUTPUT_DIR_ENV: "/tmp/sims"}):
            self.assertEqual(default_output_dir(), "/tmp/sims")
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(default_output_dir(), "runs")
