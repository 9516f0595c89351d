"""Configuration management for simulation scenarios."""

import copy
import json
import logging
import os
from dataclasses import asdict
from typing import Any, Dict, List, Optional

import yaml

from ..models.core import (
    AgentBox,
    AgentLayoutConfig,
    AgentSpec,
    ConfigError,
    DelayConfig,
    DelayMode,
    DynamicLimits,
    ObstacleConfig,
    PlannerConfig,
    ScenarioConfig,
    Variant,
)


logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "SWARM_DECONFLICT_OUTPUT_DIR"

PRESETS: Dict[str, Dict[str, Any]] = {
    "default": {},
    "circle10": {"agents": {"count": 10, "radius": 10.0}, "t_end": 60.0},
    "circle20": {"agents": {"count": 10, "radius": 20.0}, "t_end": 90.0},
    "obstacles": {
        "agents": {"count": 10, "radius": 5.0},
        "obstacles": {"count": 10},
        "delay": {"mode": "fixed", "introduced": 0.05},
        "delay_check": 0.125,
    },
}


def default_output_dir() -> str:
    """Output directory from the environment, or ./runs"""
    return os.environ.get(OUTPUT_DIR_ENV, "runs")


def _deep_merge(base: Dict[str, Any], updates: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in updates.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def config_to_dict(config: ScenarioConfig) -> Dict[str, Any]:
    """Key/value tree in the config file layout"""
    data = {
        "seed": config.seed,
        "t_end": config.t_end,
        "tick": config.tick,
        "variant": config.variant,
        "delay_check": config.delay_check,
        "check_latency": config.check_latency,
        "planner_latency": {"min": config.planner_latency_min, "max": config.planner_latency_max},
        "start_jitter": config.start_jitter,
        "goal_tolerance": config.goal_tolerance,
        "max_planner_failures": config.max_planner_failures,
        "agents": {
            "count": config.agents.count,
            "layout": config.agents.layout,
            "radius": config.agents.radius,
            "height": config.agents.height,
            "explicit": [
                {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(spec).items() if v is not None}
                for spec in config.agents.explicit
            ],
        },
        "obstacles": {
            "count": config.obstacles.count,
            "center_range": [list(r) for r in config.obstacles.center_range],
            "scale_range": list(config.obstacles.scale_range),
            "rate_range": list(config.obstacles.rate_range),
            "segments_per_period": config.obstacles.segments_per_period,
            "box": list(config.obstacles.half_extents),
        },
        "delay": {
            "mode": config.delay.mode,
            "introduced": config.delay.introduced,
            "jitter_max": config.delay.jitter_max,
            "distribution": config.delay.distribution,
            "exp_scale": config.delay.exp_scale,
            "script": dict(config.delay.script),
            "default_delay": config.delay.default_delay,
        },
        "limits": {"v_max": config.limits.v_max, "a_max": config.limits.a_max, "j_max": config.limits.j_max},
        "box": list(config.box.half_extents),
        "planner": asdict(config.planner),
    }
    return data


def _vector(value: Any, field_name: str) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(field_name, "must be a list of 3 numbers")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(field_name, "must be a list of 3 numbers")


def _number(data: Dict[str, Any], key: str, default: Any, field_name: str, kind: type = float) -> Any:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field_name, f"must be a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(field_name, "must be an integer")
        return int(value)
    return float(value)


def _section(data: Dict[str, Any], key: str) -> Dict[str, Any]:
    value = data.get(key, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(key, "must be a mapping")
    return value


def _agent_spec(entry: Any, index: int) -> AgentSpec:
    name = f"agents.explicit[{index}]"
    if not isinstance(entry, dict):
        raise ConfigError(name, "must be a mapping")
    for key in ("id", "start", "goal"):
        if key not in entry:
            raise ConfigError(f"{name}.{key}", "is required")
    targets = entry.get("targets")
    if targets is not None:
        if not isinstance(targets, list):
            raise ConfigError(f"{name}.targets", "must be a list")
        targets = [None if t is None else _vector(t, f"{name}.targets[{i}]") for i, t in enumerate(targets)]
    optional = {}
    for key in ("delay_check", "planner_latency", "start_time"):
        if entry.get(key) is not None:
            optional[key] = _number(entry, key, None, f"{name}.{key}")
    return AgentSpec(
        id=str(entry["id"]),
        start=_vector(entry["start"], f"{name}.start"),
        goal=_vector(entry["goal"], f"{name}.goal"),
        variant=entry.get("variant"),
        targets=targets,
        **optional,
    )


def config_from_dict(data: Dict[str, Any]) -> ScenarioConfig:
    """Build and validate a ScenarioConfig from a key/value tree"""
    if not isinstance(data, dict):
        raise ConfigError("config", "must be a mapping")

    latency = _section(data, "planner_latency")
    agents = _section(data, "agents")
    obstacles = _section(data, "obstacles")
    delay = _section(data, "delay")
    limits = _section(data, "limits")
    planner = _section(data, "planner")
    defaults = ScenarioConfig()

    explicit = agents.get("explicit") or []
    if not isinstance(explicit, list):
        raise ConfigError("agents.explicit", "must be a list")

    script = delay.get("script") or {}
    if not isinstance(script, dict):
        raise ConfigError("delay.script", "must be a mapping of message key to delivery time")

    config = ScenarioConfig(
        seed=_number(data, "seed", defaults.seed, "seed", int),
        t_end=_number(data, "t_end", defaults.t_end, "t_end"),
        tick=_number(data, "tick", defaults.tick, "tick"),
        variant=str(data.get("variant", defaults.variant)),
        delay_check=_number(data, "delay_check", defaults.delay_check, "delay_check"),
        check_latency=_number(data, "check_latency", defaults.check_latency, "check_latency"),
        planner_latency_min=_number(latency, "min", defaults.planner_latency_min, "planner_latency.min"),
        planner_latency_max=_number(latency, "max", defaults.planner_latency_max, "planner_latency.max"),
        start_jitter=_number(data, "start_jitter", defaults.start_jitter, "start_jitter"),
        goal_tolerance=_number(data, "goal_tolerance", defaults.goal_tolerance, "goal_tolerance"),
        max_planner_failures=_number(
            data, "max_planner_failures", defaults.max_planner_failures, "max_planner_failures", int
        ),
        agents=AgentLayoutConfig(
            count=_number(agents, "count", defaults.agents.count, "agents.count", int),
            layout=str(agents.get("layout", "explicit" if explicit else defaults.agents.layout)),
            radius=_number(agents, "radius", defaults.agents.radius, "agents.radius"),
            height=_number(agents, "height", defaults.agents.height, "agents.height"),
            explicit=[_agent_spec(entry, i) for i, entry in enumerate(explicit)],
        ),
        obstacles=ObstacleConfig(
            count=_number(obstacles, "count", defaults.obstacles.count, "obstacles.count", int),
            center_range=obstacles.get("center_range", defaults.obstacles.center_range),
            scale_range=obstacles.get("scale_range", defaults.obstacles.scale_range),
            rate_range=obstacles.get("rate_range", defaults.obstacles.rate_range),
            segments_per_period=_number(
                obstacles, "segments_per_period", defaults.obstacles.segments_per_period,
                "obstacles.segments_per_period", int,
            ),
            half_extents=_vector(obstacles.get("box", defaults.obstacles.half_extents), "obstacles.box"),
        ),
        delay=DelayConfig(
            mode=str(delay.get("mode", defaults.delay.mode)),
            introduced=_number(delay, "introduced", defaults.delay.introduced, "delay.introduced"),
            jitter_max=_number(delay, "jitter_max", defaults.delay.jitter_max, "delay.jitter_max"),
            distribution=str(delay.get("distribution", defaults.delay.distribution)),
            exp_scale=_number(delay, "exp_scale", defaults.delay.exp_scale, "delay.exp_scale"),
            script={str(k): float(v) for k, v in script.items()},
            default_delay=_number(delay, "default_delay", defaults.delay.default_delay, "delay.default_delay"),
        ),
        limits=DynamicLimits(
            v_max=_number(limits, "v_max", defaults.limits.v_max, "limits.v_max"),
            a_max=_number(limits, "a_max", defaults.limits.a_max, "limits.a_max"),
            j_max=_number(limits, "j_max", defaults.limits.j_max, "limits.j_max"),
        ),
        box=AgentBox(_vector(data.get("box", defaults.box.half_extents), "box")),
        planner=PlannerConfig(
            candidates=_number(planner, "candidates", defaults.planner.candidates, "planner.candidates", int),
            horizon=_number(planner, "horizon", defaults.planner.horizon, "planner.horizon"),
            detour_weight=_number(planner, "detour_weight", defaults.planner.detour_weight, "planner.detour_weight"),
            lateral_fractions=list(planner.get("lateral_fractions", defaults.planner.lateral_fractions)),
            progress_fractions=list(planner.get("progress_fractions", defaults.planner.progress_fractions)),
            max_dilations=_number(planner, "max_dilations", defaults.planner.max_dilations, "planner.max_dilations", int),
        ),
    )
    validate_config(config)
    return config


def _range_pair(value: Any, field_name: str) -> None:
    if not isinstance(value, (list, tuple)) or len(value) != 2 or not value[0] <= value[1]:
        raise ConfigError(field_name, "must be a [low, high] pair with low <= high")


def validate_config(config: ScenarioConfig) -> None:
    """Check value ranges of a ScenarioConfig

    Raises:
        ConfigError: naming the first offending field
    """
    if not config.t_end > 0:
        raise ConfigError("t_end", "must be > 0")
    if not config.tick > 0:
        raise ConfigError("tick", "must be > 0")
    if not config.delay_check > 0:
        raise ConfigError("delay_check", "must be > 0")
    if config.check_latency < 0:
        raise ConfigError("check_latency", "must be >= 0")
    if config.planner_latency_min < 0:
        raise ConfigError("planner_latency.min", "must be >= 0")
    if config.planner_latency_max < config.planner_latency_min:
        raise ConfigError("planner_latency.max", "must be >= planner_latency.min")
    if config.start_jitter < 0:
        raise ConfigError("start_jitter", "must be >= 0")
    if not config.goal_tolerance > 0:
        raise ConfigError("goal_tolerance", "must be > 0")
    if config.max_planner_failures < 1:
        raise ConfigError("max_planner_failures", "must be >= 1")
    Variant.parse(config.variant)

    agents = config.agents
    if agents.layout not in ("circle", "explicit"):
        raise ConfigError("agents.layout", f"unknown layout '{agents.layout}'")
    if agents.count < 0:
        raise ConfigError("agents.count", "must be >= 0")
    if agents.layout == "circle" and not agents.radius > 0:
        raise ConfigError("agents.radius", "must be > 0")
    ids: List[str] = []
    for i, spec in enumerate(agents.explicit):
        if spec.variant is not None:
            try:
                Variant.parse(spec.variant)
            except ConfigError:
                raise ConfigError(f"agents.explicit[{i}].variant", f"unknown variant '{spec.variant}'")
        if spec.delay_check is not None and not spec.delay_check > 0:
            raise ConfigError(f"agents.explicit[{i}].delay_check", "must be > 0")
        if spec.id in ids:
            raise ConfigError(f"agents.explicit[{i}].id", f"duplicate agent id '{spec.id}'")
        ids.append(spec.id)

    obstacles = config.obstacles
    if obstacles.count < 0:
        raise ConfigError("obstacles.count", "must be >= 0")
    if obstacles.segments_per_period < 1:
        raise ConfigError("obstacles.segments_per_period", "must be >= 1")
    if len(obstacles.center_range) != 3:
        raise ConfigError("obstacles.center_range", "must hold one [low, high] pair per axis")
    for axis, pair in enumerate(obstacles.center_range):
        _range_pair(pair, f"obstacles.center_range[{axis}]")
    _range_pair(obstacles.scale_range, "obstacles.scale_range")
    _range_pair(obstacles.rate_range, "obstacles.rate_range")
    if obstacles.count and not obstacles.scale_range[0] > 0:
        raise ConfigError("obstacles.scale_range", "must be > 0")
    if obstacles.count and not obstacles.rate_range[0] > 0:
        raise ConfigError("obstacles.rate_range", "must be > 0")
    AgentBox(obstacles.half_extents)

    delay = config.delay
    try:
        DelayMode(delay.mode)
    except ValueError:
        raise ConfigError("delay.mode", f"unknown delay mode '{delay.mode}'")
    if delay.introduced < 0:
        raise ConfigError("delay.introduced", "must be >= 0")
    if delay.jitter_max < 0:
        raise ConfigError("delay.jitter_max", "must be >= 0")
    if delay.distribution not in ("uniform", "exponential"):
        raise ConfigError("delay.distribution", f"unknown distribution '{delay.distribution}'")
    if not delay.exp_scale > 0:
        raise ConfigError("delay.exp_scale", "must be > 0")
    if delay.default_delay < 0:
        raise ConfigError("delay.default_delay", "must be >= 0")

    planner = config.planner
    if planner.candidates < 1:
        raise ConfigError("planner.candidates", "must be >= 1")
    if not planner.horizon > 0:
        raise ConfigError("planner.horizon", "must be > 0")
    if planner.detour_weight < 0:
        raise ConfigError("planner.detour_weight", "must be >= 0")
    if planner.max_dilations < 0:
        raise ConfigError("planner.max_dilations", "must be >= 0")
    if not planner.progress_fractions:
        raise ConfigError("planner.progress_fractions", "must not be empty")


class ConfigManager:
    """Manages loading and validation of scenario configuration"""

    def __init__(self, config_path: Optional[str] = None):
        """Initialize configuration manager

        Args:
            config_path: Path to configuration file. If None, searches for default locations.
        """
        self.config_path = config_path
        self._config_cache: Optional[ScenarioConfig] = None

    def load_config(self, force_reload: bool = False) -> ScenarioConfig:
        """Load scenario configuration from file or return default

        Args:
            force_reload: Force reload from file even if cached

        Returns:
            ScenarioConfig with loaded or default configuration

        Raises:
            ConfigError: If the file content fails validation
        """
        if self._config_cache is not None and not force_reload:
            return self._config_cache

        config_data = self._load_config_file()
        self._config_cache = config_from_dict(config_data)
        logger.info(f"Configuration loaded successfully from {self.config_path or 'defaults'}")
        return self._config_cache

    def _load_config_file(self) -> Dict[str, Any]:
        """Load configuration from file

        Returns:
            Dictionary with configuration data or empty dict if no file found
        """
        config_file = self._find_config_file()

        if not config_file:
            logger.info("No configuration file found, using defaults")
            return {}
        if not os.path.exists(config_file):
            raise ConfigError("config", f"file not found: {config_file}")

        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                if config_file.endswith('.json'):
                    data = json.load(f)
                elif config_file.endswith(('.yml', '.yaml')):
                    data = yaml.safe_load(f)
                else:
                    raise ConfigError("config", f"unsupported config file format: {config_file}")
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ConfigError("config", f"cannot parse {config_file}: {e}") from e

        data = data or {}
        self._validate_config_data(data)
        self.config_path = config_file
        logger.info(f"Configuration loaded from {config_file}")
        return data

    def _find_config_file(self) -> Optional[str]:
        """Find configuration file in standard locations

        Returns:
            Path to configuration file or None if not found
        """
        if self.config_path:
            return self.config_path

        search_paths = [
            'scenario.yaml',
            'scenario.yml',
            'scenario.json',
            'config/scenario.yaml',
            'config/scenario.yml',
            'config/scenario.json',
            os.path.expanduser('~/.swarm_deconflict/scenario.yaml'),
            os.path.expanduser('~/.swarm_deconflict/scenario.json'),
        ]

        for path in search_paths:
            if os.path.exists(path):
                return path

        return None

    def _validate_config_data(self, data: Dict[str, Any]) -> None:
        """Validate configuration data structure

        Args:
            data: Configuration data to validate

        Raises:
            ConfigError: If configuration data is invalid
        """
        if not isinstance(data, dict):
            raise ConfigError("config", "configuration must be a mapping")

        known = set(config_to_dict(ScenarioConfig()))
        for key in data:
            if key not in known:
                logger.warning(f"Unknown configuration key: {key}")

        for section in ('planner_latency', 'agents', 'obstacles', 'delay', 'limits', 'planner'):
            if section in data and not isinstance(data[section], dict):
                raise ConfigError(section, "must be a mapping")

    def save_config_template(self, output_path: str, preset: str = "default") -> None:
        """Generate and save a configuration file template

        Args:
            output_path: Path where to save the template
            preset: One of PRESETS
        """
        if preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset '{preset}', choose from {sorted(PRESETS)}")
        template = _deep_merge(config_to_dict(ScenarioConfig()), PRESETS[preset])

        output_dir = os.path.dirname(output_path)
        if output_dir:
            os.makedirs(output_dir, exist_ok=True)

        with open(output_path, 'w', encoding='utf-8') as f:
            if output_path.endswith(('.yml', '.yaml')):
                yaml.safe_dump(template, f, default_flow_style=False, indent=2, sort_keys=False)
            else:
                json.dump(template, f, indent=2)

        logger.info(f"Configuration template ({preset}) saved to {output_path}")

    def update_config(self, updates: Dict[str, Any]) -> ScenarioConfig:
        """Apply dotted-key overrides (e.g. ``delay.introduced``) and re-validate

        Args:
            updates: Dictionary of configuration updates
        """
        config = self.load_config()
        data = config_to_dict(config)
        nested: Dict[str, Any] = {}
        for key, value in updates.items():
            parts = key.split('.')
            node = data
            for part in parts[:-1]:
                node = node.get(part) if isinstance(node, dict) else None
            if not isinstance(node, dict) or parts[-1] not in node:
                logger.warning(f"Unknown configuration key: {key}")
                continue
            target = nested
            for part in parts[:-1]:
                target = target.setdefault(part, {})
            target[parts[-1]] = value
            logger.debug(f"Updated configuration: {key} = {value}")

        self._config_cache = config_from_dict(_deep_merge(data, nested))
        return self._config_cache

    def reset_config(self) -> None:
        """Reset configuration cache, forcing reload on next access"""
        self._config_cache = None
        logger.debug("Configuration cache reset")


def preset_config(name: str) -> ScenarioConfig:
    """ScenarioConfig of a named preset"""
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset '{name}', choose from {sorted(PRESETS)}")
    return config_from_dict(PRESETS[name])


def get_default_config_manager() -> ConfigManager:
    """Get a default configuration manager instance

    Returns:
        ConfigManager instance with default settings
    """
    return ConfigManager()
