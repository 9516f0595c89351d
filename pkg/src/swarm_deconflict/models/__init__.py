"""Data models and structures"""

from .core import (
    AgentBox,
    AgentCounters,
    AgentLayoutConfig,
    AgentMetrics,
    AgentSpec,
    CaseOutcome,
    CaseScript,
    CollisionInputError,
    ConfigError,
    ConflictReport,
    DelayConfig,
    DelayMode,
    DynamicLimits,
    LimitViolation,
    MessageKind,
    MetricsReport,
    ObstacleConfig,
    Phase,
    PlannerConfig,
    PlanRequest,
    ScenarioConfig,
    StoreEntry,
    StoreSnapshot,
    SwarmDeconflictError,
    TraceError,
    TrajectoryError,
    TrajectorySpline,
    TrajMessage,
    TrefoilParams,
    Variant,
)

__all__ = [
    'AgentBox',
    'AgentCounters',
    'AgentLayoutConfig',
    'AgentMetrics',
    'AgentSpec',
    'CaseOutcome',
    'CaseScript',
    'CollisionInputError',
    'ConfigError',
    'ConflictReport',
    'DelayConfig',
    'DelayMode',
    'DynamicLimits',
    'LimitViolation',
    'MessageKind',
    'MetricsReport',
    'ObstacleConfig',
    'Phase',
    'PlannerConfig',
    'PlanRequest',
    'ScenarioConfig',
    'StoreEntry',
    'StoreSnapshot',
    'SwarmDeconflictError',
    'TraceError',
    'TrajectoryError',
    'TrajectorySpline',
    'TrajMessage',
    'TrefoilParams',
    'Variant',
]
