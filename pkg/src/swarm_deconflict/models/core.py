"""Core data models for the deconfliction simulator."""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


Vector3 = Tuple[float, float, float]


class SwarmDeconflictError(ValueError):
    """Base class for all errors raised by this package"""


class TrajectoryError(SwarmDeconflictError):
    """Invalid trajectory construction or degenerate time horizon"""


class CollisionInputError(SwarmDeconflictError):
    """Degenerate collision-check window"""


class ConfigError(SwarmDeconflictError):
    """Scenario configuration failed validation.

    Attributes:
        field_name: Dotted path of the offending configuration field
    """

    def __init__(self, field_name: str, message: str):
        self.field_name = field_name
        super().__init__(f"{field_name}: {message}")


class TraceError(SwarmDeconflictError):
    """Trace file is corrupt or incomplete"""


class MessageKind(Enum):
    """Two-step publication: candidate first, committed afterwards"""
    OPT = "opt"
    COMM = "comm"


class Phase(Enum):
    """Protocol phase of one agent"""
    IDLE = "idle"
    OPTIMIZING = "optimizing"
    CHECKING = "checking"
    DELAY_CHECKING = "delay_checking"
    DONE = "done"


class Variant(Enum):
    """Deconfliction variants an agent can run"""
    RMADER = "rmader"
    RMADER_NO_CHECK = "nocheck"
    MADER_BASELINE = "mader"

    @classmethod
    def parse(cls, value: str) -> "Variant":
        for variant in cls:
            if value.lower() in (variant.value, variant.name.lower()):
                return variant
        raise ConfigError("variant", f"unknown variant '{value}'")


class DelayMode(Enum):
    """How per-message latency is generated"""
    FIXED = "fixed"
    FIXED_PLUS_JITTER = "jitter"
    SCRIPTED = "scripted"


def _as_vector(values: Any, name: str) -> np.ndarray:
    vec = np.asarray(values, dtype=float).reshape(-1)
    if vec.shape != (3,):
        raise ConfigError(name, f"expected 3 components, got {vec.shape[0]}")
    return vec


@dataclass(frozen=True)
class DynamicLimits:
    """Element-wise magnitude limits on velocity, acceleration and jerk.

    Attributes:
        v_max: Per-axis speed limit (m/s)
        a_max: Per-axis acceleration limit (m/s^2)
        j_max: Per-axis jerk limit (m/s^3)
    """
    v_max: float = 10.0
    a_max: float = 20.0
    j_max: float = 30.0

    def __post_init__(self):
        for name in ("v_max", "a_max", "j_max"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"limits.{name}", "must be strictly positive")

    def for_order(self, order: int) -> float:
        return (self.v_max, self.a_max, self.j_max)[order - 1]


@dataclass(frozen=True)
class AgentBox:
    """Collision-safety box around an agent or obstacle center"""
    half_extents: Vector3 = (0.25, 0.25, 0.25)

    def __post_init__(self):
        extents = tuple(float(v) for v in _as_vector(self.half_extents, "box"))
        if any(v <= 0 for v in extents):
            raise ConfigError("box", "all half extents must be > 0")
        object.__setattr__(self, "half_extents", extents)

    def combined(self, other: "AgentBox") -> np.ndarray:
        """Half extents of the Minkowski sum of two boxes"""
        return np.asarray(self.half_extents) + np.asarray(other.half_extents)


@dataclass(frozen=True)
class TrefoilParams:
    """Parameters of a trefoil-knot obstacle path"""
    center: Vector3
    scale: Vector3
    angular_rate: float
    phase: float = 0.0

    def __post_init__(self):
        center = tuple(float(v) for v in _as_vector(self.center, "trefoil.center"))
        scale = tuple(float(v) for v in _as_vector(self.scale, "trefoil.scale"))
        if any(v <= 0 for v in scale):
            raise ConfigError("trefoil.scale", "all components must be > 0")
        if self.angular_rate == 0:
            raise ConfigError("trefoil.angular_rate", "must be non-zero")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "scale", scale)

    @property
    def period(self) -> float:
        return 2.0 * np.pi / abs(self.angular_rate)


@dataclass(frozen=True, eq=False)
class TrajectorySpline:
    """Piecewise cubic 3-D trajectory in the Bernstein basis.

    Attributes:
        owner: Identifier of the agent or obstacle that owns the trajectory
        seq: Publication counter of the owner
        segments: Control points, shape (n_segments, 4, 3)
        knots: Absolute segment boundary times, shape (n_segments + 1,)
        terminal_hover: Position is held after the last knot
    """
    owner: str
    seq: int
    segments: np.ndarray
    knots: np.ndarray
    terminal_hover: bool = True

    def __post_init__(self):
        segments = np.array(self.segments, dtype=float)
        knots = np.array(self.knots, dtype=float).reshape(-1)
        if segments.ndim != 3 or segments.shape[1:] != (4, 3) or len(segments) < 1:
            raise TrajectoryError(
                f"segments must have shape (n>=1, 4, 3), got {segments.shape}"
            )
        if knots.shape != (len(segments) + 1,):
            raise TrajectoryError("knots must have exactly one more entry than segments")
        if not np.all(np.isfinite(segments)) or not np.all(np.isfinite(knots)):
            raise TrajectoryError("trajectory contains non-finite values")
        if np.any(np.diff(knots) <= 0):
            raise TrajectoryError("knots must be strictly increasing")
        if self.terminal_hover:
            last = segments[-1]
            dt = knots[-1] - knots[-2]
            v_end = 3.0 * (last[3] - last[2]) / dt
            a_end = 6.0 * (last[1] - 2.0 * last[2] + last[3]) / dt ** 2
            if np.linalg.norm(v_end) > 1e-9 or np.linalg.norm(a_end) > 1e-9:
                raise TrajectoryError(
                    "terminal hover requires zero final velocity and acceleration"
                )
        segments.setflags(write=False)
        knots.setflags(write=False)
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "knots", knots)

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def t_start(self) -> float:
        return float(self.knots[0])

    @property
    def t_end(self) -> float:
        return float(self.knots[-1])

    @property
    def durations(self) -> np.ndarray:
        return np.diff(self.knots)

    @property
    def final_position(self) -> np.ndarray:
        return self.segments[-1, 3].copy()

    def relabel(self, owner: str, seq: int) -> "TrajectorySpline":
        """Copy with a new owner and publication counter"""
        return replace(self, owner=owner, seq=seq)

    def same_as(self, other: "TrajectorySpline") -> bool:
        """Bit-for-bit equality of identity, knots and control points"""
        return (
            self.owner == other.owner
            and self.seq == other.seq
            and self.terminal_hover == other.terminal_hover
            and np.array_equal(self.knots, other.knots)
            and np.array_equal(self.segments, other.segments)
        )

    def to_record(self) -> Dict[str, Any]:
        """Flat record: control points row-major with the axis fastest"""
        return {
            "owner": self.owner,
            "seq": int(self.seq),
            "knots": [float(k) for k in self.knots],
            "control_points": [float(v) for v in self.segments.reshape(-1)],
            "terminal_hover": bool(self.terminal_hover),
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "TrajectorySpline":
        try:
            knots = np.asarray(record["knots"], dtype=float)
            ctrl = np.asarray(record["control_points"], dtype=float)
            segments = ctrl.reshape(len(knots) - 1, 4, 3)
            return cls(
                owner=str(record["owner"]),
                seq=int(record["seq"]),
                segments=segments,
                knots=knots,
                terminal_hover=bool(record["terminal_hover"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, TrajectoryError):
                raise
            raise TrajectoryError(f"malformed trajectory record: {e}") from e


@dataclass(frozen=True)
class LimitViolation:
    """One segment/axis/order whose derivative hull exceeds a limit"""
    segment: int
    order: int
    axis: int
    bound: float
    limit: float


@dataclass(frozen=True)
class ConflictReport:
    """Outcome of a conflict check between two trajectories"""
    in_conflict: bool
    min_margin: float
    pair: Tuple[str, str]
    first_overlap_time: Optional[float] = None

    @classmethod
    def clean(cls, pair: Tuple[str, str], min_margin: float = float("inf")) -> "ConflictReport":
        return cls(in_conflict=False, min_margin=min_margin, pair=pair)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "in_conflict": self.in_conflict,
            "first_overlap_time": self.first_overlap_time,
            "min_margin": self.min_margin if np.isfinite(self.min_margin) else None,
            "pair": list(self.pair),
        }


@dataclass(frozen=True)
class TrajMessage:
    """A broadcast trajectory: OPT before commitment, COMM after"""
    kind: MessageKind
    traj: TrajectorySpline
    sender: str
    seq: int
    t_pub: float

    @property
    def key(self) -> Tuple[str, int]:
        return (self.sender, self.seq)


@dataclass(frozen=True)
class PlanRequest:
    """Input of one planning call.

    The planner returns a candidate that equals ``prefix`` on
    [t_from, t_switch] and starts its new tail from ``start_state``.
    """
    owner: str
    traj_seq: int
    start_state: Tuple[np.ndarray, np.ndarray, np.ndarray]
    t_switch: float
    t_from: float
    goal: np.ndarray
    snapshot: "StoreSnapshot"
    limits: DynamicLimits
    horizon: float
    box: AgentBox
    prefix: TrajectorySpline
    iteration: int = 0


@dataclass
class AgentCounters:
    """Protocol counters of one agent"""
    rejections: int = 0
    commits: int = 0
    delay_check_aborts: int = 0
    planner_failures: int = 0
    consecutive_failures: int = 0
    stopped: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rejections": self.rejections,
            "commits": self.commits,
            "delay_check_aborts": self.delay_check_aborts,
            "planner_failures": self.planner_failures,
            "stopped": self.stopped,
        }


@dataclass
class AgentSpec:
    """One agent of a scenario (EXPLICIT layout or expanded CIRCLE layout)"""
    id: str
    start: Vector3
    goal: Vector3
    variant: Optional[str] = None
    delay_check: Optional[float] = None
    planner_latency: Optional[float] = None
    start_time: Optional[float] = None
    targets: Optional[List[Optional[Vector3]]] = None


@dataclass
class AgentLayoutConfig:
    """Agent count and start/goal layout"""
    count: int = 6
    layout: str = "circle"
    radius: float = 5.0
    height: float = 1.0
    explicit: List[AgentSpec] = field(default_factory=list)


@dataclass
class ObstacleConfig:
    """Randomized trefoil obstacles"""
    count: int = 0
    center_range: List[List[float]] = field(
        default_factory=lambda: [[-2.0, 2.0], [-2.0, 2.0], [0.5, 1.5]]
    )
    scale_range: List[float] = field(default_factory=lambda: [0.3, 0.8])
    rate_range: List[float] = field(default_factory=lambda: [0.2, 0.5])
    segments_per_period: int = 32
    half_extents: Vector3 = (0.2, 0.2, 0.2)


@dataclass
class DelayConfig:
    """Communication delay injection"""
    mode: str = "fixed"
    introduced: float = 0.0
    jitter_max: float = 0.0
    distribution: str = "uniform"
    exp_scale: float = 0.01
    script: Dict[str, float] = field(default_factory=dict)
    default_delay: float = 0.0


@dataclass
class PlannerConfig:
    """Sampling planner parameters"""
    candidates: int = 32
    horizon: float = 4.0
    detour_weight: float = 0.5
    lateral_fractions: List[float] = field(default_factory=lambda: [0.25, 0.5, 1.0])
    progress_fractions: List[float] = field(default_factory=lambda: [1.0, 0.6, 0.3])
    max_dilations: int = 25


@dataclass
class ScenarioConfig:
    """Complete description of one simulation run"""
    seed: int = 0
    t_end: float = 40.0
    tick: float = 0.005
    variant: str = "rmader"
    delay_check: float = 0.075
    check_latency: float = 0.005
    planner_latency_min: float = 0.02
    planner_latency_max: float = 0.05
    start_jitter: float = 0.1
    goal_tolerance: float = 0.1
    max_planner_failures: int = 50
    agents: AgentLayoutConfig = field(default_factory=AgentLayoutConfig)
    obstacles: ObstacleConfig = field(default_factory=ObstacleConfig)
    delay: DelayConfig = field(default_factory=DelayConfig)
    limits: DynamicLimits = field(default_factory=DynamicLimits)
    box: AgentBox = field(default_factory=AgentBox)
    planner: PlannerConfig = field(default_factory=PlannerConfig)

    def agent_specs(self) -> List[AgentSpec]:
        """Expand the layout into explicit agent specs"""
        layout = self.agents
        if layout.layout == "explicit":
            return list(layout.explicit)
        specs = []
        for i in range(layout.count):
            angle = 2.0 * np.pi * i / layout.count
            x = layout.radius * float(np.cos(angle))
            y = layout.radius * float(np.sin(angle))
            specs.append(AgentSpec(
                id=f"agent{i:02d}",
                start=(x, y, layout.height),
                goal=(-x, -y, layout.height),
            ))
        return specs


@dataclass
class AgentMetrics:
    """Per-agent performance metrics of one run"""
    agent: str
    done: bool
    travel_time: float
    travel_distance: float
    straight_distance: float
    num_stops: int
    stop_time: float
    jerk_integral: float
    rejections: int
    delay_check_aborts: int
    commits: int
    planner_failures: int

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class MetricsReport:
    """Metrics of one run"""
    collision_free: bool
    deadlock: bool
    status: str
    t_final: float
    agents: List[AgentMetrics]
    delay_histogram: Dict[str, int]
    max_delay: float
    rejections: int
    delay_check_aborts: int
    commits: int
    collisions: List[Dict[str, Any]] = field(default_factory=list)
    max_commit_gaps: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def rejections_per_commit(self) -> float:
        return (self.rejections + self.delay_check_aborts) / max(self.commits, 1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "collision_free": self.collision_free,
            "deadlock": self.deadlock,
            "status": self.status,
            "t_final": self.t_final,
            "agents": [a.to_dict() for a in self.agents],
            "delay_histogram": dict(self.delay_histogram),
            "max_delay": self.max_delay,
            "rejections": self.rejections,
            "delay_check_aborts": self.delay_check_aborts,
            "commits": self.commits,
            "collisions": list(self.collisions),
            "max_commit_gaps": list(self.max_commit_gaps),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MetricsReport":
        return cls(
            collision_free=data["collision_free"],
            deadlock=data["deadlock"],
            status=data["status"],
            t_final=data["t_final"],
            agents=[AgentMetrics(**a) for a in data["agents"]],
            delay_histogram=dict(data["delay_histogram"]),
            max_delay=data["max_delay"],
            rejections=data["rejections"],
            delay_check_aborts=data["delay_check_aborts"],
            commits=data["commits"],
            collisions=list(data.get("collisions", [])),
            max_commit_gaps=tuple(data.get("max_commit_gaps", (0.0, 0.0, 0.0))),
        )


@dataclass(frozen=True)
class CaseScript:
    """Scripted two-agent timing for one deconfliction case.

    Attributes:
        case_id: 1..12
        pub_phase: Phase of agent B during which A publishes ("O", "C", "DC")
        recv_phase: Phase of B during which B receives ("O", "C", "DC", "AFTER")
        constructible: Whether the timing satisfies delay <= delta_dc
        t_pub: A's publication time of its candidate
        t_recv: B's receive time of that candidate
        wraps: Receive falls in B's next iteration
        detail: Scripted delivery times and per-agent timing
    """
    case_id: int
    pub_phase: str
    recv_phase: str
    constructible: bool
    t_pub: float = 0.0
    t_recv: float = 0.0
    wraps: bool = False
    detail: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class CaseOutcome:
    """Which agent detected the conflict of a scripted case, and where"""
    case_id: int
    constructible: bool
    detector: Optional[str] = None
    phase: Optional[str] = None
    committed_conflict: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class StoreEntry:
    """One constraint held in a peer store"""
    owner: str
    kind: str
    traj: TrajectorySpline
    box: AgentBox


@dataclass(frozen=True)
class StoreSnapshot:
    """Immutable view of a peer store at one instant"""
    entries: Tuple[StoreEntry, ...] = ()
    version: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def owners(self) -> List[str]:
        return sorted({entry.owner for entry in self.entries})
