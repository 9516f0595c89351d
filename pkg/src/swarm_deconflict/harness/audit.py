"""Offline audit of a run trace: re-check committed timelines and the delay bound."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from ..collision.checker import check_pair
from ..models.core import AgentBox, TraceError, TrajectorySpline
from ..simnet.delay import DelayLedger, GuaranteeViolation, LedgerRecord, guarantee_monitor
from ..simnet.trace import read_trace


logger = logging.getLogger(__name__)

Timeline = List[Tuple[float, TrajectorySpline]]


@dataclass
class AuditReport:
    """Findings of verify_trace.

    Attributes:
        conflicts: First conflicting co-committed interval of every pair
        violations: Deliveries slower than the receiver's Delay Check window
        intervals_checked: Number of co-committed intervals re-checked
        max_commit_gaps: Largest position/velocity/acceleration jump at any commit
    """
    conflicts: List[Dict[str, Any]] = field(default_factory=list)
    violations: List[GuaranteeViolation] = field(default_factory=list)
    intervals_checked: int = 0
    commits: int = 0
    deliveries: int = 0
    max_commit_gaps: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    t_final: float = 0.0

    @property
    def monitor_clean(self) -> bool:
        return not self.violations

    @property
    def audit_clean(self) -> bool:
        return not self.conflicts

    @property
    def guarantee_holds(self) -> bool:
        """A clean delay monitor implies a clean audit"""
        return not self.monitor_clean or self.audit_clean

    def to_dict(self) -> Dict[str, Any]:
        return {
            "monitor_clean": self.monitor_clean,
            "audit_clean": self.audit_clean,
            "guarantee_holds": self.guarantee_holds,
            "conflicts": list(self.conflicts),
            "violations": [v.__dict__ for v in self.violations],
            "intervals_checked": self.intervals_checked,
            "commits": self.commits,
            "deliveries": self.deliveries,
            "max_commit_gaps": list(self.max_commit_gaps),
            "t_final": self.t_final,
        }


def _record_traj(record: Dict[str, Any]) -> TrajectorySpline:
    try:
        return TrajectorySpline.from_record(record["detail"]["traj"])
    except (KeyError, TypeError, ValueError) as e:
        raise TraceError(f"bad trajectory in {record['kind']} record at t={record.get('t')}: {e}") from e


def _co_committed(a: Timeline, b: Timeline, t_final: float) -> List[Tuple[float, float, TrajectorySpline, TrajectorySpline]]:
    """Intervals of [0, t_final] on which one trajectory of each timeline is committed"""
    cuts = sorted({0.0, t_final, *(t for t, _ in a), *(t for t, _ in b)})
    cuts = [t for t in cuts if 0.0 <= t <= t_final]
    starts_a = np.array([t for t, _ in a])
    starts_b = np.array([t for t, _ in b])
    out = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 1e-12:
            continue
        ia = max(int(np.searchsorted(starts_a, lo, side="right")) - 1, 0)
        ib = max(int(np.searchsorted(starts_b, lo, side="right")) - 1, 0)
        out.append((lo, hi, a[ia][1], b[ib][1]))
    return out


def verify_trace(source: Union[str, Path, Sequence[Dict[str, Any]]]) -> AuditReport:
    """Rebuild committed timelines and the delivery ledger from a trace and audit them.

    Args:
        source: Run directory, trace file, or in-memory trace records

    Raises:
        TraceError: if the trace is unreadable or incomplete
    """
    records = read_trace(source) if isinstance(source, (str, Path)) else list(source)

    starts = [r for r in records if r["kind"] == "run_start"]
    ends = [r for r in records if r["kind"] == "run_end"]
    if not starts:
        raise TraceError("trace has no run_start record")
    if not ends:
        raise TraceError("trace has no run_end record (run incomplete)")
    t_final = float(ends[-1]["t"])

    try:
        roster = starts[0]["detail"]["agents"]
        delay_checks = {a["id"]: float(a["delay_check"]) for a in roster}
        boxes = {a["id"]: AgentBox(tuple(a["box"])) for a in roster}
    except (KeyError, TypeError, ValueError) as e:
        raise TraceError(f"bad run_start record: {e}") from e

    timelines: Dict[str, Timeline] = {agent: [] for agent in delay_checks}
    obstacles: List[Tuple[TrajectorySpline, AgentBox]] = []
    ledger = DelayLedger()
    report = AuditReport(t_final=t_final)
    gaps = np.zeros(3)

    for record in records:
        kind, agent = record["kind"], record["agent"]
        if kind == "commit":
            if agent not in timelines:
                raise TraceError(f"commit by unknown agent {agent}")
            timelines[agent].append((float(record["t"]), _record_traj(record)))
            gaps = np.maximum(gaps, np.asarray(record["detail"].get("gaps", [0.0, 0.0, 0.0]), dtype=float))
            report.commits += 1
        elif kind == "obstacle":
            obstacles.append((_record_traj(record), AgentBox(tuple(record["detail"]["box"]))))
        elif kind == "deliver":
            detail = record["detail"]
            try:
                ledger.record(LedgerRecord(
                    sender=detail["sender"],
                    receiver=agent,
                    seq=int(detail["seq"]),
                    kind=detail["msg_kind"],
                    t_pub=float(detail["t_pub"]),
                    t_recv=float(record["t"]),
                ))
            except (KeyError, TypeError, ValueError) as e:
                raise TraceError(f"bad deliver record at t={record.get('t')}: {e}") from e

    for agent, timeline in timelines.items():
        if not timeline:
            raise TraceError(f"agent {agent} never committed a trajectory")

    ids = list(timelines)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            for lo, hi, ta, tb in _co_committed(timelines[a], timelines[b], t_final):
                report.intervals_checked += 1
                found = check_pair(ta, tb, boxes[a], boxes[b], (lo, hi))
                if found.in_conflict:
                    report.conflicts.append({
                        "pair": [a, b],
                        "t": found.first_overlap_time,
                        "window": [lo, hi],
                        "margin": found.min_margin,
                    })
                    break

    for traj, box in obstacles:
        fixed: Timeline = [(0.0, traj)]
        for a in ids:
            for lo, hi, ta, to in _co_committed(timelines[a], fixed, t_final):
                report.intervals_checked += 1
                found = check_pair(ta, to, boxes[a], box, (lo, hi))
                if found.in_conflict:
                    report.conflicts.append({
                        "pair": [a, traj.owner],
                        "t": found.first_overlap_time,
                        "window": [lo, hi],
                        "margin": found.min_margin,
                    })
                    break

    report.violations = guarantee_monitor(ledger, delay_checks)
    report.deliveries = len(ledger)
    report.max_commit_gaps = tuple(float(g) for g in gaps)  # type: ignore[assignment]

    if not report.guarantee_holds:
        logger.error(f"Clean delay monitor but {len(report.conflicts)} conflicts in committed timelines")
    logger.info(
        f"Audit: {report.intervals_checked} intervals, {len(report.conflicts)} conflicts, "
        f"{len(report.violations)} delay violations"
    )
    return report
