"""Per-agent deconfliction state machine: Optimization, Check and Delay Check."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..collision.checker import check_against_store
from ..models.core import (
    AgentBox,
    AgentCounters,
    ConflictReport,
    DynamicLimits,
    MessageKind,
    Phase,
    PlanRequest,
    StoreSnapshot,
    TrajectorySpline,
    TrajMessage,
    Variant,
)
from ..trajectory.spline import continuity_gap, state_at
from .peer_store import PeerStore


logger = logging.getLogger(__name__)


@dataclass
class AgentState:
    """Protocol state of one agent.

    Attributes:
        id: Agent identifier
        goal: Goal position
        variant: Deconfliction variant this agent runs
        delay_check: Delay Check window length (s)
        box: Collision box of the agent
        traj_comm: Committed trajectory being executed
        store: Peer trajectories known to this agent
        phase: Current protocol phase
        traj_opt: Candidate under check, if any
        iteration: Planning iterations started so far
        dc_deadline: End of the running Delay Check
        t_switch: Time the current candidate takes over from traj_comm
    """
    id: str
    goal: np.ndarray
    variant: Variant
    delay_check: float
    box: AgentBox
    traj_comm: TrajectorySpline
    store: PeerStore
    phase: Phase = Phase.IDLE
    traj_opt: Optional[TrajectorySpline] = None
    counters: AgentCounters = field(default_factory=AgentCounters)
    iteration: int = 0
    msg_seq: int = 0
    traj_seq: int = 0
    dc_deadline: Optional[float] = None
    t_switch: Optional[float] = None
    t_iteration: float = 0.0
    check_report: Optional[ConflictReport] = None
    clean_version: Optional[int] = None


class DeconflictionAgent:
    """Drives one AgentState through the planning loop.

    The simulation engine calls the phase methods at the right times and
    collects what the agent wants to publish from ``take_outbox`` and what
    it wants to record from ``take_events``.
    """

    def __init__(
        self,
        state: AgentState,
        limits: DynamicLimits,
        horizon: float,
        switch_lead: float,
        goal_tolerance: float = 0.1,
        max_planner_failures: int = 50,
    ):
        self.state = state
        self.limits = limits
        self.horizon = horizon
        self.switch_lead = switch_lead
        self.goal_tolerance = goal_tolerance
        self.max_planner_failures = max_planner_failures
        self._outbox: List[TrajMessage] = []
        self._events: List[Dict[str, Any]] = []

    @property
    def id(self) -> str:
        return self.state.id

    @property
    def phase(self) -> Phase:
        return self.state.phase

    def take_outbox(self) -> List[TrajMessage]:
        out, self._outbox = self._outbox, []
        return out

    def take_events(self) -> List[Dict[str, Any]]:
        out, self._events = self._events, []
        return out

    def _emit(self, kind: str, t: float, **detail: Any) -> None:
        detail["iteration"] = self.state.iteration
        self._events.append({"t": t, "kind": kind, "agent": self.id, "detail": detail})

    def _broadcast(self, kind: MessageKind, traj: TrajectorySpline, t: float) -> None:
        st = self.state
        st.msg_seq += 1
        self._outbox.append(TrajMessage(kind=kind, traj=traj, sender=st.id, seq=st.msg_seq, t_pub=t))
        self._emit("broadcast", t, msg_kind=kind.value, seq=st.msg_seq, traj_seq=traj.seq)

    def _set_phase(self, phase: Phase, t: float) -> None:
        logger.debug(f"{self.id} t={t:.3f}: {self.state.phase.value} -> {phase.value}")
        self.state.phase = phase

    def publish_initial(self, t: float) -> None:
        """Broadcast the initial hover trajectory as committed"""
        self._emit("commit", t, traj=self.state.traj_comm.to_record(), initial=True, gaps=[0.0, 0.0, 0.0])
        self._broadcast(MessageKind.COMM, self.state.traj_comm, t)

    def on_message(self, msg: TrajMessage, t_now: float) -> bool:
        """Queue a received message; the store changes only on drain.

        Returns False for a duplicate. A done agent still acknowledges
        deliveries but keeps nothing.
        """
        return self.state.store.enqueue(msg)

    def drain_pending(self) -> int:
        return self.state.store.drain()

    def goal_reached(self) -> bool:
        traj = self.state.traj_comm
        return traj.terminal_hover and float(np.linalg.norm(traj.final_position - self.state.goal)) <= self.goal_tolerance

    def start_iteration(self, t_now: float) -> Optional[PlanRequest]:
        """Begin Optimization against a snapshot of the store.

        Returns:
            The planning request, or None when the agent has reached its goal
        """
        st = self.state
        if st.phase is not Phase.IDLE:
            raise RuntimeError(f"{st.id}: start_iteration in phase {st.phase.value}")
        if self.goal_reached():
            self._set_phase(Phase.DONE, t_now)
            st.store.close()
            self._emit("done", t_now, t_arrive=st.traj_comm.t_end)
            logger.info(f"{st.id} reached its goal at t={t_now:.3f}")
            return None

        st.iteration += 1
        st.traj_seq += 1
        self.drain_pending()
        snapshot = st.store.snapshot()
        st.t_iteration = t_now
        st.t_switch = t_now + self.switch_lead
        self._set_phase(Phase.OPTIMIZING, t_now)
        self._emit("opt_start", t_now, t_switch=st.t_switch, constraints=len(snapshot))
        return PlanRequest(
            owner=st.id,
            traj_seq=st.traj_seq,
            start_state=state_at(st.traj_comm, st.t_switch),
            t_switch=st.t_switch,
            t_from=t_now,
            goal=st.goal,
            snapshot=snapshot,
            limits=self.limits,
            horizon=self.horizon,
            box=st.box,
            prefix=st.traj_comm,
            iteration=st.iteration,
        )

    def finish_optimization(self, candidate: Optional[TrajectorySpline], t_now: float) -> None:
        """Planner result arrived; run the Check (or skip it for the no-check variant)"""
        st = self.state
        if st.phase is not Phase.OPTIMIZING:
            raise RuntimeError(f"{st.id}: finish_optimization in phase {st.phase.value}")

        if candidate is None:
            st.counters.planner_failures += 1
            st.counters.consecutive_failures += 1
            self._emit("opt_infeasible", t_now)
            if st.counters.consecutive_failures >= self.max_planner_failures and not st.counters.stopped:
                st.counters.stopped = True
                self._emit("stopped", t_now, failures=st.counters.consecutive_failures)
                logger.warning(f"{st.id} stopped after {st.counters.consecutive_failures} planner failures")
            self._set_phase(Phase.IDLE, t_now)
            return

        st.counters.consecutive_failures = 0
        st.traj_opt = candidate

        if st.variant is Variant.RMADER_NO_CHECK:
            self._enter_delay_check(t_now, clean_version=None)
            return

        self.drain_pending()
        snapshot = st.store.snapshot()
        st.check_report = check_against_store(candidate, snapshot, st.box, t_now)
        st.clean_version = snapshot.version
        self._set_phase(Phase.CHECKING, t_now)

    def complete_check(self, t_now: float) -> None:
        """Apply the Check verdict once the check latency has elapsed"""
        st = self.state
        if st.phase is not Phase.CHECKING:
            raise RuntimeError(f"{st.id}: complete_check in phase {st.phase.value}")
        report = st.check_report
        st.check_report = None

        if report is not None and report.in_conflict:
            st.counters.rejections += 1
            self._emit("check_reject", t_now, conflict=report.to_dict())
            self._discard(t_now)
            return

        if st.variant is Variant.MADER_BASELINE:
            self.commit(t_now)
            return
        self._enter_delay_check(t_now, clean_version=st.clean_version)

    def _enter_delay_check(self, t_now: float, clean_version: Optional[int]) -> None:
        st = self.state
        assert st.traj_opt is not None
        self._broadcast(MessageKind.OPT, st.traj_opt, t_now)
        st.dc_deadline = t_now + st.delay_check
        st.clean_version = clean_version
        self._set_phase(Phase.DELAY_CHECKING, t_now)
        self._emit("dc_start", t_now, deadline=st.dc_deadline)

    def delay_check_tick(self, t_now: float) -> None:
        """One Delay Check tick: re-check on store changes, commit at the deadline"""
        st = self.state
        if st.phase is not Phase.DELAY_CHECKING:
            raise RuntimeError(f"{st.id}: delay_check_tick in phase {st.phase.value}")
        assert st.traj_opt is not None and st.dc_deadline is not None

        self.drain_pending()
        if st.store.version != st.clean_version:
            snapshot: StoreSnapshot = st.store.snapshot()
            report = check_against_store(st.traj_opt, snapshot, st.box, t_now)
            if report.in_conflict:
                st.counters.delay_check_aborts += 1
                self._emit("dc_abort", t_now, conflict=report.to_dict())
                self._discard(t_now)
                return
            st.clean_version = snapshot.version

        if t_now >= st.dc_deadline - 1e-12:
            self.commit(t_now)

    def commit(self, t_now: float) -> None:
        """traj_comm <- traj_opt and broadcast it as committed"""
        st = self.state
        assert st.traj_opt is not None and st.t_switch is not None
        old, new = st.traj_comm, st.traj_opt
        gaps = continuity_gap(old, new, st.t_switch)
        st.traj_comm = new
        st.traj_opt = None
        st.dc_deadline = None
        st.counters.commits += 1
        self._emit("commit", t_now, traj=new.to_record(), t_switch=st.t_switch, gaps=list(gaps))
        self._broadcast(MessageKind.COMM, new, t_now)
        self._set_phase(Phase.IDLE, t_now)

    def _discard(self, t_now: float) -> None:
        st = self.state
        st.traj_opt = None
        st.dc_deadline = None
        st.clean_version = None
        self._set_phase(Phase.IDLE, t_now)
