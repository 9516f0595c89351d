"""Discrete-event engine driving agents, planners and the message bus."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..deconfliction.agent import DeconflictionAgent
from ..models.core import AgentBox, Phase, TrajectorySpline, TrajMessage
from ..planner.base import TrajectoryPlanner
from .delay import DelayLedger, DelayModel, LedgerRecord
from .events import Event, EventKind, EventQueue, first_tick_at_or_after, next_tick_after
from .trace import TraceWriter


logger = logging.getLogger(__name__)


class PlannerLatency:
    """Optimization latency per planning call: uniform in [low, high] or a per-agent override"""

    def __init__(self, low: float, high: float, overrides: Optional[Dict[str, float]] = None, seed: int = 0):
        self.low = low
        self.high = high
        self.overrides = dict(overrides or {})
        self._rng = np.random.default_rng([seed, 1])

    @property
    def upper_bound(self) -> float:
        return max([self.high, *self.overrides.values()])

    def sample(self, agent: str) -> float:
        if agent in self.overrides:
            return self.overrides[agent]
        if self.high <= self.low:
            return self.low
        return float(self._rng.uniform(self.low, self.high))


@dataclass
class RunResult:
    """Final world state of one run"""
    status: str
    t_final: float
    agents: List[DeconflictionAgent]
    trace: TraceWriter
    ledger: DelayLedger
    timelines: Dict[str, List[Tuple[float, TrajectorySpline]]]
    obstacles: List[Tuple[TrajectorySpline, AgentBox]] = field(default_factory=list)

    @property
    def delay_checks(self) -> Dict[str, float]:
        return {a.id: a.state.delay_check for a in self.agents}

    @property
    def boxes(self) -> Dict[str, AgentBox]:
        return {a.id: a.state.box for a in self.agents}

    def agent(self, agent_id: str) -> DeconflictionAgent:
        for agent in self.agents:
            if agent.id == agent_id:
                return agent
        raise KeyError(agent_id)


class SimulationEngine:
    """Single-threaded event loop; (config, seed) fully determine the trace"""

    def __init__(
        self,
        agents: Sequence[DeconflictionAgent],
        planners: Dict[str, TrajectoryPlanner],
        delay_model: DelayModel,
        latency: PlannerLatency,
        tick: float = 0.005,
        check_latency: float = 0.005,
        obstacles: Sequence[Tuple[TrajectorySpline, AgentBox]] = (),
        start_times: Optional[Dict[str, float]] = None,
        seed: int = 0,
    ):
        self.agents = list(agents)
        self.planners = planners
        self.delay_model = delay_model
        self.latency = latency
        self.tick = tick
        self.check_latency = check_latency
        self.obstacles = list(obstacles)
        self.start_times = dict(start_times or {})
        self.seed = seed

        self.queue = EventQueue()
        self.trace = TraceWriter()
        self.ledger = DelayLedger()
        self.timelines: Dict[str, List[Tuple[float, TrajectorySpline]]] = {a.id: [] for a in self.agents}
        self.now = 0.0
        self._by_id = {a.id: a for a in self.agents}
        self._index = {a.id: i for i, a in enumerate(self.agents)}
        self._tokens: Dict[str, int] = {a.id: 0 for a in self.agents}

    def broadcast(self, msg: TrajMessage, t_pub: float) -> List[Event]:
        """One delivery event per other agent, each with its own sampled delay"""
        if msg.sender not in self._by_id:
            raise KeyError(f"unknown sender {msg.sender}")
        events = []
        for receiver in self.agents:
            if receiver.id == msg.sender:
                continue
            delay = self.delay_model.sample(msg.sender, msg.seq, receiver.id, t_pub)
            events.append(self.queue.push(t_pub + delay, EventKind.DELIVERY, receiver.id, msg))
        return events

    def _schedule_tick(self, agent: DeconflictionAgent, t: float) -> None:
        self._tokens[agent.id] += 1
        self.queue.push(t, EventKind.AGENT_TICK, agent.id, self._tokens[agent.id])

    def _flush(self, agent: DeconflictionAgent) -> None:
        for record in agent.take_events():
            if record["kind"] == "commit":
                self.timelines[agent.id].append((record["t"], agent.state.traj_comm))
            self.trace.records.append(record)
        for msg in agent.take_outbox():
            self.broadcast(msg, msg.t_pub)

    def _follow_up(self, agent: DeconflictionAgent, t: float, entered: Phase) -> None:
        phase = agent.phase
        if phase is Phase.IDLE:
            self._schedule_tick(agent, next_tick_after(t, self.tick))
        elif phase is Phase.CHECKING:
            self.queue.push(t + self.check_latency, EventKind.CHECK_DONE, agent.id)
        elif phase is Phase.DELAY_CHECKING:
            immediate = entered is not Phase.DELAY_CHECKING
            self._schedule_tick(agent, t if immediate else next_tick_after(t, self.tick))

    def _start(self) -> None:
        self.trace.add(0.0, "run_start", None, seed=self.seed, tick=self.tick, agents=[
            {
                "id": a.id,
                "variant": a.state.variant.value,
                "delay_check": a.state.delay_check,
                "box": list(a.state.box.half_extents),
                "goal": [float(v) for v in a.state.goal],
            }
            for a in self.agents
        ])
        for traj, box in self.obstacles:
            self.trace.add(0.0, "obstacle", traj.owner, traj=traj.to_record(), box=list(box.half_extents))
            for agent in self.agents:
                agent.state.store.add_obstacle(traj, box)
        for agent in self.agents:
            agent.publish_initial(0.0)
            self._flush(agent)
            start = first_tick_at_or_after(self.start_times.get(agent.id, 0.0), self.tick)
            self._schedule_tick(agent, start)

    def _dispatch(self, event: Event) -> None:
        t = event.t
        agent = self._by_id[event.agent]  # type: ignore[index]

        if event.kind is EventKind.DELIVERY:
            msg: TrajMessage = event.payload
            if agent.on_message(msg, t):
                self.ledger.record(LedgerRecord(msg.sender, agent.id, msg.seq, msg.kind.value, msg.t_pub, t))
                self.trace.add(t, "deliver", agent.id, sender=msg.sender, seq=msg.seq,
                               msg_kind=msg.kind.value, t_pub=msg.t_pub, delta=t - msg.t_pub)
            return

        entered = agent.phase
        if event.kind is EventKind.AGENT_TICK:
            if event.payload != self._tokens[agent.id]:
                return
            if entered is Phase.IDLE:
                request = agent.start_iteration(t)
                self._flush(agent)
                if request is not None:
                    seed = [self.seed, self._index[agent.id], request.iteration]
                    candidate = self.planners[agent.id].plan(request, seed)
                    done_at = t + self.latency.sample(agent.id)
                    self.queue.push(done_at, EventKind.PLANNER_DONE, agent.id, candidate)
                return
            if entered is Phase.DELAY_CHECKING:
                agent.delay_check_tick(t)
        elif event.kind is EventKind.PLANNER_DONE:
            agent.finish_optimization(event.payload, t)
        elif event.kind is EventKind.CHECK_DONE:
            agent.complete_check(t)

        self._flush(agent)
        self._follow_up(agent, t, entered)

    def run_until(self, t_end: float) -> RunResult:
        """Process events in order until t_end, all agents done, or no events left"""
        self._start()
        status = "exhausted"
        while True:
            if all(a.phase is Phase.DONE for a in self.agents):
                status = "all_done"
                # Committed trajectories may still be flying to their goals
                arrival = max((a.state.traj_comm.t_end for a in self.agents), default=self.now)
                self.now = min(t_end, max(self.now, arrival))
                break
            head = self.queue.peek()
            if head is None:
                break
            if head.t > t_end:
                status = "completed"
                self.now = t_end
                break
            event = self.queue.pop()
            self.now = event.t
            self._dispatch(event)

        self.trace.add(self.now, "run_end", None, status=status)
        logger.info(f"Run ended at t={self.now:.3f} with status {status}")
        return RunResult(
            status=status,
            t_final=self.now,
            agents=self.agents,
            trace=self.trace,
            ledger=self.ledger,
            timelines=self.timelines,
            obstacles=self.obstacles,
        )
