"""Tests for the event queue, delay models, trace files and the engine."""

import os
import tempfile
import unittest

import pytest

from swarm_deconflict.harness.scenario import build_engine
from swarm_deconflict.models.core import (
    AgentLayoutConfig,
    AgentSpec,
    ConfigError,
    DelayConfig,
    MessageKind,
    Phase,
    ScenarioConfig,
    TraceError,
    TrajMessage,
)
from swarm_deconflict.simnet.delay import (
    DelayLedger,
    DelayModel,
    LedgerRecord,
    guarantee_monitor,
    message_key,
)
from swarm_deconflict.simnet.engine import PlannerLatency, SimulationEngine
from swarm_deconflict.simnet.events import EventKind, EventQueue, first_tick_at_or_after, next_tick_after
from swarm_deconflict.simnet.trace import TraceWriter, encode_record, read_trace
from swarm_deconflict.trajectory.spline import hover_spline


def two_agent_config(**overrides):
    config = ScenarioConfig(
        t_end=12.0,
        start_jitter=0.0,
        agents=AgentLayoutConfig(layout="explicit", explicit=[
            AgentSpec("a", (-2.0, 0.0, 1.0), (2.0, 0.2, 1.0)),
            AgentSpec("b", (2.0, 0.0, 1.0), (-2.0, -0.2, 1.0)),
        ]),
    )
    for key, value in overrides.items():
        setattr(config, key, value)
    return config


def ledger_of(*deltas, receiver="b"):
    ledger = DelayLedger()
    for seq, delta in enumerate(deltas, 1):
        ledger.record(LedgerRecord("a", receiver, seq, "opt", 1.0, 1.0 + delta))
    return ledger


class TestEventQueue(unittest.TestCase):
    """Ordering of simultaneous events"""

    def test_pops_in_time_order(self):
        queue = EventQueue()
        for t in (0.3, 0.1, 0.2):
            queue.push(t, EventKind.AGENT_TICK, "a")
        self.assertEqual([queue.pop().t for _ in range(3)], [0.1, 0.2, 0.3])
        self.assertFalse(queue)

    def test_priority_at_equal_time(self):
        queue = EventQueue()
        queue.push(1.0, EventKind.AGENT_TICK, "a")
        queue.push(1.0, EventKind.CHECK_DONE, "a")
        queue.push(1.0, EventKind.DELIVERY, "a")
        queue.push(1.0, EventKind.PLANNER_DONE, "a")
        kinds = [queue.pop().kind for _ in range(4)]
        self.assertEqual(kinds, [EventKind.DELIVERY, EventKind.PLANNER_DONE, EventKind.CHECK_DONE, EventKind.AGENT_TICK])

    def test_insertion_order_breaks_ties(self):
        queue = EventQueue()
        queue.push(0.5, EventKind.DELIVERY, "a", "first")
        queue.push(0.5, EventKind.DELIVERY, "b", "second")
        self.assertEqual(queue.peek().payload, "first")
        self.assertEqual([queue.pop().payload, queue.pop().payload], ["first", "second"])


class TestTickGrid:
    """Rounding onto the agent tick grid"""

    def test_at_or_after(self):
        assert first_tick_at_or_after(0.0, 0.005) == 0.0
        assert first_tick_at_or_after(0.0051, 0.005) == pytest.approx(0.01)
        assert first_tick_at_or_after(0.16, 0.005) == pytest.approx(0.16)

    def test_strictly_after(self):
        assert next_tick_after(0.16, 0.005) == pytest.approx(0.165)
        assert next_tick_after(0.1601, 0.005) == pytest.approx(0.165)
        assert next_tick_after(0.0, 0.005) == pytest.approx(0.005)


class TestDelayModel:
    """Per-leg latency generation"""

    def test_fixed(self):
        model = DelayModel(DelayConfig(mode="fixed", introduced=0.2))
        assert model.sample("a", 1, "b", 3.0) == 0.2
        assert model.max_delay == 0.2

    def test_jitter_bounds_and_reproducibility(self):
        config = DelayConfig(mode="jitter", introduced=0.05, jitter_max=0.02)
        model = DelayModel(config, seed=5)
        samples = [model.sample("a", i, "b", 0.0) for i in range(500)]
        assert all(0.05 <= s <= 0.07 for s in samples)
        again = DelayModel(config, seed=5)
        assert [again.sample("a", i, "b", 0.0) for i in range(500)] == samples
        assert model.max_delay == pytest.approx(0.07)

    def test_truncated_exponential(self):
        model = DelayModel(DelayConfig(mode="jitter", introduced=0.0, jitter_max=0.03, distribution="exponential"), seed=1)
        samples = [model.sample("a", i, "b", 0.0) for i in range(500)]
        assert all(0.0 <= s <= 0.03 for s in samples)

    def test_scripted(self):
        config = DelayConfig(mode="scripted", script={message_key("a", 3, "b"): 1.25}, default_delay=0.01)
        model = DelayModel(config)
        assert model.sample("a", 3, "b", 1.0) == pytest.approx(0.25)
        assert model.sample("a", 3, "c", 1.0) == 0.01
        assert model.max_delay is None

    def test_scripted_before_publication(self):
        model = DelayModel(DelayConfig(mode="scripted", script={"a:1:b": 0.5}))
        with pytest.raises(ConfigError):
            model.sample("a", 1, "b", 1.0)

    def test_invalid_config(self):
        with pytest.raises(ConfigError):
            DelayModel(DelayConfig(mode="lossy"))
        with pytest.raises(ConfigError):
            DelayModel(DelayConfig(introduced=-0.1))
        with pytest.raises(ConfigError):
            DelayModel(DelayConfig(mode="jitter", distribution="pareto"))


class TestLedgerAndMonitor(unittest.TestCase):
    """Delay accounting and the delay-bound monitor"""

    def test_histogram_buckets(self):
        ledger = ledger_of(0.0, 0.004, 0.05, 0.052, 0.2)
        self.assertEqual(ledger.histogram(), {"0": 2, "50": 2, "200": 1})
        self.assertAlmostEqual(ledger.max_observed, 0.2)

    def test_monitor_clean_within_window(self):
        self.assertEqual(guarantee_monitor(ledger_of(0.05, 0.05), {"b": 0.125}), [])

    def test_monitor_names_slow_message(self):
        violations = guarantee_monitor(ledger_of(0.01, 0.3), {"b": 0.075})
        self.assertEqual(len(violations), 1)
        self.assertEqual(violations[0].seq, 2)
        self.assertAlmostEqual(violations[0].delta, 0.3)

    def test_monitor_empty_run(self):
        self.assertEqual(guarantee_monitor(DelayLedger(), {"b": 0.075}), [])


class TestTrace(unittest.TestCase):
    """JSON-lines trace files"""

    def test_write_and_read(self):
        trace = TraceWriter()
        trace.add(0.0, "run_start", None, seed=1)
        trace.add(0.5, "commit", "a", traj=hover_spline((0, 0, 0), 0.0, "a", 0).to_record())
        with tempfile.TemporaryDirectory() as temp_dir:
            trace.write(temp_dir)
            records = read_trace(temp_dir)
        self.assertEqual(records, trace.records)
        self.assertEqual(len(trace.of_kind("commit")), 1)

    def test_missing_file(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            with self.assertRaises(TraceError):
                read_trace(os.path.join(temp_dir, "trace.jsonl"))

    def test_corrupt_lines(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            path = os.path.join(temp_dir, "trace.jsonl")
            with open(path, "w") as f:
                f.write('{"t": 0.0, "kind": "run_start"}\n')
            with self.assertRaises(TraceError):
                read_trace(path)
            with open(path, "w") as f:
                f.write("not json\n")
            with self.assertRaises(TraceError):
                read_trace(path)


class TestSimulationEngine:
    """Event loop runs"""

    def test_no_agents(self):
        engine = SimulationEngine([], {}, DelayModel(DelayConfig()), PlannerLatency(0.02, 0.05))
        result = engine.run_until(10.0)
        assert result.status == "all_done"
        assert result.t_final == 0.0
        assert [r["kind"] for r in result.trace.records] == ["run_start", "run_end"]

    def test_broadcast_fans_out(self):
        config = two_agent_config(delay=DelayConfig(mode="fixed", introduced=0.2))
        config.agents.explicit.append(AgentSpec("c", (0.0, 3.0, 1.0), (0.0, -3.0, 1.0)))
        engine = build_engine(config)
        msg = TrajMessage(MessageKind.OPT, hover_spline((0, 0, 0), 0.0, "a", 1), "a", 1, 1.0)
        events = engine.broadcast(msg, 1.0)
        assert sorted(e.agent for e in events) == ["b", "c"]
        assert all(e.t == pytest.approx(1.2) for e in events)
        with pytest.raises(KeyError):
            engine.broadcast(TrajMessage(MessageKind.OPT, msg.traj, "zz", 1, 1.0), 1.0)

    def test_single_agent_reaches_goal(self):
        config = two_agent_config(t_end=20.0)
        config.agents.explicit = [AgentSpec("solo", (0.0, 0.0, 1.0), (4.0, 0.0, 1.0))]
        result = build_engine(config).run_until(config.t_end)
        assert result.status == "all_done"
        assert result.agent("solo").phase is Phase.DONE
        assert len(result.trace.of_kind("done")) == 1
        assert result.t_final == pytest.approx(result.agent("solo").state.traj_comm.t_end)

    def test_deliveries_never_precede_publication(self):
        config = two_agent_config(t_end=3.0, delay=DelayConfig(mode="jitter", introduced=0.05, jitter_max=0.02))
        result = build_engine(config).run_until(config.t_end)
        assert len(result.ledger) > 0
        for rec in result.ledger.records:
            assert 0.05 - 1e-12 <= rec.delta <= 0.07 + 1e-12

    def test_identical_runs_identical_traces(self):
        config = two_agent_config(t_end=4.0, delay=DelayConfig(mode="jitter", introduced=0.02, jitter_max=0.01))
        first = build_engine(config).run_until(config.t_end)
        second = build_engine(config).run_until(config.t_end)
        assert [encode_record(r) for r in first.trace.records] == [encode_record(r) for r in second.trace.records]
