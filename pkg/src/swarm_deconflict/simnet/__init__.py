"""Discrete-event simulation with delayed broadcast messaging"""

from .delay import (
    DelayLedger,
    DelayModel,
    GuaranteeViolation,
    LedgerRecord,
    guarantee_monitor,
    message_key,
)
from .engine import PlannerLatency, RunResult, SimulationEngine
from .events import Event, EventKind, EventQueue, first_tick_at_or_after, next_tick_after
from .trace import TraceWriter, iter_trace, read_trace

__all__ = [
    'DelayLedger',
    'DelayModel',
    'Event',
    'EventKind',
    'EventQueue',
    'GuaranteeViolation',
    'LedgerRecord',
    'PlannerLatency',
    'RunResult',
    'SimulationEngine',
    'TraceWriter',
    'first_tick_at_or_after',
    'guarantee_monitor',
    'iter_trace',
    'message_key',
    'next_tick_after',
    'read_trace',
]
