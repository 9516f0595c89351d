"""Event queue and simulation clock helpers."""

import heapq
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, List, Optional


class EventKind(IntEnum):
    """Priority classes; lower values run first at equal timestamps"""
    DELIVERY = 0
    PLANNER_DONE = 1
    CHECK_DONE = 2
    AGENT_TICK = 3


@dataclass(order=True)
class Event:
    """A scheduled simulation event ordered by (t, kind, counter)"""
    t: float
    kind: EventKind
    counter: int
    agent: Optional[str] = field(default=None, compare=False)
    payload: Any = field(default=None, compare=False)


class EventQueue:
    """Min-heap of events with a global insertion counter as last tiebreak"""

    def __init__(self) -> None:
        self._heap: List[Event] = []
        self._counter = 0

    def push(self, t: float, kind: EventKind, agent: Optional[str] = None, payload: Any = None) -> Event:
        event = Event(t=t, kind=kind, counter=self._counter, agent=agent, payload=payload)
        self._counter += 1
        heapq.heappush(self._heap, event)
        return event

    def pop(self) -> Event:
        return heapq.heappop(self._heap)

    def peek(self) -> Optional[Event]:
        return self._heap[0] if self._heap else None

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)


def _grid_index(t: float, tick: float) -> float:
    # Round away float noise such as 0.16 / 0.005 = 31.999999999999996
    return round(t / tick, 9)


def first_tick_at_or_after(t: float, tick: float) -> float:
    return math.ceil(_grid_index(t, tick)) * tick


def next_tick_after(t: float, tick: float) -> float:
    return (math.floor(_grid_index(t, tick)) + 1) * tick
