"""Per-agent store of peer trajectories used as planning and checking constraints."""

import logging
from typing import Dict, List, Set, Tuple

from ..models.core import (
    AgentBox,
    MessageKind,
    StoreEntry,
    StoreSnapshot,
    TrajectorySpline,
    TrajMessage,
)


logger = logging.getLogger(__name__)


class PeerStore:
    """Committed and candidate trajectories of every known peer.

    Received messages are queued and only applied by ``drain``, which the
    agent calls at phase boundaries. A COMM replaces the peer's committed
    entry and clears its candidates; an OPT is added next to the
    committed entry.
    """

    def __init__(self, peer_box: AgentBox):
        self.peer_box = peer_box
        self.pending: List[TrajMessage] = []
        self.version = 0
        self.closed = False
        self._comm: Dict[str, TrajectorySpline] = {}
        self._opts: Dict[str, List[TrajectorySpline]] = {}
        self._obstacles: Dict[str, Tuple[TrajectorySpline, AgentBox]] = {}
        # Every seq <= _floor[sender] was seen; _seen only holds keys above it
        self._floor: Dict[str, int] = {}
        self._seen: Set[Tuple[str, int]] = set()
        self._last_seq: Dict[str, int] = {}

    def add_obstacle(self, traj: TrajectorySpline, box: AgentBox) -> None:
        self._obstacles[traj.owner] = (traj, box)
        self.version += 1

    def is_duplicate(self, msg: TrajMessage) -> bool:
        return msg.seq <= self._floor.get(msg.sender, 0) or msg.key in self._seen

    def enqueue(self, msg: TrajMessage) -> bool:
        """Queue a received message; returns False for a duplicate.

        A closed store still tracks sequence numbers but queues nothing.
        """
        if self.is_duplicate(msg):
            logger.debug(f"Dropping duplicate message {msg.sender}#{msg.seq}")
            return False
        self._seen.add(msg.key)
        self._last_seq[msg.sender] = max(self._last_seq.get(msg.sender, -1), msg.seq)
        floor = self._floor.get(msg.sender, 0)
        while (msg.sender, floor + 1) in self._seen:
            floor += 1
            self._seen.discard((msg.sender, floor))
        self._floor[msg.sender] = floor
        if not self.closed:
            self.pending.append(msg)
        return True

    def close(self) -> None:
        """Stop queueing; the owner will never plan again"""
        self.closed = True
        self.pending = []

    def seen_size(self) -> int:
        return len(self._seen)

    def drain(self) -> int:
        """Apply queued messages in delivery order; returns how many were applied"""
        applied = len(self.pending)
        for msg in self.pending:
            self._apply(msg)
        self.pending = []
        if applied:
            self.version += 1
        return applied

    def _apply(self, msg: TrajMessage) -> None:
        if msg.kind is MessageKind.COMM:
            self._comm[msg.sender] = msg.traj
            self._opts[msg.sender] = []
        else:
            self._opts.setdefault(msg.sender, []).append(msg.traj)

    def peers(self) -> List[str]:
        return sorted(set(self._comm) | set(self._opts))

    def comm_entry(self, peer: str) -> TrajectorySpline:
        return self._comm[peer]

    def opt_entries(self, peer: str) -> List[TrajectorySpline]:
        return list(self._opts.get(peer, []))

    def constraint_count(self, peer: str) -> int:
        return int(peer in self._comm) + len(self._opts.get(peer, []))

    def last_seq(self, peer: str) -> int:
        return self._last_seq.get(peer, -1)

    def snapshot(self) -> StoreSnapshot:
        """Applied entries only, ordered by peer, then comm before opts, then obstacles"""
        entries = []
        for peer in self.peers():
            if peer in self._comm:
                entries.append(StoreEntry(peer, MessageKind.COMM.value, self._comm[peer], self.peer_box))
            for traj in self._opts.get(peer, []):
                entries.append(StoreEntry(peer, MessageKind.OPT.value, traj, self.peer_box))
        for owner in sorted(self._obstacles):
            traj, box = self._obstacles[owner]
            entries.append(StoreEntry(owner, "obstacle", traj, box))
        return StoreSnapshot(tuple(entries), self.version)
