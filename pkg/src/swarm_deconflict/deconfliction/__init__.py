"""Delay-robust deconfliction protocol per agent"""

from .agent import AgentState, DeconflictionAgent
from .peer_store import PeerStore

__all__ = [
    'AgentState',
    'DeconflictionAgent',
    'PeerStore',
]
