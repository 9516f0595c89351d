"""Continuous-time conflict checks between trajectories"""

from .checker import (
    NORMALS,
    RESOLUTION,
    box_margin,
    check_against_store,
    check_pair,
    segment_separated,
)

__all__ = [
    'NORMALS',
    'RESOLUTION',
    'box_margin',
    'check_against_store',
    'check_pair',
    'segment_separated',
]
