"""Candidate trajectory generation for the Optimization phase"""

from .base import TrajectoryPlanner, hover_plan
from .construction import bspline_control_points, build_tail, to_bezier
from .sampling import SamplingPlanner
from .scripted import ScriptedPlanner

__all__ = [
    'SamplingPlanner',
    'ScriptedPlanner',
    'TrajectoryPlanner',
    'bspline_control_points',
    'build_tail',
    'hover_plan',
    'to_bezier',
]
