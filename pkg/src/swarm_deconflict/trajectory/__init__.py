"""Piecewise cubic trajectories and trefoil obstacle paths"""

from .spline import (
    check_dynamic_limits,
    continuity_gap,
    derivative_control_points,
    evaluate,
    hover_spline,
    interior_gaps,
    is_c2,
    refine_edges,
    restrict,
    restrict_segments,
    sample,
    splice,
    state_at,
    window_control_points,
)
from .trefoil import (
    fit_error,
    obstacle_as_spline,
    random_trefoil,
    segments_for_horizon,
    trefoil_position,
)

__all__ = [
    'check_dynamic_limits',
    'continuity_gap',
    'derivative_control_points',
    'evaluate',
    'fit_error',
    'hover_spline',
    'interior_gaps',
    'is_c2',
    'obstacle_as_spline',
    'random_trefoil',
    'refine_edges',
    'restrict',
    'restrict_segments',
    'sample',
    'segments_for_horizon',
    'splice',
    'state_at',
    'trefoil_position',
    'window_control_points',
]
