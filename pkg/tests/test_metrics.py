"""Tests for run metrics helpers."""

import unittest

import numpy as np
import pytest

from swarm_deconflict.harness.metrics import (
    count_stops,
    find_collisions,
    sample_timeline,
    sample_times,
)
from swarm_deconflict.models.core import AgentBox, TrajectorySpline
from swarm_deconflict.trajectory.spline import hover_spline


BOX = AgentBox((0.25, 0.25, 0.25))


def speed_profile(times, low_intervals):
    speed = np.ones_like(times)
    for lo, hi in low_intervals:
        speed[(times >= lo - 1e-9) & (times <= hi + 1e-9)] = 0.0
    return speed


class TestSampleTimes(unittest.TestCase):

    def test_grid_ends_at_final_time(self):
        times = sample_times(0.05)
        self.assertEqual(len(times), 6)
        self.assertAlmostEqual(times[-1], 0.05)

    def test_off_grid_final_time_appended(self):
        times = sample_times(0.055)
        self.assertEqual(len(times), 7)
        self.assertEqual(times[-1], 0.055)

    def test_zero(self):
        np.testing.assert_allclose(sample_times(0.0), [0.0])


class TestSampleTimeline:
    """Executed positions switch at commit times"""

    def test_switches_to_newer_commit(self):
        first = hover_spline((0.0, 0.0, 0.0), 0.0, "a", 0)
        second = hover_spline((1.0, 0.0, 0.0), 0.0, "a", 1)
        times = np.array([0.0, 0.5, 1.0, 1.5])
        pos = sample_timeline([(0.0, first), (1.0, second)], times)
        np.testing.assert_allclose(pos[:, 0], [0.0, 0.0, 1.0, 1.0])

    def test_velocity_order(self):
        ctrl = np.array([[[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]]], dtype=float)
        traj = TrajectorySpline("a", 1, ctrl, [0.0, 1.0], terminal_hover=False)
        vel = sample_timeline([(0.0, traj)], np.array([0.5]), 1)
        np.testing.assert_allclose(vel[0], [3.0, 0.0, 0.0])


class TestCountStops:
    """Low-speed intervals between first motion and arrival"""

    def setup_method(self):
        self.times = sample_times(10.0)

    def test_one_stop(self):
        speed = speed_profile(self.times, [(3.0, 4.0)])
        stops, stop_time = count_stops(self.times, speed, 0.0, 10.0)
        assert stops == 1
        assert stop_time == pytest.approx(1.0)

    def test_short_pause_is_not_a_stop(self):
        speed = speed_profile(self.times, [(3.0, 3.3)])
        assert count_stops(self.times, speed, 0.0, 10.0) == (0, 0.0)

    def test_waiting_before_start_and_after_arrival_ignored(self):
        speed = speed_profile(self.times, [(0.0, 2.0), (8.0, 10.0)])
        assert count_stops(self.times, speed, 0.0, 10.0) == (0, 0.0)

    def test_never_moving(self):
        assert count_stops(self.times, np.zeros_like(self.times), 0.0, 10.0) == (0, 0.0)


class TestFindCollisions(unittest.TestCase):
    """Sampled box overlaps"""

    def setUp(self):
        self.times = np.array([0.0, 1.0])

    def test_overlapping_agents(self):
        positions = {"a": np.zeros((2, 3)), "b": np.array([[2.0, 0, 0], [0.3, 0, 0]])}
        found = find_collisions(positions, {"a": BOX, "b": BOX}, self.times, ["a", "b"])
        self.assertEqual(len(found), 1)
        self.assertEqual(found[0]["pair"], ["a", "b"])
        self.assertEqual(found[0]["t"], 1.0)
        self.assertAlmostEqual(found[0]["margin"], -0.2)

    def test_touching_boxes_do_not_collide(self):
        positions = {"a": np.zeros((2, 3)), "b": np.tile([0.5, 0.0, 0.0], (2, 1))}
        self.assertEqual(find_collisions(positions, {"a": BOX, "b": BOX}, self.times, ["a", "b"]), [])

    def test_obstacle_pairs_skipped(self):
        positions = {"a": np.tile([9.0, 0, 0], (2, 1)), "o1": np.zeros((2, 3)), "o2": np.zeros((2, 3))}
        boxes = {"a": BOX, "o1": BOX, "o2": BOX}
        self.assertEqual(find_collisions(positions, boxes, self.times, ["a"]), [])
