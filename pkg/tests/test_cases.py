"""Tests for the scripted publish/receive timing cases."""

import unittest

import pytest

from swarm_deconflict.harness.cases import (
    AGENT_A,
    AGENT_B,
    MEET,
    case_config,
    generate_case_script,
    generate_case_scripts,
    phase_timeline,
    run_all_cases,
    run_case,
)
from swarm_deconflict.simnet.delay import message_key


DELAY_CHECK = 0.1

# (case id, detecting agent, phase)
EXPECTED = [
    (1, "B", "C"),
    (2, "B", "DC"),
    (3, "B", "DC"),
    (5, "B", "O"),
    (6, "B", "DC"),
    (7, "B", "DC"),
    (9, "B", "O"),
    (10, "B", "C"),
    (11, "B", "DC"),
    (12, "A", "DC"),
]


class TestCaseScripts(unittest.TestCase):
    """Timing generation"""

    def test_timeline(self):
        tl = phase_timeline(DELAY_CHECK)
        self.assertAlmostEqual(tl.c1, 0.05)
        self.assertAlmostEqual(tl.dc1, 0.06)
        self.assertAlmostEqual(tl.commit1, 0.16)
        self.assertAlmostEqual(tl.o2, 0.165)

    def test_early_reject_timeline_has_no_commit(self):
        tl = phase_timeline(DELAY_CHECK, reject_first_check=True)
        self.assertIsNone(tl.commit1)
        self.assertAlmostEqual(tl.o2, 0.065)

    def test_twelve_scripts(self):
        scripts = generate_case_scripts(DELAY_CHECK)
        self.assertEqual([s.case_id for s in scripts], list(range(1, 13)))
        self.assertEqual([s.pub_phase for s in scripts[:4]], ["O"] * 4)
        self.assertEqual([s.recv_phase for s in scripts[:4]], ["O", "C", "DC", "AFTER"])

    def test_late_receptions_unconstructible(self):
        for case_id in (4, 8):
            script = generate_case_script(case_id, DELAY_CHECK)
            self.assertFalse(script.constructible)

    def test_delays_within_window(self):
        for script in generate_case_scripts(DELAY_CHECK):
            if script.constructible:
                self.assertGreaterEqual(script.t_recv, script.t_pub)
                self.assertLessEqual(script.t_recv - script.t_pub, DELAY_CHECK)

    def test_invalid_case_id(self):
        for case_id in (0, 13):
            with self.assertRaises(ValueError):
                generate_case_script(case_id, DELAY_CHECK)

    def test_config_carries_script(self):
        script = generate_case_script(1, DELAY_CHECK)
        config = case_config(script, DELAY_CHECK)
        self.assertEqual(config.delay.mode, "scripted")
        self.assertEqual(config.delay.script[message_key(AGENT_A, 2, AGENT_B)], script.t_recv)
        self.assertEqual([s.id for s in config.agents.explicit], [AGENT_A, AGENT_B])

    def test_b_stays_active_after_first_commit(self):
        config = case_config(generate_case_script(9, DELAY_CHECK), DELAY_CHECK)
        goals = {s.id: tuple(s.goal) for s in config.agents.explicit}
        self.assertEqual(goals[AGENT_A], MEET)
        self.assertNotEqual(goals[AGENT_B], MEET)
        self.assertEqual(generate_case_script(9, DELAY_CHECK).detail["designated_iteration"], 2)


class TestRunCase:
    """Detection outcome of every constructible case"""

    @pytest.mark.parametrize("case_id,detector,phase", EXPECTED)
    def test_detection(self, case_id, detector, phase):
        outcome = run_case(generate_case_script(case_id, DELAY_CHECK), DELAY_CHECK)
        assert outcome.constructible
        assert (outcome.detector, outcome.phase) == (detector, phase)
        assert not outcome.committed_conflict

    def test_unconstructible_outcome(self):
        outcome = run_case(generate_case_script(4, DELAY_CHECK), DELAY_CHECK)
        assert outcome.to_dict() == {
            "case_id": 4,
            "constructible": False,
            "detector": None,
            "phase": None,
            "committed_conflict": False,
        }

    def test_all_cases_never_commit_conflicts(self):
        outcomes = run_all_cases(DELAY_CHECK)
        assert len(outcomes) == 12
        assert sum(o.constructible for o in outcomes) == 10
        assert not any(o.committed_conflict for o in outcomes)
