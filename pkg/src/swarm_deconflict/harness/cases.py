"""Scripted two-agent runs covering every publish/receive timing of a candidate.

Agent A publishes a candidate while agent B is in Optimization (O), Check
(C) or Delay Check (DC); B receives it during O, C, DC or after its Delay
Check. Both agents head for the same point first, so their candidates always
conflict, and the run shows which agent catches the conflict and in which
phase. Receptions in B's next iteration are marked as wrapping.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..models.core import (
    AgentLayoutConfig,
    AgentSpec,
    CaseOutcome,
    CaseScript,
    DelayConfig,
    ScenarioConfig,
)
from ..simnet.delay import message_key
from ..simnet.events import next_tick_after
from .audit import verify_trace
from .scenario import build_engine


logger = logging.getLogger(__name__)

AGENT_A = "agentA"
AGENT_B = "agentB"
A_START = (0.0, -3.0, 0.0)
B_START = (-3.0, 0.0, 0.0)
MEET = (0.0, 0.0, 0.0)
# Past MEET, so B is never done after committing to MEET
B_GOAL = (3.0, 0.0, 0.0)
GOALS = {AGENT_A: MEET, AGENT_B: B_GOAL}

CASE_TICK = 0.005
CASE_CHECK_LATENCY = 0.01
B_OPT_LATENCY = 0.05
CASE_T_END = 1.0
# Keeps scripted receptions away from phase boundaries
MARGIN = CASE_TICK / 2

PUB_PHASES = ("O", "C", "DC")
RECV_PHASES = ("O", "C", "DC", "AFTER")

DETECTION_EVENTS = {"opt_infeasible": "O", "check_reject": "C", "dc_abort": "DC"}

Interval = Tuple[float, float]


@dataclass(frozen=True)
class PhaseTimeline:
    """Phase boundaries of agent B's first two iterations"""
    c1: float
    dc1: float
    commit1: Optional[float]
    o2: float
    c2: float
    dc2: float
    commit2: float


def _commit_tick(t_dc: float, delay_check: float, tick: float) -> float:
    deadline = t_dc + delay_check
    t = t_dc
    while t < deadline - 1e-12:
        t = next_tick_after(t, tick)
    return t


def phase_timeline(delay_check: float, reject_first_check: bool = False) -> PhaseTimeline:
    """B's phase boundaries, computed with the same arithmetic the engine uses"""
    c1 = 0.0 + B_OPT_LATENCY
    dc1 = c1 + CASE_CHECK_LATENCY
    if reject_first_check:
        commit1 = None
        o2 = next_tick_after(dc1, CASE_TICK)
    else:
        commit1 = _commit_tick(dc1, delay_check, CASE_TICK)
        o2 = next_tick_after(commit1, CASE_TICK)
    c2 = o2 + B_OPT_LATENCY
    dc2 = c2 + CASE_CHECK_LATENCY
    return PhaseTimeline(c1, dc1, commit1, o2, c2, dc2, _commit_tick(dc2, delay_check, CASE_TICK))


def _pick(pub_window: Interval, recv_window: Interval, delay_check: float) -> Optional[Tuple[float, float]]:
    """A publication and reception time inside the windows with 0 <= delay <= delay_check"""
    lo_p, hi_p = pub_window
    if lo_p > hi_p:
        return None
    for pub in (0.5 * (lo_p + hi_p), hi_p):
        lo = max(recv_window[0], pub)
        hi = min(recv_window[1], pub + delay_check)
        if lo <= hi:
            return pub, 0.5 * (lo + hi)
    return None


def _windows(case_id: int, tl: PhaseTimeline) -> Tuple[Interval, Interval, bool]:
    """Publication window, reception window and whether reception wraps into B's next iteration"""
    row, col = divmod(case_id - 1, 4)
    pub_phase, recv_phase = PUB_PHASES[row], RECV_PHASES[col]
    inf = float("inf")
    commit1 = tl.commit1 if tl.commit1 is not None else tl.dc1

    pub = {
        "O": (max(MARGIN, CASE_CHECK_LATENCY), tl.c1 - MARGIN),
        "C": (tl.c1 + MARGIN, tl.dc1 - MARGIN),
        "DC": (tl.dc1 + MARGIN, commit1 - MARGIN),
    }[pub_phase]

    if pub_phase == "DC":
        recv = {
            "O": (commit1 + MARGIN, tl.o2),
            "C": (tl.c2, tl.c2),
            "DC": (tl.dc2 + MARGIN, tl.commit2 - MARGIN),
            "AFTER": (commit1 + MARGIN, inf),
        }[recv_phase]
        return pub, recv, recv_phase != "AFTER"

    if pub_phase == "C" and recv_phase == "O":
        # Only reachable when B's Check ends its iteration early
        return pub, (tl.dc1 + MARGIN, tl.o2), True

    recv = {
        "O": (MARGIN, tl.c1 - MARGIN),
        "C": (tl.c1 + MARGIN, tl.dc1 - MARGIN),
        "DC": (tl.dc1 + MARGIN, commit1 - MARGIN),
        "AFTER": (commit1 + MARGIN, inf),
    }[recv_phase]
    return pub, recv, False


def generate_case_script(case_id: int, delay_check: float) -> CaseScript:
    """Scripted timing of one case; unconstructible when no delay <= delay_check fits"""
    if not 1 <= case_id <= 12:
        raise ValueError(f"case id must be 1..12, got {case_id}")
    row, col = divmod(case_id - 1, 4)
    pub_phase, recv_phase = PUB_PHASES[row], RECV_PHASES[col]

    early_reject = pub_phase == "C" and recv_phase == "O"
    tl = phase_timeline(delay_check, reject_first_check=early_reject)
    pub_window, recv_window, wraps = _windows(case_id, tl)
    picked = _pick(pub_window, recv_window, delay_check)
    if picked is None:
        logger.debug(f"Case {case_id} needs a delay above {delay_check:g}s")
        return CaseScript(case_id, pub_phase, recv_phase, constructible=False, wraps=wraps)

    t_pub, t_recv = picked
    delivery = {message_key(AGENT_A, 2, AGENT_B): t_recv}

    b_targets: List[Optional[Tuple[float, float, float]]] = [MEET, MEET]
    if early_reject:
        # B first heads for A's hover point and learns about A only during its Check
        b_targets = [A_START, MEET]
        delivery[message_key(AGENT_A, 1, AGENT_B)] = tl.c1 - MARGIN

    # B's first candidate reaches A unless B drops it at its Check
    b_publishes = not early_reject and not (recv_phase == "O" and not wraps)
    if b_publishes:
        delivery[message_key(AGENT_B, 2, AGENT_A)] = max(tl.dc1, t_pub) + MARGIN

    detail = {
        "delivery": delivery,
        "targets": {AGENT_A: [MEET], AGENT_B: b_targets},
        "latency": {AGENT_A: t_pub - CASE_CHECK_LATENCY, AGENT_B: B_OPT_LATENCY},
        "designated_iteration": 2 if wraps else 1,
        "timeline": tl.__dict__,
    }
    return CaseScript(case_id, pub_phase, recv_phase, True, t_pub, t_recv, wraps, detail)


def generate_case_scripts(delay_check: float) -> List[CaseScript]:
    return [generate_case_script(case_id, delay_check) for case_id in range(1, 13)]


def case_config(script: CaseScript, delay_check: float) -> ScenarioConfig:
    """Two-agent scenario carrying the script's delivery times and targets"""
    detail = script.detail
    agents = [
        AgentSpec(
            id=agent_id,
            start=start,
            goal=GOALS[agent_id],
            planner_latency=detail["latency"][agent_id],
            start_time=0.0,
            targets=list(detail["targets"][agent_id]),
        )
        for agent_id, start in ((AGENT_A, A_START), (AGENT_B, B_START))
    ]
    return ScenarioConfig(
        seed=0,
        t_end=CASE_T_END,
        tick=CASE_TICK,
        variant="rmader",
        delay_check=delay_check,
        check_latency=CASE_CHECK_LATENCY,
        planner_latency_min=B_OPT_LATENCY,
        planner_latency_max=B_OPT_LATENCY,
        start_jitter=0.0,
        agents=AgentLayoutConfig(count=2, layout="explicit", explicit=agents),
        delay=DelayConfig(mode="scripted", script=dict(detail["delivery"]), default_delay=0.0),
    )


def _detection(records: List[Dict], agent: str, iteration: int) -> Optional[str]:
    for record in records:
        if record["agent"] != agent or record["kind"] not in DETECTION_EVENTS:
            continue
        if record["detail"].get("iteration") == iteration:
            return DETECTION_EVENTS[record["kind"]]
    return None


def run_case(script: CaseScript, delay_check: float) -> CaseOutcome:
    """Run a scripted case and report who detected the conflict, and in which phase"""
    if not script.constructible:
        return CaseOutcome(script.case_id, constructible=False)

    engine = build_engine(case_config(script, delay_check))
    result = engine.run_until(CASE_T_END)
    records = result.trace.records

    detector, phase = None, None
    b_phase = _detection(records, AGENT_B, script.detail["designated_iteration"])
    if b_phase is not None:
        detector, phase = "B", b_phase
    else:
        a_phase = _detection(records, AGENT_A, 1)
        if a_phase is not None:
            detector, phase = "A", a_phase

    audit = verify_trace(records)
    outcome = CaseOutcome(
        case_id=script.case_id,
        constructible=True,
        detector=detector,
        phase=phase,
        committed_conflict=not audit.audit_clean,
    )
    logger.info(
        f"Case {script.case_id} (pub {script.pub_phase}, recv {script.recv_phase}): "
        f"detector {detector} in {phase}, committed conflict {outcome.committed_conflict}"
    )
    return outcome


def run_all_cases(delay_check: float = 0.1) -> List[CaseOutcome]:
    return [run_case(script, delay_check) for script in generate_case_scripts(delay_check)]
