"""Per-message delay models, the delivery ledger and the delay-bound monitor."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from ..models.core import ConfigError, DelayConfig, DelayMode


logger = logging.getLogger(__name__)


def message_key(sender: str, seq: int, receiver: str) -> str:
    """Key of one delivery leg in a scripted delay map"""
    return f"{sender}:{seq}:{receiver}"


class DelayModel:
    """Generates the latency of every delivery leg.

    FIXED adds the introduced delay, FIXED_PLUS_JITTER adds a bounded random
    jitter on top, SCRIPTED looks up absolute delivery times by message key
    and falls back to ``default_delay``.
    """

    def __init__(self, config: DelayConfig, seed: int = 0):
        try:
            self.mode = DelayMode(config.mode)
        except ValueError:
            raise ConfigError("delay.mode", f"unknown delay mode '{config.mode}'")
        if config.introduced < 0:
            raise ConfigError("delay.introduced", "must be >= 0")
        if self.mode is DelayMode.FIXED_PLUS_JITTER:
            if config.jitter_max < 0:
                raise ConfigError("delay.jitter_max", "must be >= 0")
            if config.distribution not in ("uniform", "exponential"):
                raise ConfigError("delay.distribution", f"unknown distribution '{config.distribution}'")
        self.config = config
        self._rng = np.random.default_rng([seed, 2])

    @property
    def introduced(self) -> float:
        return self.config.introduced

    @property
    def max_delay(self) -> Optional[float]:
        """Provable upper bound on any sampled delay, None when scripted"""
        if self.mode is DelayMode.FIXED:
            return self.config.introduced
        if self.mode is DelayMode.FIXED_PLUS_JITTER:
            return self.config.introduced + self.config.jitter_max
        return None

    def sample(self, sender: str, seq: int, receiver: str, t_pub: float) -> float:
        """Latency of one leg (s), always >= 0"""
        cfg = self.config
        if self.mode is DelayMode.FIXED:
            return cfg.introduced
        if self.mode is DelayMode.FIXED_PLUS_JITTER:
            return cfg.introduced + self._jitter()

        t_recv = cfg.script.get(message_key(sender, seq, receiver))
        if t_recv is None:
            return cfg.default_delay
        if t_recv < t_pub:
            raise ConfigError(
                "delay.script", f"{message_key(sender, seq, receiver)} delivered before publication"
            )
        return float(t_recv) - t_pub

    def _jitter(self) -> float:
        cfg = self.config
        if cfg.jitter_max == 0:
            return 0.0
        u = self._rng.random()
        if cfg.distribution == "uniform":
            return cfg.jitter_max * u
        # inverse CDF of an exponential truncated to [0, jitter_max]
        mass = 1.0 - math.exp(-cfg.jitter_max / cfg.exp_scale)
        return min(-cfg.exp_scale * math.log(1.0 - u * mass), cfg.jitter_max)


@dataclass(frozen=True)
class LedgerRecord:
    """One delivered message leg"""
    sender: str
    receiver: str
    seq: int
    kind: str
    t_pub: float
    t_recv: float

    @property
    def delta(self) -> float:
        return self.t_recv - self.t_pub


class DelayLedger:
    """Delivered messages with their realized delays"""

    def __init__(self, bucket: float = 0.01):
        self.bucket = bucket
        self.records: List[LedgerRecord] = []

    def record(self, rec: LedgerRecord) -> None:
        self.records.append(rec)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def max_observed(self) -> float:
        return max((r.delta for r in self.records), default=0.0)

    def histogram(self) -> Dict[str, int]:
        """Counts per delay bucket keyed by the bucket start in milliseconds"""
        counts: Dict[int, int] = {}
        for rec in self.records:
            idx = int(math.floor(round(rec.delta / self.bucket, 9)))
            counts[idx] = counts.get(idx, 0) + 1
        return {
            f"{int(round(idx * self.bucket * 1000))}": counts[idx]
            for idx in sorted(counts)
        }


@dataclass(frozen=True)
class GuaranteeViolation:
    """A delivery slower than the receiver's Delay Check window"""
    sender: str
    receiver: str
    seq: int
    delta: float
    delay_check: float


def guarantee_monitor(ledger: DelayLedger, delay_checks: Dict[str, float], tol: float = 1e-9) -> List[GuaranteeViolation]:
    """Every delivery whose delay exceeded the receiver's Delay Check window"""
    violations = []
    for rec in ledger.records:
        window = delay_checks.get(rec.receiver)
        if window is None:
            continue
        if rec.delta > window + tol:
            violations.append(GuaranteeViolation(rec.sender, rec.receiver, rec.seq, rec.delta, window))
    if violations:
        logger.warning(f"{len(violations)} deliveries exceeded the Delay Check window")
    return violations
