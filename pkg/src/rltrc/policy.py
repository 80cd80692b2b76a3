"""Power-level decision policies.

The adaptive policy turns zone and network rewards into an exploration
probability sigma, then picks from the currently usable levels: greedy means
the highest usable level, exploration means a uniform draw over all of them.
Unreliable links bypass exploration entirely. Simplified baseline policies
cover the comparison runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from random import Random

SIGMA_FLOOR = 0.001
SIGMA_CEIL = 0.999

BASELINE_KINDS = ("fixed-max", "odtpc-like", "beacon-rssi-like", "beacon-prr-like")


class UnusableLinkError(RuntimeError):
    """No power level clears the link's threshold; the route must be rebuilt."""


@dataclass(frozen=True)
class SigmaInputs:
    zone_reward: float
    network_reward: float


def _clamp(sigma: float) -> float:
    return min(SIGMA_CEIL, max(SIGMA_FLOOR, sigma))


def compute_sigma(inputs: SigmaInputs) -> float:
    """Exploration probability from the zone and network reward levels.

    Negative zone reward pins sigma to the floor; a sub-unit zone reward is
    used directly. From there the network reward shapes how aggressively the
    zone explores: the worse the network does, the more the formula pushes
    sigma up, until below -1 it collapses to the floor again. Result is
    always within [0.001, 0.999].
    """
    ri, rn = inputs.zone_reward, inputs.network_reward
    if ri < 0.0:
        return SIGMA_FLOOR
    if ri < 1.0:
        return _clamp(ri)
    if rn < 0.0:
        if rn == -1.0:
            return SIGMA_CEIL
        try:
            val = (1.0 + ri) ** (-1.0 / (rn + 1.0))
        except OverflowError:
            # rn just below -1: the power blows up and sigma floors out.
            return SIGMA_FLOOR
        # rn < -1 drives this negative; the clamp floors it.
        return _clamp(1.0 - val)
    if rn <= 1.0:
        return _clamp(1.0 - 1.0 / (1.0 + ri))
    return _clamp((1.0 - 1.0 / (1.0 + ri)) ** (1.0 / rn))


def select_power_level(
    available: tuple[float, ...],
    sigma: float,
    reliable: bool,
    rng: Random,
) -> float:
    """Pick a transmit level from the ascending usable set.

    Unreliable links always get the maximum. Otherwise the maximum is kept
    with probability 1-sigma and a uniform draw over all k levels covers the
    rest, so the maximum wins with (1-sigma)+sigma/k and every other level
    with sigma/k.
    """
    if not available:
        raise UnusableLinkError("no usable power level")
    if not reliable:
        return available[-1]
    if rng.random() < 1.0 - sigma:
        return available[-1]
    return available[rng.randrange(len(available))]


@dataclass
class ArmStats:
    """Pull counts and cumulative payouts for a bank of arms."""

    pulls: list[int] = field(default_factory=list)
    payouts: list[float] = field(default_factory=list)

    @classmethod
    def for_arms(cls, n: int) -> "ArmStats":
        return cls(pulls=[0] * n, payouts=[0.0] * n)

    def record(self, arm: int, payout: float) -> None:
        self.pulls[arm] += 1
        self.payouts[arm] += payout

    def average(self, arm: int) -> float:
        if self.pulls[arm] == 0:
            raise ValueError("arm %d has no pulls" % arm)
        return self.payouts[arm] / self.pulls[arm]


def greedy_arm(stats: ArmStats) -> int:
    """Arm with the best average payout; unpulled arms first, ties go low."""
    if not stats.pulls:
        raise ValueError("no arms")
    for i, n in enumerate(stats.pulls):
        if n == 0:
            return i
    best = 0
    for i in range(1, len(stats.pulls)):
        if stats.average(i) > stats.average(best):
            best = i
    return best


@dataclass
class LinkSnapshot:
    """What a baseline policy is allowed to see about one link."""

    current_level: float
    last_rss: float | None   # None while the link is cold
    prr: float
    sig_atn: float
    distance: float | None   # last estimated sender-successor distance
    min_rcv: float


def _notch(levels: tuple[float, ...], current: float, step: int) -> float:
    """Move one index within `levels`, clamped at both ends."""
    try:
        i = levels.index(current)
    except ValueError:
        return levels[-1]
    return levels[min(len(levels) - 1, max(0, i + step))]


def baseline_decide(
    kind: str,
    snap: LinkSnapshot,
    levels: tuple[float, ...],
    rssi_high: float = 0.0,
    rssi_low: float = 0.0,
) -> float:
    """Pick a level under one of the non-learning comparison policies.

    Cold links (no feedback yet) always get the maximum. The periodic beacon
    energy debit of the prr policy is booked by the engine, not here.
    """
    if kind not in BASELINE_KINDS:
        raise ValueError("unknown policy kind %r" % kind)
    if not levels:
        raise UnusableLinkError("no power levels configured")
    if kind == "fixed-max":
        return levels[-1]
    if snap.last_rss is None or snap.distance is None:
        return levels[-1]
    if kind == "odtpc-like":
        for p in levels:
            if p - snap.sig_atn * snap.distance > snap.min_rcv:
                return p
        return levels[-1]
    if kind == "beacon-rssi-like":
        if snap.last_rss > rssi_high:
            return _notch(levels, snap.current_level, -1)
        if snap.last_rss < rssi_low:
            return _notch(levels, snap.current_level, +1)
        return snap.current_level
    # beacon-prr-like
    if snap.prr < 0.9:
        return levels[-1]
    return _notch(levels, snap.current_level, -1)
