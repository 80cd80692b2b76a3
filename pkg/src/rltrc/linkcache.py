"""Per-successor communication cache and link-quality estimators.

Every node keeps one cache entry per successor it talks to. Acknowledgements
carry the received signal strength back to the sender; from the two most
recent acknowledged packets the sender derives attenuation per meter, a
movement trend, an approximate successor velocity, and a predicted link
lifetime. Those estimates drive the conditional shrinking of the usable
power-level set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class MalformedAckError(ValueError):
    """An acknowledgement reported a received strength above the transmit power."""


class UndefinedAttenuationError(ValueError):
    """Attenuation cannot be derived from a record with zero travel time."""


class VelocityUnobservableError(ValueError):
    """Equal round trips (or undefined attenuation) carry no velocity signal."""


@dataclass
class PacketRecord:
    """One acknowledged packet: send/ack times, transmit power, received strength.

    avg_rss_after is the link's running average RSS just after this ack was
    folded in; the trend detector compares these running averages.
    """

    t_msg: float
    t_ack: float
    tx_power: float
    rss: float
    avg_rss_after: float = 0.0

    @property
    def rtt(self) -> float:
        return self.t_ack - self.t_msg


@dataclass
class CommCacheEntry:
    successor_id: int
    sig_atn: float                      # power units per meter; starts at the scenario prior
    packets_tx: int = 0
    packets_rx: int = 0
    sum_rss: float = 0.0                # over acknowledged packets
    sum_tpl: float = 0.0
    recent_trend: int = 0               # -1 receding, 0 unknown, +1 approaching
    approx_velocity: float = 0.0
    timestamp_begin: float = 0.0
    timestamp_end: float | None = None
    expected_timestamp_end: float = math.inf
    last_two: list[PacketRecord] = field(default_factory=list)
    reliable: bool = True

    @property
    def prr(self) -> float:
        """Packet reception rate; 1.0 before any transmission."""
        return self.packets_rx / self.packets_tx if self.packets_tx else 1.0

    @property
    def avg_rss(self) -> float:
        return self.sum_rss / self.packets_rx if self.packets_rx else 0.0

    @property
    def avg_tpl(self) -> float:
        return self.sum_tpl / self.packets_rx if self.packets_rx else 0.0

    @property
    def rss_over_tpl(self) -> float:
        """avg_rss / avg_tpl in [0,1]; 1.0 while no ack has been received."""
        return self.avg_rss / self.avg_tpl if self.packets_rx and self.avg_tpl > 0 else 1.0

    @property
    def last_ack_time(self) -> float:
        return self.last_two[-1].t_ack if self.last_two else self.timestamp_begin


def record_tx(entry: CommCacheEntry) -> None:
    """Count one transmission attempt toward the link's PRR."""
    entry.packets_tx += 1


def record_ack(entry: CommCacheEntry, rec: PacketRecord, vs: float, radio_range: float) -> CommCacheEntry:
    """Fold an acknowledged packet into the cache.

    Updates counters and running averages, appends the record to last_two
    (evicting the oldest), and re-derives sig_atn, trend, velocity and the
    expected link end once two records exist. Estimates that are undefined on
    this pair (zero travel time, equal round trips) keep their previous value.
    """
    if rec.rss > rec.tx_power:
        raise MalformedAckError(
            "ack reports RSS %.6g above transmit power %.6g" % (rec.rss, rec.tx_power)
        )
    if rec.t_ack <= rec.t_msg:
        raise ValueError("ack time must follow send time")
    entry.packets_rx += 1
    entry.sum_rss += rec.rss
    entry.sum_tpl += rec.tx_power
    rec.avg_rss_after = entry.sum_rss / entry.packets_rx
    entry.last_two.append(rec)
    if len(entry.last_two) > 2:
        entry.last_two.pop(0)
    if len(entry.last_two) == 2:
        rec1, rec2 = entry.last_two
        try:
            entry.sig_atn = estimate_attenuation(rec1, rec2, vs)
        except UndefinedAttenuationError:
            pass
        entry.recent_trend = detect_trend(rec1, rec2)
        try:
            entry.approx_velocity = estimate_velocity(rec1, rec2, entry.sig_atn)
        except VelocityUnobservableError:
            pass
        entry.expected_timestamp_end = expected_link_end(
            radio_range, entry.approx_velocity, rec2.t_ack
        )
    return entry


def estimate_attenuation(rec1: PacketRecord, rec2: PacketRecord, vs: float) -> float:
    """Signal attenuation per meter from two acknowledged packets.

    Each packet's travelled distance is vs * (t_ack - t_msg); the per-packet
    fade is tx_power - rss. The estimate is the mean of fade/distance over
    both records.
    """
    d1 = vs * rec1.rtt
    d2 = vs * rec2.rtt
    if d1 <= 0.0 or d2 <= 0.0:
        raise UndefinedAttenuationError("record with zero travel time")
    ff1 = rec1.tx_power - rec1.rss
    ff2 = rec2.tx_power - rec2.rss
    return (ff1 / d1 + ff2 / d2) / 2.0


def detect_trend(rec1: PacketRecord, rec2: PacketRecord) -> int:
    """+1 when the successor is getting closer, -1 when receding, else 0.

    Closer: the later packet's round trip did not grow and the running
    average RSS did not drop. Receding: round trip grew and average RSS
    dropped. Mixed signals give 0.
    """
    rtt_ok = rec2.rtt <= rec1.rtt
    rss_ok = rec1.avg_rss_after <= rec2.avg_rss_after
    if rtt_ok and rss_ok:
        return 1
    if not rtt_ok and not rss_ok:
        return -1
    return 0


def estimate_velocity(rec1: PacketRecord, rec2: PacketRecord, sig_atn: float) -> float:
    """Approximate successor speed from the fade difference of two acks.

    The extra fade (FF2 - FF1) converts to extra distance at sig_atn per
    meter; that distance was covered over the wall-clock gap between the two
    acknowledgements. The fade difference is taken absolute so approaching
    and receding movers both yield a speed >= 0.
    """
    tm = rec2.t_ack - rec1.t_ack
    if tm <= 0.0 or sig_atn <= 0.0:
        raise VelocityUnobservableError("no usable velocity signal in this pair")
    ff1 = rec1.tx_power - rec1.rss
    ff2 = rec2.tx_power - rec2.rss
    return abs(ff2 - ff1) / (sig_atn * tm)


def predict_displacement(vel: float, t_now: float, t_ack2: float) -> float:
    """Distance the successor may have moved since its last acknowledgement."""
    return vel * (t_now - t_ack2)


def should_drop(dist_est: float, radio_range: float) -> bool:
    """True when the estimated displacement exceeds twice the radio range."""
    return dist_est > 2.0 * radio_range


def power_threshold(sig_atn: float, dist_est: float, min_rcv: float) -> float:
    """Strict lower bound on usable transmit power for the estimated distance."""
    return sig_atn * dist_est + min_rcv


def available_levels(levels: tuple[float, ...], p_thres: float) -> tuple[float, ...]:
    """Suffix of the ascending level list strictly above the threshold.

    An empty result means no level can currently reach the successor; the
    caller must treat the link as unusable for this attempt.
    """
    return tuple(p for p in levels if p > p_thres)


def expected_link_end(radio_range: float, vel: float, t_ack2: float) -> float:
    """Predicted time the successor exits reach: 2R/vel past the last ack.

    A zero velocity yields +inf (the link never expires by motion).
    """
    if vel <= 0.0:
        return math.inf
    return 2.0 * radio_range / vel + t_ack2


def mark_reliability(entry: CommCacheEntry, actual_break_time: float) -> CommCacheEntry:
    """Record a link break and grade the link against its predicted lifetime.

    The link is unreliable exactly when it broke strictly before the
    predicted end (breaks at or after the prediction are honest); against the
    +inf sentinel every break is early. The trend resets to unknown.
    """
    entry.reliable = actual_break_time >= entry.expected_timestamp_end
    entry.timestamp_end = actual_break_time
    entry.recent_trend = 0
    return entry


def new_episode(entry: CommCacheEntry, t_now: float) -> CommCacheEntry:
    """Reset per-episode motion state when a route (re)installs this link.

    PRR counters, sig_atn and the reliability flag persist across episodes;
    the record pair, velocity and predicted end do not. Without the reset a
    long idle gap would keep predict_displacement above 2R forever.
    """
    entry.timestamp_begin = t_now
    entry.timestamp_end = None
    entry.expected_timestamp_end = math.inf
    entry.approx_velocity = 0.0
    entry.recent_trend = 0
    entry.last_two.clear()
    return entry
