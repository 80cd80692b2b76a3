"""Zone controllers and the network controller.

Controllers are infrastructure: no battery, no mobility. Each zone controller
tracks its members' last-reported position, energy and top speed, answers
destination lookups with a broadcast circle, and periodically rebroadcasts
zone state while refreshing the zone's geometry statistics and reward. The
network controller sums zone rewards on a slower timer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .model import NodeState, Point, ZoneState, distance, zone_of
from .rewards import NodeRewardState, session_reward, network_reward, zone_reward

T_SYNC_DEFAULT = 5.0
T_NET_DEFAULT = 20.0


@dataclass
class NodeTrack:
    """Last state a controller heard from one node."""

    position: Point
    last_seen: float
    residual_energy: float
    max_velocity: float


@dataclass(frozen=True)
class BroadcastCircle:
    """Region that must contain the destination, and the zones it touches."""

    center: Point
    radius: float
    spans_zones: tuple[int, ...]

    @property
    def intra_zonal(self) -> bool:
        return len(self.spans_zones) == 1

    def contains(self, p: Point) -> bool:
        return distance(self.center, p) <= self.radius


def circle_intersects_rect(center: Point, radius: float, zone: ZoneState) -> bool:
    """True when the circle touches the zone rectangle (closed sets)."""
    cx = min(max(center[0], zone.x0), zone.x1)
    cy = min(max(center[1], zone.y0), zone.y1)
    return distance(center, (cx, cy)) <= radius


def circle_spans(center: Point, radius: float, zones: list[ZoneState]) -> tuple[int, ...]:
    return tuple(z.id for z in zones if circle_intersects_rect(center, radius, z))


def destination_lookup(
    dst: int,
    t_now: float,
    registry: Mapping[int, NodeTrack],
    zones: list[ZoneState],
) -> BroadcastCircle:
    """Smallest circle guaranteed to hold the destination since it was last seen.

    An unknown destination yields the full-flood sentinel spanning every zone.
    """
    track = registry.get(dst)
    if track is None:
        return BroadcastCircle((0.0, 0.0), math.inf, tuple(z.id for z in zones))
    radius = track.max_velocity * (t_now - track.last_seen)
    return BroadcastCircle(track.position, radius, circle_spans(track.position, radius, zones))


def assign_zones(nodes: Mapping[int, NodeState], zones: list[ZoneState]) -> None:
    """Rebuild zone membership from current positions; dead nodes drop out."""
    for z in zones:
        z.member_nodes.clear()
    for node in nodes.values():
        node.zone_id = zone_of(node.position, zones)
        if node.alive:
            zones[node.zone_id].member_nodes.add(node.id)


def _membership_diameter(members: Iterable[int], nodes: Mapping[int, NodeState]) -> float:
    pts = [nodes[m].position for m in members]
    best = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            best = max(best, distance(pts[i], pts[j]))
    return best


def _neighbor_count(node: NodeState, nodes: Mapping[int, NodeState]) -> int:
    return sum(
        1
        for other in nodes.values()
        if other.id != node.id
        and other.alive
        and distance(node.position, other.position) <= node.radio_range
    )


class ZoneController:
    """Single-writer actor owning one zone's registry, stats and reward."""

    def __init__(self, zone: ZoneState, t_sync: float = T_SYNC_DEFAULT) -> None:
        self.zone = zone
        self.t_sync = t_sync
        self.registry: dict[int, NodeTrack] = {}
        self.session_rewards: dict[int, float] = {}
        self.last_sync = -math.inf
        self._dirty = True
        self._last_members: frozenset[int] = frozenset()

    def note_attempt_completed(self) -> None:
        """An attempt in this zone finished; RI must be recomputed at next sync."""
        self._dirty = True

    def record_session_reward(self, session_id: int) -> float:
        """File a session's reward from the zone's cumulative waste totals."""
        r = session_reward(self.zone.ew, self.zone.et)
        self.session_rewards[session_id] = r
        self._dirty = True
        return r

    def sync_due(self, t_now: float) -> bool:
        return t_now - self.last_sync >= self.t_sync

    def sync(
        self,
        t_now: float,
        nodes: Mapping[int, NodeState],
        reward_states: Mapping[int, NodeRewardState],
    ) -> list[tuple[int, float]]:
        """Refresh registry and geometry stats, recompute RI when stale.

        Returns the per-node relay charges for the zone-state broadcast (one
        transmission per live member at its minimum level, in power units;
        the engine converts to joules and applies the drain rule). An empty
        zone broadcasts nothing.
        """
        zone = self.zone
        members = sorted(zone.member_nodes)
        for m in members:
            n = nodes[m]
            self.registry[m] = NodeTrack(n.position, t_now, n.residual_energy, n.max_velocity)
        for m in [k for k in self.registry if k not in zone.member_nodes]:
            del self.registry[m]

        if len(members) >= 2:
            zone.theta = _membership_diameter(members, nodes)
        else:
            zone.theta = zone.diagonal
        if members:
            zone.av_rad = math.fsum(nodes[m].radio_range for m in members) / len(members)
            n_bar = math.fsum(_neighbor_count(nodes[m], nodes) for m in members) / len(members)
            if n_bar > 0.0:
                # isolated zones keep the previous value so hop-count
                # quantities stay finite; flood branching never drops below 1
                zone.phi = n_bar
                zone.ng = max(1.0, n_bar)
        member_set = frozenset(members)
        if self._dirty or member_set != self._last_members:
            zone.reward_ri = zone_reward(
                [reward_states[m].total() for m in members if m in reward_states],
                self.session_rewards.values(),
            )
            self._dirty = False
            self._last_members = member_set
        self.last_sync = t_now
        return [(m, nodes[m].min_power) for m in members if nodes[m].alive]


def session_reporter(src: int, zone: ZoneState, nodes: Mapping[int, NodeState]) -> int | None:
    """Node that files the session reward: the source while it is still a
    member, else the zone's lowest-id peripheral member, else nobody."""
    if src in zone.member_nodes:
        return src
    peripherals = sorted(
        m for m in zone.member_nodes if nodes[m].is_peripheral and nodes[m].alive
    )
    return peripherals[0] if peripherals else None


class NetworkController:
    """Aggregates zone rewards on the slow timer, serving a cached sum between."""

    def __init__(self, t_net: float = T_NET_DEFAULT) -> None:
        self.t_net = t_net
        self.last_collect = -math.inf
        self.cached = 0.0

    def collect(self, t_now: float, zones: list[ZoneState]) -> float:
        if t_now - self.last_collect >= self.t_net:
            self.cached = network_reward(z.reward_ri for z in zones)
            self.last_collect = t_now
        return self.cached
