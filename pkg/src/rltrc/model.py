"""Domain types and planar geometry shared by the whole simulator.

Positions are (x, y) tuples in meters. The arena is a rectangle tiled by
axis-aligned rectangular zones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

Point = tuple[float, float]


def distance(a: Point, b: Point) -> float:
    """Euclidean distance between two points."""
    return math.hypot(b[0] - a[0], b[1] - a[1])


@dataclass
class NodeState:
    """A sensor node: position, kinematics, energy budget, radio capabilities.

    power_levels must be strictly ascending and positive; a node is alive
    exactly while residual_energy > 0; peripheral nodes never move.
    """

    id: int
    position: Point
    max_velocity: float = 0.0
    residual_energy: float = 1.0
    power_levels: tuple[float, ...] = (1.0,)
    radio_range: float = 10.0
    min_rcv: float = 1.0
    zone_id: int = 0
    is_peripheral: bool = False
    velocity: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        levels = tuple(float(p) for p in self.power_levels)
        if not levels:
            raise ValueError("node %d has no power levels" % self.id)
        if levels[0] <= 0 or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("power levels must be positive and strictly ascending")
        self.power_levels = levels
        if self.is_peripheral and self.max_velocity != 0.0:
            raise ValueError("peripheral nodes are static")

    @property
    def alive(self) -> bool:
        return self.residual_energy > 0.0

    @property
    def max_power(self) -> float:
        return self.power_levels[-1]

    @property
    def min_power(self) -> float:
        return self.power_levels[0]


def in_radio_range(sender: NodeState, receiver_pos: Point) -> bool:
    """True when receiver_pos lies inside the sender's radio circle.

    The boundary is inclusive: distance == radio_range is in range.
    """
    return distance(sender.position, receiver_pos) <= sender.radio_range


@dataclass
class ZoneState:
    """One rectangular zone plus the aggregates its controller keeps synced.

    theta is the maximum inter-node distance (membership diameter, falling
    back to the rectangle diagonal when fewer than two members are present),
    phi/ng the average downlink-neighbor count, av_rad the average radio
    range, (ew, et) the cumulative wasted energy/time, reward_ri the zone
    reward.
    """

    id: int
    x0: float
    y0: float
    x1: float
    y1: float
    theta: float = 1.0
    phi: float = 1.0
    av_rad: float = 1.0
    ng: float = 1.0
    member_nodes: set[int] = field(default_factory=set)
    live_sessions: set[int] = field(default_factory=set)
    ew: float = 0.0
    et: float = 0.0
    reward_ri: float = 0.0

    def contains(self, p: Point) -> bool:
        return self.x0 <= p[0] <= self.x1 and self.y0 <= p[1] <= self.y1

    @property
    def diagonal(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    @property
    def center(self) -> Point:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)


def make_zones(width: float, height: float, count: int, av_rad: float = 25.0) -> list[ZoneState]:
    """Tile a width x height arena with `count` rectangular zones.

    The grid uses the most square factorization with columns >= rows, ids
    assigned row-major. Initial theta is the rectangle diagonal and phi/ng
    start at their invariant floors until the first controller sync.
    """
    if count < 1:
        raise ValueError("zone count must be >= 1")
    rows = max(r for r in range(1, int(math.isqrt(count)) + 1) if count % r == 0)
    cols = count // rows
    zones = []
    for r in range(rows):
        for c in range(cols):
            z = ZoneState(
                id=r * cols + c,
                x0=width * c / cols,
                y0=height * r / rows,
                x1=width * (c + 1) / cols,
                y1=height * (r + 1) / rows,
                av_rad=av_rad,
            )
            z.theta = z.diagonal
            zones.append(z)
    return zones


def zone_of(point: Point, zones: list[ZoneState]) -> int:
    """Zone id containing the point; boundary ties go to the lowest zone id.

    Raises ValueError for points outside every zone (outside the arena).
    """
    for z in zones:
        if z.contains(point):
            return z.id
    raise ValueError("point %r lies outside the arena" % (point,))


@dataclass
class TransmissionRecord:
    """One attempt of one packet over one hop."""

    hop_start: int
    hop_end: int
    turn: int
    power_used: float
    t_send: float
    t_ack: float | None = None


@dataclass
class SessionRecord:
    """A data session between two nodes with its currently installed route."""

    id: int
    src: int
    dst: int
    route: tuple[int, ...] | None = None
    reward: float = 1.0
    live: bool = True
    transmissions: list[TransmissionRecord] = field(default_factory=list)

    @property
    def hop_count(self) -> int:
        return 0 if self.route is None else len(self.route) - 1
