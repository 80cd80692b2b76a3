"""Deterministic discrete-event simulator.

One logical clock, one master RNG, a single heap ordered by (fire_time,
sequence). All iteration over node or zone collections is in sorted order so
equal (config, seed) pairs replay the exact same trace.

World model: signals travel at the configured speed vs, so a data packet
sent over a hop of length d arrives after d/(2 vs) and its acknowledgement
returns d/vs after the send; the round trip therefore encodes the hop
distance the way the link estimators expect. The ground-truth channel is
linear attenuation with a per-pair coefficient plus bounded uniform noise.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from random import Random

from . import linkcache, policy, rewards
from .config import ConfigError, ScenarioConfig
from .control import (
    BroadcastCircle,
    NetworkController,
    NodeTrack,
    ZoneController,
    assign_zones,
    destination_lookup,
    session_reporter,
)
from .linkcache import CommCacheEntry, PacketRecord
from .metrics import (
    AttemptRow,
    MetricsLedger,
    MetricsReport,
    PacketStat,
    compute_metrics,
    windowed_waste_series,
)
from .model import NodeState, Point, SessionRecord, ZoneState, distance, make_zones, zone_of
from .policy import LinkSnapshot, SigmaInputs
from .rewards import (
    NodeRewardState,
    WasteLedger,
    accumulate_zone_waste,
    avg_hop_count,
    broadcast_cost,
    min_hop_count,
)


# ---------------------------------------------------------------------------
# channel

class Channel:
    """Ground-truth linear-attenuation radio with per-pair coefficients.

    Coefficients are drawn once per unordered node pair from a seed derived
    from the run seed and the pair, so they do not depend on event order.
    """

    def __init__(self, seed: int, alpha_min: float, alpha_max: float, noise_spread: float):
        self._seed = seed
        self._alpha_min = alpha_min
        self._alpha_max = alpha_max
        self.noise_spread = noise_spread
        self._alphas: dict[tuple[int, int], float] = {}

    def alpha(self, u: int, v: int) -> float:
        key = (u, v) if u <= v else (v, u)
        got = self._alphas.get(key)
        if got is None:
            pair_rng = Random("%d:alpha:%d:%d" % (self._seed, key[0], key[1]))
            got = pair_rng.uniform(self._alpha_min, self._alpha_max)
            self._alphas[key] = got
        return got


def propagate(tx_power: float, dist: float, alpha: float, noise_spread: float, rng: Random) -> float:
    """Received strength over the linear channel; never above the sent power."""
    noise = rng.uniform(-noise_spread, noise_spread) if noise_spread > 0.0 else 0.0
    return min(tx_power, tx_power - alpha * dist + noise)


# ---------------------------------------------------------------------------
# mobility

@dataclass
class MobilityState:
    waypoint: Point = (0.0, 0.0)
    speed: float = 0.0
    pause_until: float = 0.0
    velocity: tuple[float, float] = (0.0, 0.0)


def advance_toward(pos: Point, target: Point, step: float) -> Point:
    """Move `step` meters toward target, stopping exactly on it."""
    d = distance(pos, target)
    if d <= step or d == 0.0:
        return target
    f = step / d
    return (pos[0] + (target[0] - pos[0]) * f, pos[1] + (target[1] - pos[1]) * f)


def _reflect(x: float, lo: float, hi: float) -> float:
    # fold back into [lo, hi]; each pass shrinks the excess
    while x < lo or x > hi:
        if x < lo:
            x = 2.0 * lo - x
        else:
            x = 2.0 * hi - x
    return x


def mobility_step(
    node: NodeState,
    state: MobilityState,
    model: str,
    dt: float,
    t_now: float,
    rng: Random,
    arena: tuple[float, float],
    pause_max: float,
    accel: float,
) -> None:
    """Advance one mobile node by dt under the configured model."""
    if node.max_velocity <= 0.0:
        return
    w, h = arena
    if model == "random-waypoint":
        if t_now < state.pause_until:
            return
        if state.speed <= 0.0 or node.position == state.waypoint:
            state.waypoint = (rng.uniform(0.0, w), rng.uniform(0.0, h))
            state.speed = rng.uniform(0.05 * node.max_velocity, node.max_velocity)
        node.position = advance_toward(node.position, state.waypoint, state.speed * dt)
        if node.position == state.waypoint:
            state.pause_until = t_now + rng.uniform(0.0, pause_max)
            state.speed = 0.0
    elif model == "random-walk":
        heading = rng.uniform(0.0, 2.0 * math.pi)
        nx = node.position[0] + node.max_velocity * dt * math.cos(heading)
        ny = node.position[1] + node.max_velocity * dt * math.sin(heading)
        node.position = (_reflect(nx, 0.0, w), _reflect(ny, 0.0, h))
    elif model == "gaussian":
        vx = state.velocity[0] + rng.gauss(0.0, accel)
        vy = state.velocity[1] + rng.gauss(0.0, accel)
        speed = math.hypot(vx, vy)
        if speed > node.max_velocity:
            scale = node.max_velocity / speed
            vx, vy = vx * scale, vy * scale
        nx = node.position[0] + vx * dt
        ny = node.position[1] + vy * dt
        rx, ry = _reflect(nx, 0.0, w), _reflect(ny, 0.0, h)
        if rx != nx:
            vx = -vx
        if ry != ny:
            vy = -vy
        state.velocity = (vx, vy)
        node.position = (rx, ry)
    else:
        raise ValueError("unknown mobility model %r" % model)


# ---------------------------------------------------------------------------
# routing

def route_select(candidates: list[tuple[int, ...]]) -> tuple[int, ...]:
    """Minimum hop count, ties to the lexicographically smallest id sequence."""
    return min(candidates, key=lambda r: (len(r), r))


def shortest_route(
    adjacency: dict[int, list[int]], src: int, dst: int
) -> tuple[int, ...] | None:
    """Lexicographically smallest minimum-hop path over sorted adjacency.

    Breadth-first distances to dst, then a greedy descent picking the lowest
    id neighbor one step closer; equivalent to minimizing (hops, sequence).
    """
    if src == dst:
        return (src,)
    preds: dict[int, list[int]] = {n: [] for n in adjacency}
    for u, outs in adjacency.items():
        for v in outs:
            preds.setdefault(v, []).append(u)
    dist_to = {dst: 0}
    frontier = [dst]
    while frontier:
        nxt = []
        for v in frontier:
            for u in preds.get(v, ()):
                if u not in dist_to:
                    dist_to[u] = dist_to[v] + 1
                    nxt.append(u)
        frontier = nxt
    if src not in dist_to:
        return None
    path = [src]
    node = src
    while node != dst:
        node = min(
            v for v in adjacency.get(node, ()) if dist_to.get(v, -1) == dist_to[node] - 1
        )
        path.append(node)
    return tuple(path)


# ---------------------------------------------------------------------------
# per-node runtime

@dataclass
class QueuedPacket:
    pid: int
    session: int


@dataclass
class InFlight:
    """The one attempt a node may have on the air."""

    attempt_id: int
    pid: int
    session: int
    successor: int
    action: float             # power units booked, 0 when blocked
    t_sent: float
    row: AttemptRow


@dataclass
class NodeRuntime:
    queue: list[QueuedPacket] = field(default_factory=list)
    turn: int = 1
    turn_pid: int = -1                # packet the turn counter belongs to
    inflight: InFlight | None = None
    levels_used: dict[int, float] = field(default_factory=dict)  # successor -> last level
    seen: set[int] = field(default_factory=set)


@dataclass
class Session(SessionRecord):
    home_zone: int = 0
    started: bool = False
    discovering: bool = False
    next_hop: dict[int, int] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# simulator

class Simulator:
    def __init__(self, cfg: ScenarioConfig, seed: int | None = None):
        violations = cfg.validate()
        if violations:
            raise ConfigError(violations)
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        self.rng = Random(self.seed)
        self.t = 0.0
        self._seq = itertools.count()
        self._events: list[tuple[float, int, str, dict]] = []
        self._attempt_ids = itertools.count(1)
        self._pids = itertools.count(1)
        self.channel = Channel(self.seed, cfg.alpha_min, cfg.alpha_max, cfg.noise_spread)
        self.ledger = MetricsLedger(duration=cfg.duration)
        self.waste_ledger = WasteLedger()
        # per-packet acked-hop investment still eligible for write-off;
        # zeroed when written off so waste can never exceed investment
        self.packet_invested: dict[int, tuple[float, float]] = {}
        self._build_world()

    # -- construction -------------------------------------------------------

    def _build_world(self) -> None:
        cfg = self.cfg
        av_rad = (cfg.radio_range_min + cfg.radio_range_max) / 2.0
        self.zones = make_zones(cfg.arena_width, cfg.arena_height, cfg.zones, av_rad=av_rad)
        self.nodes: dict[int, NodeState] = {}
        nid = 0
        for z in self.zones:
            for spot in self._peripheral_spots(z, cfg.peripherals_per_zone):
                self.nodes[nid] = self._make_node(nid, spot, peripheral=True)
                nid += 1
        if nid + 2 > cfg.nodes:
            raise ConfigError(
                ["nodes=%d leaves fewer than 2 mobile nodes after %d peripherals"
                 % (cfg.nodes, nid)]
            )
        self.mobile_ids = list(range(nid, cfg.nodes))
        for _ in range(nid, cfg.nodes):
            pos = (self.rng.uniform(0.0, cfg.arena_width), self.rng.uniform(0.0, cfg.arena_height))
            self.nodes[nid] = self._make_node(nid, pos, peripheral=False)
            nid += 1
        assign_zones(self.nodes, self.zones)
        self.controllers = [ZoneController(z, cfg.t_sync) for z in self.zones]
        self.network = NetworkController(cfg.t_net)
        self.global_registry: dict[int, NodeTrack] = {}
        self.reward_states = {n: NodeRewardState() for n in self.nodes}
        self.caches: dict[int, dict[int, CommCacheEntry]] = {n: {} for n in self.nodes}
        self.runtime = {n: NodeRuntime() for n in self.nodes}
        self.mobility_states = {n: MobilityState() for n in self.mobile_ids}
        self.sessions: dict[int, Session] = {}
        for sid in range(cfg.sessions):
            src, dst = self.rng.sample(self.mobile_ids, 2)
            self.sessions[sid] = Session(id=sid, src=src, dst=dst)
        self.ledger.initial_energy = {n: self.nodes[n].residual_energy for n in self.nodes}

    def _peripheral_spots(self, z: ZoneState, count: int) -> list[Point]:
        """Static relay positions just inside the zone's internal edges."""
        inset = 1.0
        edges = []
        if z.x1 < self.cfg.arena_width:
            edges.append("right")
        if z.x0 > 0.0:
            edges.append("left")
        if z.y1 < self.cfg.arena_height:
            edges.append("top")
        if z.y0 > 0.0:
            edges.append("bottom")
        spots: list[Point] = []
        if not edges:
            return spots
        rounds = (count + len(edges) - 1) // len(edges)
        for i in range(count):
            edge = edges[i % len(edges)]
            frac = (i // len(edges) + 1) / (rounds + 1)
            if edge == "right":
                spots.append((z.x1 - inset, z.y0 + (z.y1 - z.y0) * frac))
            elif edge == "left":
                spots.append((z.x0 + inset, z.y0 + (z.y1 - z.y0) * frac))
            elif edge == "top":
                spots.append((z.x0 + (z.x1 - z.x0) * frac, z.y1 - inset))
            else:
                spots.append((z.x0 + (z.x1 - z.x0) * frac, z.y0 + inset))
        return spots

    def _make_node(self, nid: int, pos: Point, peripheral: bool) -> NodeState:
        cfg = self.cfg
        k = self.rng.randint(cfg.level_count_min, cfg.level_count_max)
        if k == 1:
            levels = (cfg.level_value_max,)
        else:
            span = cfg.level_value_max - cfg.level_value_min
            levels = tuple(cfg.level_value_min + span * i / (k - 1) for i in range(k))
        return NodeState(
            id=nid,
            position=pos,
            max_velocity=0.0 if peripheral else self.rng.uniform(cfg.vmax_min, cfg.vmax_max),
            residual_energy=self.rng.uniform(cfg.energy_min, cfg.energy_max),
            power_levels=levels,
            radio_range=self.rng.uniform(cfg.radio_range_min, cfg.radio_range_max),
            min_rcv=cfg.min_rcv,
            is_peripheral=peripheral,
        )

    # -- event machinery ----------------------------------------------------

    def _push(self, t: float, kind: str, **payload) -> None:
        heapq.heappush(self._events, (t, next(self._seq), kind, payload))

    def run(self) -> MetricsReport:
        cfg = self.cfg
        if cfg.duration > 0.0:
            self._push(0.0, "controller-sync")
            self._push(cfg.mobility_dt, "mobility-step")
            if cfg.policy == "beacon-prr-like":
                self._push(cfg.beacon_period, "beacon")
            for sid in sorted(self.sessions):
                self._push(self.rng.uniform(0.0, cfg.session_start_max), "session-start", sid=sid)
            while self._events and self._events[0][0] <= cfg.duration:
                t, _, kind, payload = heapq.heappop(self._events)
                self.t = t
                getattr(self, "_on_" + kind.replace("-", "_"))(**payload)
        self.ledger.final_energy = {n: self.nodes[n].residual_energy for n in self.nodes}
        report = compute_metrics(self.ledger, policy=cfg.policy)
        if cfg.duration > 0.0:
            report.series = windowed_waste_series(self.ledger, cfg.duration / 20.0)
        return report

    # -- energy -------------------------------------------------------------

    def _debit(self, node_id: int, joules: float, kind: str, message: bool) -> bool:
        """Apply the drain rule; count the message only when fully paid."""
        node = self.nodes[node_id]
        paid = min(joules, node.residual_energy)
        if paid > 0.0:
            node.residual_energy -= paid
            self.ledger.record_debit(self.t, node_id, kind, paid)
        ok = paid >= joules and joules > 0.0
        if ok and message:
            self.ledger.count_message()
        return ok

    # -- periodic events ----------------------------------------------------

    def _on_controller_sync(self) -> None:
        assign_zones(self.nodes, self.zones)
        airtime = self.cfg.airtime
        for ctl in self.controllers:
            for sid in sorted(self.sessions):
                sn = self.sessions[sid]
                if sn.started and sn.live and sn.home_zone == ctl.zone.id:
                    ctl.record_session_reward(sid)
            for member, level in ctl.sync(self.t, self.nodes, self.reward_states):
                self._debit(member, level * airtime, "zone-state", message=True)
            self.global_registry.update(ctl.registry)
        self.network.collect(self.t, self.zones)
        self._push(self.t + self.cfg.t_sync, "controller-sync")

    def _on_mobility_step(self) -> None:
        arena = (self.cfg.arena_width, self.cfg.arena_height)
        for nid in self.mobile_ids:
            node = self.nodes[nid]
            if node.alive:
                mobility_step(
                    node,
                    self.mobility_states[nid],
                    self.cfg.mobility,
                    self.cfg.mobility_dt,
                    self.t,
                    self.rng,
                    arena,
                    self.cfg.pause_max,
                    self.cfg.gaussian_accel,
                )
        self._push(self.t + self.cfg.mobility_dt, "mobility-step")

    def _on_beacon(self) -> None:
        airtime = self.cfg.airtime
        for nid in sorted(self.nodes):
            node = self.nodes[nid]
            if node.alive:
                self._debit(nid, node.min_power * airtime, "beacon", message=True)
        self._push(self.t + self.cfg.beacon_period, "beacon")

    # -- sessions and packets -----------------------------------------------

    def _on_session_start(self, sid: int) -> None:
        sn = self.sessions[sid]
        sn.started = True
        src = self.nodes[sn.src]
        sn.home_zone = zone_of(src.position, self.zones)
        self.zones[sn.home_zone].live_sessions.add(sid)
        self._push(self.t, "packet-gen", sid=sid)
        self._request_route(sn, waste=None)

    def _on_packet_gen(self, sid: int) -> None:
        sn = self.sessions[sid]
        if not sn.live:
            return
        pid = next(self._pids)
        self.ledger.packets[pid] = PacketStat(session=sid, generated_at=self.t)
        if not self.nodes[sn.src].alive:
            self._drop_packet(pid, "node-death")
            self._fail_session(sn)
            return
        self.runtime[sn.src].queue.append(QueuedPacket(pid=pid, session=sid))
        self._push(self.t + self.cfg.proc_delay, "send-attempt", node=sn.src)
        gap = self._inter_arrival()
        if self.t + gap <= self.cfg.duration:
            self._push(self.t + gap, "packet-gen", sid=sid)

    def _inter_arrival(self) -> float:
        cfg = self.cfg
        mean = (cfg.inter_arrival_min + cfg.inter_arrival_max) / 2.0
        # bounded Poisson arrivals: resample until inside the configured band
        for _ in range(1000):
            g = self.rng.expovariate(1.0 / mean)
            if cfg.inter_arrival_min <= g <= cfg.inter_arrival_max:
                return g
        return mean

    # -- transmission -------------------------------------------------------

    def _on_send_attempt(self, node: int) -> None:
        rt = self.runtime[node]
        sender = self.nodes[node]
        if not sender.alive:
            for qp in rt.queue:
                self._drop_packet(qp.pid, "node-death")
            rt.queue.clear()
            return
        if rt.inflight is not None or not rt.queue:
            return
        qp = rt.queue[0]
        if qp.pid != rt.turn_pid:
            rt.turn = 1
            rt.turn_pid = qp.pid
        sn = self.sessions[qp.session]
        if not sn.live:
            rt.queue.pop(0)
            self._drop_packet(qp.pid, "session-failed")
            self._push(self.t, "send-attempt", node=node)
            return
        succ = sn.next_hop.get(node)
        if succ is None:
            if node == sn.src or sn.route is None:
                return  # waiting for a route; install resolves this queue
            rt.queue.pop(0)
            self._drop_packet(qp.pid, "route-invalidated")
            self._push(self.t, "send-attempt", node=node)
            return
        entry = self.caches[node].setdefault(
            succ,
            CommCacheEntry(successor_id=succ, sig_atn=self.cfg.prior_sig_atn,
                           timestamp_begin=self.t),
        )
        if self.cfg.policy == "rl-trc":
            level = self._select_rltrc(node, succ, entry, rt, qp, sn)
            if level is None:
                return  # escalated to link failure
        else:
            level = self._select_baseline(node, succ, entry, rt)
        rt.levels_used[succ] = level
        self._transmit(node, succ, level, entry, rt, qp, sn)

    def _select_rltrc(
        self,
        node: int,
        succ: int,
        entry: CommCacheEntry,
        rt: NodeRuntime,
        qp: QueuedPacket,
        sn: Session,
    ) -> float | None:
        sender = self.nodes[node]
        dist_est = 0.0
        if len(entry.last_two) == 2:
            dist_est = linkcache.predict_displacement(
                entry.approx_velocity, self.t, entry.last_ack_time
            )
            if linkcache.should_drop(dist_est, sender.radio_range):
                self._link_failure(node, succ, entry, rt, qp, sn, immediate=True)
                return None
        p_thres = linkcache.power_threshold(
            entry.sig_atn, dist_est, self.nodes[succ].min_rcv
        )
        avail = linkcache.available_levels(sender.power_levels, p_thres)
        if not avail:
            self._link_failure(node, succ, entry, rt, qp, sn, immediate=True)
            return None
        sigma = policy.compute_sigma(
            SigmaInputs(self.zones[sender.zone_id].reward_ri, self.network.cached)
        )
        return policy.select_power_level(avail, sigma, entry.reliable, self.rng)

    def _select_baseline(
        self, node: int, succ: int, entry: CommCacheEntry, rt: NodeRuntime
    ) -> float:
        sender = self.nodes[node]
        last = entry.last_two[-1] if entry.last_two else None
        snap = LinkSnapshot(
            current_level=rt.levels_used.get(succ, sender.max_power),
            last_rss=last.rss if last else None,
            prr=entry.prr,
            sig_atn=entry.sig_atn,
            distance=self.cfg.vs * last.rtt if last else None,
            min_rcv=self.nodes[succ].min_rcv,
        )
        return policy.baseline_decide(
            self.cfg.policy, snap, sender.power_levels,
            rssi_high=self.cfg.rssi_high, rssi_low=self.cfg.rssi_low,
        )

    def _transmit(
        self,
        node: int,
        succ: int,
        level: float,
        entry: CommCacheEntry,
        rt: NodeRuntime,
        qp: QueuedPacket,
        sn: Session,
    ) -> None:
        cfg = self.cfg
        sender = self.nodes[node]
        attempt_id = next(self._attempt_ids)
        sent = self._debit(node, level * cfg.airtime, "tx", message=True)
        action = level if sent else 0.0
        row = AttemptRow(self.t, qp.pid, sn.id, node, succ, rt.turn, action,
                         "pending" if sent else "blocked")
        self.ledger.attempts.append(row)
        rt.inflight = InFlight(attempt_id, qp.pid, sn.id, succ, action, self.t, row)
        self.ledger.packets[qp.pid].attempts += 1
        if sent:
            # self-reward accrues per action actually transmitted
            self.reward_states[node].apply_action(sender.max_power, level)
            linkcache.record_tx(entry)
            receiver = self.nodes[succ]
            d = distance(sender.position, receiver.position)
            rss = propagate(level, d, self.channel.alpha(node, succ),
                            cfg.noise_spread, self.rng)
            if receiver.alive and d <= sender.radio_range and rss >= receiver.min_rcv:
                self._push(
                    self.t + 0.5 * d / cfg.vs,
                    "packet-arrival",
                    node=succ,
                    pid=qp.pid,
                    sid=sn.id,
                    sender=node,
                    rss=rss,
                    level=level,
                    t_sent=self.t,
                    dist=d,
                    attempt_id=attempt_id,
                )
        self._push(self.t + cfg.tau_a, "ack-timeout", node=node, attempt_id=attempt_id)

    def _ack_level(self, receiver_id: int, sender_id: int, data_level: float, data_rss: float) -> float:
        """Reverse-link level sized from the measured loss of the data just
        heard, with a noise-spread margin; maximum when nothing clears."""
        receiver = self.nodes[receiver_id]
        loss = data_level - data_rss
        thres = loss + self.nodes[sender_id].min_rcv + self.cfg.noise_spread
        avail = linkcache.available_levels(receiver.power_levels, thres)
        return avail[0] if avail else receiver.max_power

    def _on_packet_arrival(
        self,
        node: int,
        pid: int,
        sid: int,
        sender: int,
        rss: float,
        level: float,
        t_sent: float,
        dist: float,
        attempt_id: int,
    ) -> None:
        cfg = self.cfg
        receiver = self.nodes[node]
        if not receiver.alive:
            return
        rx_cost = cfg.rx_cost_fraction * receiver.min_power * cfg.airtime
        if not self._debit(node, rx_cost, "rx", message=False):
            return
        # acknowledgement back across the same hop, lossy like any signal
        ack_level = self._ack_level(node, sender, level, rss)
        self.ledger.count_message()
        ack_rss = propagate(ack_level, dist, self.channel.alpha(node, sender),
                            cfg.noise_spread, self.rng)
        if ack_rss >= self.nodes[sender].min_rcv and dist <= receiver.radio_range:
            self._push(
                t_sent + dist / cfg.vs,
                "ack-arrival",
                node=sender,
                succ=node,
                attempt_id=attempt_id,
                t_sent=t_sent,
                level=level,
                rss=rss,
            )
        rt = self.runtime[node]
        if pid in rt.seen:
            return
        rt.seen.add(pid)
        sn = self.sessions[sid]
        stat = self.ledger.packets[pid]
        if node == sn.dst:
            stat.status = "delivered"
            stat.delivered_at = self.t
            self.packet_invested.pop(pid, None)
            return
        rt.queue.append(QueuedPacket(pid=pid, session=sid))
        self._push(self.t + cfg.proc_delay, "send-attempt", node=node)

    def _on_ack_arrival(
        self, node: int, succ: int, attempt_id: int, t_sent: float, level: float, rss: float
    ) -> None:
        rt = self.runtime[node]
        fl = rt.inflight
        if fl is None or fl.attempt_id != attempt_id:
            return
        rt.inflight = None
        fl.row.outcome = "ack"
        sender = self.nodes[node]
        entry = self.caches[node][succ]
        linkcache.record_ack(
            entry,
            PacketRecord(t_msg=t_sent, t_ack=self.t, tx_power=level, rss=rss),
            self.cfg.vs,
            sender.radio_range,
        )
        if self.cfg.policy == "rl-trc":
            self.reward_states[node].apply_ack(
                succ, entry.prr, entry.rss_over_tpl, entry.recent_trend
            )
        if sender.alive:
            self.controllers[sender.zone_id].note_attempt_completed()
        sn = self.sessions[fl.session]
        rtt = self.t - t_sent
        self.ledger.record_invest(self.t, sn.home_zone, fl.action, rtt)
        inv_e, inv_t = self.packet_invested.get(fl.pid, (0.0, 0.0))
        self.packet_invested[fl.pid] = (inv_e + fl.action, inv_t + rtt)
        if rt.queue and rt.queue[0].pid == fl.pid:
            rt.queue.pop(0)
        rt.turn = 1
        if rt.queue:
            self._push(self.t + self.cfg.proc_delay, "send-attempt", node=node)

    def _on_ack_timeout(self, node: int, attempt_id: int) -> None:
        rt = self.runtime[node]
        fl = rt.inflight
        if fl is None or fl.attempt_id != attempt_id:
            return
        rt.inflight = None
        if fl.row.outcome == "pending":
            fl.row.outcome = "timeout"
        sn = self.sessions[fl.session]
        self.ledger.record_invest(self.t, sn.home_zone, fl.action, self.cfg.tau_a)
        sender = self.nodes[node]
        if sender.alive:
            self.controllers[sender.zone_id].note_attempt_completed()
        if not rt.queue or rt.queue[0].pid != fl.pid:
            # the packet was withdrawn while the attempt was on the air
            self._push(self.t, "send-attempt", node=node)
            return
        qp = rt.queue[0]
        rt.turn += 1
        if rt.turn <= self.cfg.mx_atmpt:
            we, wt = rewards.transmission_waste(
                rt.turn, fl.action, self.cfg.tau_a, [], 0.0, 0.0, [], self.cfg.mx_atmpt
            )
            self._book_waste(sn.home_zone, we, wt)
            self._push(self.t, "send-attempt", node=node)
            return
        succ = sn.next_hop.get(node)
        entry = self.caches[node].get(succ) if succ is not None else None
        if succ is None or entry is None or not sn.live:
            rt.queue.pop(0)
            self._drop_packet(qp.pid, "route-invalidated")
            self._push(self.t, "send-attempt", node=node)
            return
        self._link_failure(node, succ, entry, rt, qp, sn, immediate=False,
                           last_action=fl.action)

    # -- failure / discovery ------------------------------------------------

    def _book_waste(self, zone_id: int, we: float, wt: float) -> None:
        if we or wt:
            accumulate_zone_waste(self.waste_ledger, zone_id, [(we, wt)])
            zone = self.zones[zone_id]
            zone.ew, zone.et = self.waste_ledger.zone_totals(zone_id)
            self.ledger.record_waste(self.t, zone_id, we, wt)

    def _zone_flood_terms(self, zone_ids: tuple[int, ...]) -> tuple[list[float], list[float]]:
        costs, times = [], []
        for zid in zone_ids:
            z = self.zones[zid]
            h = avg_hop_count(z.theta, z.phi, z.av_rad)
            costs.append(broadcast_cost(z.ng, h, self.cfg.broadcast_cost_cap))
            times.append(min_hop_count(z.theta, z.phi, z.av_rad) * self.cfg.t_hop)
        return costs, times

    def _link_failure(
        self,
        node: int,
        succ: int,
        entry: CommCacheEntry,
        rt: NodeRuntime,
        qp: QueuedPacket,
        sn: Session,
        immediate: bool,
        last_action: float = 0.0,
    ) -> None:
        """Exhausted or hopeless hop: grade the link, tell the source, rebuild."""
        cfg = self.cfg
        sender = self.nodes[node]
        linkcache.mark_reliability(entry, self.t)
        zone_here = self.zones[sender.zone_id]
        penalty = broadcast_cost(
            zone_here.ng,
            avg_hop_count(zone_here.theta, zone_here.phi, zone_here.av_rad),
            cfg.broadcast_cost_cap,
        )
        turn = rt.turn if immediate else cfg.mx_atmpt + 1
        if cfg.policy == "rl-trc":
            self.reward_states[node].apply_noack(succ, turn, cfg.mx_atmpt, penalty)
        self.controllers[sender.zone_id].note_attempt_completed()
        rt.queue.pop(0)
        rt.turn = 1
        # claim the packet's acked-hop investment exactly once
        inv_e, inv_t = self.packet_invested.pop(qp.pid, (0.0, 0.0))
        self._drop_packet(qp.pid, "link-breakage")
        # an immediate write-off never transmitted, and every earlier timeout
        # of this packet was already booked by the turn-advance path
        prev_e = last_action if not immediate else 0.0
        prev_t = cfg.tau_a if not immediate else 0.0
        # breakage notice travels back to the source at max level
        route = sn.route or ()
        back_hops = 0
        if node in route:
            idx = route.index(node)
            for relay in route[1 : idx + 1]:
                if self.nodes[relay].alive:
                    self._debit(relay, self.nodes[relay].max_power * cfg.airtime,
                                "control", message=True)
            back_hops = idx
        self._teardown_route(sn)
        self._push(
            self.t + back_hops * cfg.t_hop,
            "link-breakage",
            sid=sn.id,
            prev_e=prev_e,
            prev_t=prev_t,
            invested_e=inv_e,
            invested_t=inv_t,
        )
        if rt.queue:
            self._push(self.t, "send-attempt", node=node)

    def _teardown_route(self, sn: Session) -> None:
        """Queued packets stay put until the replacement route says whether
        their holder is still on the path."""
        sn.route = None
        sn.next_hop = {}

    def _on_link_breakage(
        self, sid: int, prev_e: float, prev_t: float, invested_e: float, invested_t: float
    ) -> None:
        sn = self.sessions[sid]
        if not sn.live:
            return
        if not self.nodes[sn.src].alive:
            self._fail_session(sn)
            return
        self._request_route(sn, waste=(prev_e, prev_t, invested_e, invested_t))

    def _request_route(
        self, sn: Session, waste: tuple[float, float, float, float] | None
    ) -> None:
        """Flood a route request within the destination's broadcast circle.

        When `waste` carries a failed hop's terms, the rediscovery books the
        full write-off against the session's home zone.
        """
        cfg = self.cfg
        sn.discovering = True
        circle = destination_lookup(sn.dst, self.t, self.global_registry, self.zones)
        corridor = self._corridor_zones(sn.src, circle)
        scope = self._flood_scope(sn.src, circle, corridor)
        self._charge_flood(scope)
        costs, times = self._zone_flood_terms(corridor)
        self.ledger.record_invest(self.t, sn.home_zone, math.fsum(costs), math.fsum(times))
        if waste is not None:
            prev_e, prev_t, inv_e, inv_t = waste
            we = prev_e + math.fsum(costs) + inv_e
            wt = prev_t + math.fsum(times) + inv_t
            self._book_waste(sn.home_zone, we, wt)
        route = self._discover_route(sn.src, sn.dst, scope)
        if route is None and len(scope) < len(self._alive_ids()):
            # the circle missed; fall back to one full flood
            scope = self._alive_ids()
            self._charge_flood(scope)
            all_zone_ids = tuple(z.id for z in self.zones)
            costs, times = self._zone_flood_terms(all_zone_ids)
            self.ledger.record_invest(self.t, sn.home_zone, math.fsum(costs), math.fsum(times))
            route = self._discover_route(sn.src, sn.dst, scope)
        if route is None:
            self._fail_session(sn)
            return
        hops = len(route) - 1
        for relay in reversed(route[1:]):
            if self.nodes[relay].alive:
                self._debit(relay, self.nodes[relay].max_power * cfg.airtime,
                            "control", message=True)
        self._push(self.t + 2.0 * hops * cfg.t_hop, "route-reply", sid=sn.id, route=route)

    def _alive_ids(self) -> list[int]:
        return [n for n in sorted(self.nodes) if self.nodes[n].alive]

    def _corridor_zones(self, src: int, circle: BroadcastCircle) -> tuple[int, ...]:
        """Contiguous zone id range covering the requester and the circle.

        Zones are side-by-side slices, so the request travels through every
        zone between the two endpoints.
        """
        ids = set(circle.spans_zones)
        ids.add(self.nodes[src].zone_id)
        return tuple(range(min(ids), max(ids) + 1))

    def _flood_scope(
        self, src: int, circle: BroadcastCircle, corridor: tuple[int, ...]
    ) -> list[int]:
        scope = {src}
        for nid in self._alive_ids():
            node = self.nodes[nid]
            if node.zone_id in corridor or circle.contains(node.position):
                scope.add(nid)
        return sorted(scope)

    def _charge_flood(self, scope: list[int]) -> None:
        for nid in scope:
            node = self.nodes[nid]
            if node.alive:
                self._debit(nid, node.max_power * self.cfg.airtime, "flood", message=True)

    def _discover_route(self, src: int, dst: int, scope: list[int]) -> tuple[int, ...] | None:
        """Links already graded unreliable are avoided; when that leaves no
        route at all they are allowed back in as a last resort."""
        live = [n for n in scope if self.nodes[n].alive or n == src]
        adjacency: dict[int, list[int]] = {n: [] for n in live}
        risky: dict[int, list[int]] = {n: [] for n in live}
        margin = self.cfg.route_margin
        for u in live:
            nu = self.nodes[u]
            # route links must leave slack for motion during their lifetime
            reach = max(nu.radio_range - margin, 0.0)
            for v in live:
                if u == v:
                    continue
                nv = self.nodes[v]
                d = distance(nu.position, nv.position)
                if d <= reach and nu.max_power - self.channel.alpha(u, v) * d >= nv.min_rcv:
                    entry = self.caches[u].get(v)
                    if entry is not None and not entry.reliable:
                        risky[u].append(v)
                    else:
                        adjacency[u].append(v)
        for outs in adjacency.values():
            outs.sort()
        if src not in adjacency or dst not in adjacency:
            return None
        route = shortest_route(adjacency, src, dst)
        if route is None:
            for u, outs in risky.items():
                adjacency[u] = sorted(adjacency[u] + outs)
            route = shortest_route(adjacency, src, dst)
        return route

    def _on_route_reply(self, sid: int, route: tuple[int, ...]) -> None:
        sn = self.sessions[sid]
        if not sn.live or not sn.discovering:
            return
        sn.discovering = False
        sn.route = tuple(route)
        sn.next_hop = {route[i]: route[i + 1] for i in range(len(route) - 1)}
        for i in range(len(route) - 1):
            u, v = route[i], route[i + 1]
            entry = self.caches[u].setdefault(
                v, CommCacheEntry(successor_id=v, sig_atn=self.cfg.prior_sig_atn)
            )
            linkcache.new_episode(entry, self.t)
        # forwarders still on the path resume; stranded holders give up
        on_path = set(route[:-1])
        for nid in sorted(self.runtime):
            rt = self.runtime[nid]
            if not any(q.session == sid for q in rt.queue):
                continue
            if nid in on_path:
                self._push(self.t + self.cfg.proc_delay, "send-attempt", node=nid)
                continue
            keep = []
            for q in rt.queue:
                held = rt.inflight is not None and rt.inflight.pid == q.pid
                if q.session == sid and not held:
                    self._drop_packet(q.pid, "route-invalidated")
                else:
                    keep.append(q)
            rt.queue = keep
            if rt.queue:
                self._push(self.t + self.cfg.proc_delay, "send-attempt", node=nid)

    def _fail_session(self, sn: Session) -> None:
        sn.live = False
        sn.discovering = False
        sn.route = None
        sn.next_hop = {}
        for nid in sorted(self.runtime):
            rt = self.runtime[nid]
            keep = []
            for q in rt.queue:
                if q.session == sn.id:
                    self._drop_packet(q.pid, "session-failed")
                else:
                    keep.append(q)
            rt.queue = keep
        self.zones[sn.home_zone].live_sessions.discard(sn.id)
        self._push(self.t, "session-end", sid=sn.id)

    def _on_session_end(self, sid: int) -> None:
        sn = self.sessions[sid]
        ctl = self.controllers[sn.home_zone]
        if session_reporter(sn.src, ctl.zone, self.nodes) is not None:
            ctl.record_session_reward(sid)

    def _drop_packet(self, pid: int, cause: str) -> None:
        stat = self.ledger.packets[pid]
        if stat.status == "pending":
            stat.status = "dropped-" + cause


def run(cfg: ScenarioConfig, seed: int | None = None) -> MetricsReport:
    """Run one scenario to completion and summarize it."""
    return Simulator(cfg, seed=seed).run()
