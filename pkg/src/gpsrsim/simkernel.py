"""Discrete-event engine: event queue, unit-disk radio, waypoint mobility,
trace output and the simulation world that ties the GPSR pieces together."""

from __future__ import annotations

import bisect
import heapq
import logging
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Sequence, TextIO, Union

from .forwarding import (
    ENTER_PERIM,
    EXIT_PERIM,
    Deliver,
    Drop,
    DropReason,
    Forward,
    GpsrHeader,
    Mode,
    RouterView,
    handle_packet,
)
from .geometry import Position, distance
from .neighbor import Beacon, NeighborTable, next_beacon_time
from .scenario import ScenarioConfig, Waypoint

log = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    pass


class EventKind(Enum):
    TRANSMIT_BEACON = "TransmitBeacon"
    RADIO_DELIVER = "RadioDeliver"
    EVICT_CHECK = "EvictCheck"
    ORIGINATE_PACKET = "OriginatePacket"
    MOBILITY_UPDATE = "MobilityUpdate"
    SIMULATION_END = "SimulationEnd"


@dataclass
class Event:
    time: float
    sequence: int
    kind: EventKind = field(compare=False)
    payload: Any = field(default=None, compare=False)


class EventQueue:
    """Future-event set popped in (time, sequence) order; ties are FIFO."""

    def __init__(self):
        self._heap: list[tuple[float, int, Event]] = []
        self._sequence = 0
        self.now = 0.0

    def schedule(self, time: float, kind: EventKind, payload: Any = None) -> Event:
        if time < self.now:
            raise SimulationError(f"cannot schedule {kind.value} at {time} before now={self.now}")
        event = Event(time, self._sequence, kind, payload)
        self._sequence += 1
        heapq.heappush(self._heap, (time, event.sequence, event))
        return event

    def peek_time(self) -> Optional[float]:
        return self._heap[0][0] if self._heap else None

    def pop(self) -> Event:
        event = heapq.heappop(self._heap)[2]
        self.now = event.time
        return event

    def __len__(self) -> int:
        return len(self._heap)


def position_at(initial: Position, waypoints: Sequence[Waypoint], t: float) -> Position:
    """Piecewise-linear position along ``initial``@0 followed by ``waypoints``.

    Holds the last waypoint afterwards; at repeated waypoint times the later
    entry wins (an instantaneous jump).
    """
    if not waypoints:
        return initial
    times = [0.0] + [w.t for w in waypoints]
    points = [initial] + [w.position for w in waypoints]
    i = bisect.bisect_right(times, t) - 1
    if i < 0:
        return initial
    if i >= len(times) - 1:
        return points[-1]
    t0, t1 = times[i], times[i + 1]
    a, b = points[i], points[i + 1]
    frac = (t - t0) / (t1 - t0)
    return Position(a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y))


@dataclass(frozen=True)
class RadioModel:
    range: float
    delay: float = 0.001
    loss: float = 0.0

    def reaches(self, a: Position, b: Position) -> bool:
        return distance(a, b) <= self.range


@dataclass(frozen=True)
class DataFrame:
    sender: int
    sender_position: Position
    next_hop: int
    header: GpsrHeader


@dataclass(frozen=True)
class TraceRecord:
    time: float
    tag: str
    node: int
    x: float
    y: float
    packet: Optional[int] = None
    src: Optional[int] = None
    dst: Optional[int] = None
    mode: Optional[str] = None
    extra: Union[str, int, None] = None

    def format(self) -> str:
        def opt(v):
            return "-" if v is None else str(v)

        return (
            f"{self.time:.6f} {self.tag} {self.node} {opt(self.packet)} {opt(self.src)} "
            f"{opt(self.dst)} {opt(self.mode)} {self.x:.6f} {self.y:.6f} {opt(self.extra)}"
        )


TRACE_TAGS = (
    "SEND", "FWD", "RECV", "DROP", "BEACON", "HEARD", "EVICT", ENTER_PERIM, EXIT_PERIM, "MOVE",
)


class TraceWriter:
    """Appends one line per record; refuses records that go back in time."""

    def __init__(self, stream: Optional[TextIO] = None, keep: bool = False):
        self.stream = stream
        self.records: Optional[list[TraceRecord]] = [] if keep else None
        self._last_time = float("-inf")

    def emit(self, record: TraceRecord) -> None:
        if record.time < self._last_time:
            raise SimulationError(f"trace record at {record.time} after {self._last_time}")
        if record.tag not in TRACE_TAGS:
            raise SimulationError(f"unknown trace tag {record.tag}")
        self._last_time = record.time
        if self.stream is not None:
            self.stream.write(record.format() + "\n")
        if self.records is not None:
            self.records.append(record)


@dataclass
class PacketRecord:
    packet_id: int
    src: int
    dst: int
    created: float
    outcome: Optional[str] = None  # DELIVERED or a drop reason
    hops: int = 0
    path: list = field(default_factory=list)  # (node, position, mode) per handling node


STATS_FIELDS = (
    "seed", "originated", "delivered", "dropped_unreachable", "dropped_no_neighbors",
    "dropped_ttl", "dropped_lost", "in_flight", "delivery_ratio", "mean_hops",
    "greedy_hops", "perimeter_hops", "perimeter_entries", "perimeter_exits",
    "beacons_sent", "hop_counts",
)


@dataclass
class SimStats:
    seed: int = 0
    originated: int = 0
    delivered: int = 0
    dropped_unreachable: int = 0
    dropped_no_neighbors: int = 0
    dropped_ttl: int = 0
    dropped_lost: int = 0
    in_flight: int = 0
    hop_counts: list[int] = field(default_factory=list)
    greedy_hops: int = 0
    perimeter_hops: int = 0
    perimeter_entries: int = 0
    perimeter_exits: int = 0
    beacons_sent: int = 0
    packets: dict[int, PacketRecord] = field(default_factory=dict, repr=False)

    @property
    def dropped(self) -> int:
        return self.dropped_unreachable + self.dropped_no_neighbors + self.dropped_ttl + self.dropped_lost

    def as_row(self) -> dict:
        row = {name: getattr(self, name) for name in STATS_FIELDS if hasattr(self, name)}
        row["delivery_ratio"] = f"{self.delivered / self.originated:.6f}" if self.originated else ""
        row["mean_hops"] = f"{sum(self.hop_counts) / len(self.hop_counts):.6f}" if self.hop_counts else ""
        row["hop_counts"] = ";".join(str(h) for h in self.hop_counts)
        return row


_DROP_COUNTERS = {
    DropReason.UNREACHABLE: "dropped_unreachable",
    DropReason.NO_NEIGHBORS: "dropped_no_neighbors",
    DropReason.TTL: "dropped_ttl",
}
LOST = "LOST"


class SimNode:
    """One simulated station: trajectory, position table and private RNG streams."""

    def __init__(self, nid: int, initial: Position, waypoints: Sequence[Waypoint], timeout: float, seed: int):
        self.id = nid
        self.initial = initial
        self.waypoints = list(waypoints)
        self.table = NeighborTable(nid, timeout)
        self.jitter_rng = random.Random(f"{seed}:jitter:{nid}")
        self.loss_rng = random.Random(f"{seed}:loss:{nid}")

    def position_at(self, t: float) -> Position:
        return position_at(self.initial, self.waypoints, t)


class Simulation:
    """A world built from one scenario. Call ``run()`` once."""

    def __init__(self, config: ScenarioConfig, trace: Optional[TraceWriter] = None, seed: Optional[int] = None):
        self.config = config
        self.seed = config.seed if seed is None else seed
        self.trace = trace or TraceWriter()
        self.queue = EventQueue()
        self.radio = RadioModel(config.radio_range, config.propagation_delay, config.loss_probability)
        self.nodes = {
            nid: SimNode(nid, pos, config.mobility.get(nid, ()), config.neighbor_timeout, self.seed)
            for nid, pos in sorted(config.nodes.items())
        }
        self.stats = SimStats(seed=self.seed)
        self._live: set[int] = set()
        self._next_packet_id = 0
        self._seed_events()

    @property
    def now(self) -> float:
        return self.queue.now

    def _seed_events(self) -> None:
        q, b = self.queue, self.config.beacon_interval
        q.schedule(self.config.duration, EventKind.SIMULATION_END)
        for nid, node in self.nodes.items():
            for t in sorted({wp.t for wp in node.waypoints}):
                q.schedule(t, EventKind.MOBILITY_UPDATE, nid)
        for nid, node in self.nodes.items():
            q.schedule(node.jitter_rng.uniform(0.0, b), EventKind.TRANSMIT_BEACON, nid)
        for nid in self.nodes:
            q.schedule(b, EventKind.EVICT_CHECK, nid)
        for i, flow in enumerate(self.config.flows):
            if flow.count > 0:
                q.schedule(flow.start, EventKind.ORIGINATE_PACKET, (i, 0))

    def run(self, until: Optional[float] = None) -> SimStats:
        limit = self.config.duration if until is None else min(until, self.config.duration)
        handlers = {
            EventKind.TRANSMIT_BEACON: self._on_beacon_timer,
            EventKind.RADIO_DELIVER: self._on_radio_deliver,
            EventKind.EVICT_CHECK: self._on_evict_check,
            EventKind.ORIGINATE_PACKET: self._on_originate,
            EventKind.MOBILITY_UPDATE: self._on_mobility,
        }
        while self.queue:
            if self.queue.peek_time() > limit:
                break
            event = self.queue.pop()
            if event.kind is EventKind.SIMULATION_END:
                break
            handlers[event.kind](event.payload)
        self.stats.in_flight = len(self._live)
        log.debug("run finished at t=%s: %s", self.now, self.stats)
        return self.stats

    def _emit(self, tag: str, nid: int, pos: Position, **kw) -> None:
        self.trace.emit(TraceRecord(self.now, tag, nid, pos.x, pos.y, **kw))

    def transmit(self, sender: int, frame: Union[Beacon, DataFrame]) -> list[int]:
        """Schedule delivery to every node in range that survives the loss draw."""
        node = self.nodes[sender]
        origin = node.position_at(self.now)
        receivers = []
        for nid, other in self.nodes.items():
            if nid == sender or not self.radio.reaches(origin, other.position_at(self.now)):
                continue
            if self.radio.loss > 0.0 and node.loss_rng.random() < self.radio.loss:
                continue
            receivers.append(nid)
            self.queue.schedule(self.now + self.radio.delay, EventKind.RADIO_DELIVER, (nid, frame))
        return receivers

    def _on_beacon_timer(self, nid: int) -> None:
        node = self.nodes[nid]
        pos = node.position_at(self.now)
        self._emit("BEACON", nid, pos)
        self.stats.beacons_sent += 1
        self.transmit(nid, Beacon(nid, pos))
        when = next_beacon_time(nid, self.config.beacon_interval, self.now, node.jitter_rng)
        self.queue.schedule(when, EventKind.TRANSMIT_BEACON, nid)

    def _on_evict_check(self, nid: int) -> None:
        node = self.nodes[nid]
        evicted = node.table.evict_stale(self.now)
        if evicted:
            pos = node.position_at(self.now)
            for gone in evicted:
                self._emit("EVICT", nid, pos, extra=gone)
        self.queue.schedule(self.now + self.config.beacon_interval, EventKind.EVICT_CHECK, nid)

    def _on_mobility(self, nid: int) -> None:
        self._emit("MOVE", nid, self.nodes[nid].position_at(self.now))

    def _on_radio_deliver(self, payload) -> None:
        receiver, frame = payload
        node = self.nodes[receiver]
        if isinstance(frame, Beacon):
            node.table.on_heard(frame.sender, frame.position, self.now)
            self._emit("HEARD", receiver, frame.position, extra=frame.sender)
            return
        node.table.on_heard(frame.sender, frame.sender_position, self.now)
        self._emit("HEARD", receiver, frame.sender_position, packet=frame.header.packet_id, extra=frame.sender)
        if receiver == frame.next_hop:
            self._route(receiver, frame.header, (frame.sender, frame.sender_position))

    def _on_originate(self, payload) -> None:
        index, k = payload
        flow = self.config.flows[index]
        if k + 1 < flow.count:
            self.queue.schedule(self.now + flow.interval, EventKind.ORIGINATE_PACKET, (index, k + 1))
        pid = self._next_packet_id
        self._next_packet_id += 1
        header = GpsrHeader(
            source=flow.src,
            destination=flow.dst,
            dest_position=self.nodes[flow.dst].position_at(self.now),
            packet_id=pid,
        )
        self.stats.originated += 1
        self.stats.packets[pid] = PacketRecord(pid, flow.src, flow.dst, self.now)
        self._live.add(pid)
        pos = self.nodes[flow.src].position_at(self.now)
        self._emit("SEND", flow.src, pos, packet=pid, src=flow.src, dst=flow.dst, mode=header.mode.value)
        self._route(flow.src, header, None)

    def _finish(self, header: GpsrHeader, outcome: str) -> None:
        self._live.discard(header.packet_id)
        self.stats.packets[header.packet_id].outcome = outcome

    def _route(self, nid: int, header: GpsrHeader, arrived_from) -> None:
        node = self.nodes[nid]
        pos = node.position_at(self.now)
        view = RouterView(nid, pos, node.table.neighbors(), self.config.planarization, self.config.ttl)
        decision = handle_packet(view, header, arrived_from)
        out = decision.header
        record = self.stats.packets[header.packet_id]
        record.path.append((nid, pos, header.mode))
        ids = dict(packet=header.packet_id, src=header.source, dst=header.destination)

        for tag in decision.transitions:
            if tag == ENTER_PERIM:
                self.stats.perimeter_entries += 1
                self._emit(tag, nid, pos, mode=Mode.PERIMETER.value, **ids)
            else:
                self.stats.perimeter_exits += 1
                self._emit(tag, nid, pos, mode=Mode.GREEDY.value, **ids)

        if isinstance(decision, Deliver):
            self.stats.delivered += 1
            self.stats.hop_counts.append(out.hop_count)
            record.hops = out.hop_count
            self._emit("RECV", nid, pos, mode=out.mode.value, extra=out.hop_count, **ids)
            self._finish(out, "DELIVERED")
        elif isinstance(decision, Drop):
            setattr(self.stats, _DROP_COUNTERS[decision.reason],
                    getattr(self.stats, _DROP_COUNTERS[decision.reason]) + 1)
            record.hops = out.hop_count
            self._emit("DROP", nid, pos, mode=out.mode.value, extra=decision.reason.value, **ids)
            self._finish(out, decision.reason.value)
        else:
            assert isinstance(decision, Forward)
            if out.mode is Mode.GREEDY:
                self.stats.greedy_hops += 1
            else:
                self.stats.perimeter_hops += 1
            self._emit("FWD", nid, pos, mode=out.mode.value, extra=decision.next_hop, **ids)
            frame = DataFrame(nid, pos, decision.next_hop, out)
            if decision.next_hop not in self.transmit(nid, frame):
                # next hop out of range or the frame was lost on the air
                self.stats.dropped_lost += 1
                record.hops = out.hop_count
                self._emit("DROP", nid, pos, mode=out.mode.value, extra=LOST, **ids)
                self._finish(out, LOST)


def run_scenario(config: ScenarioConfig, trace: Optional[TraceWriter] = None, seed: Optional[int] = None) -> SimStats:
    return Simulation(config, trace, seed).run()
