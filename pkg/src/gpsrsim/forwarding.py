"""GPSR per-packet decisions: greedy hops, perimeter entry, right-hand face
traversal with face changes, recovery back to greedy, and drop detection."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

from .geometry import (
    Neighbor,
    Position,
    Segment,
    distance,
    planarize,
    right_hand_next,
    segments_cross,
)

DEFAULT_TTL = 128

# A face change must move the face-entry point at least this much closer to
# the destination; stops re-crossing an edge whose crossing point is already Lf.
FACE_CHANGE_MARGIN = 1e-9

ENTER_PERIM = "ENTER_PERIM"
EXIT_PERIM = "EXIT_PERIM"


class Mode(str, Enum):
    GREEDY = "GREEDY"
    PERIMETER = "PERIMETER"


class DropReason(str, Enum):
    NO_NEIGHBORS = "NO_NEIGHBORS"
    UNREACHABLE = "UNREACHABLE"
    TTL = "TTL"


@dataclass(frozen=True)
class GpsrHeader:
    source: int
    destination: int
    dest_position: Position
    mode: Mode = Mode.GREEDY
    lp: Optional[Position] = None
    lf: Optional[Position] = None
    e0: Optional[Tuple[int, int]] = None
    hop_count: int = 0
    packet_id: int = 0

    def __post_init__(self):
        perimeter_state = (self.lp, self.lf, self.e0)
        if self.mode is Mode.GREEDY and any(v is not None for v in perimeter_state):
            raise ValueError("greedy header must not carry lp/lf/e0")
        if self.mode is Mode.PERIMETER and any(v is None for v in perimeter_state):
            raise ValueError("perimeter header needs lp, lf and e0")
        if self.hop_count < 0:
            raise ValueError("negative hop count")

    def to_greedy(self) -> "GpsrHeader":
        return replace(self, mode=Mode.GREEDY, lp=None, lf=None, e0=None)


@dataclass(frozen=True)
class Deliver:
    header: GpsrHeader
    transitions: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Forward:
    next_hop: int
    header: GpsrHeader
    transitions: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Drop:
    reason: DropReason
    header: GpsrHeader
    transitions: Tuple[str, ...] = ()


Decision = Union[Deliver, Forward, Drop]


@dataclass
class RouterView:
    """What a node knows when it handles a packet."""

    id: int
    position: Position
    neighbors: Sequence[Neighbor]
    planarization: str = "GG"
    ttl: int = DEFAULT_TTL


def greedy_next_hop(
    self_pos: Position, dest_pos: Position, neighbors: Sequence[Neighbor]
) -> Optional[Neighbor]:
    """Neighbor strictly closer to the destination than we are, closest first."""
    own = distance(self_pos, dest_pos)
    best = None
    best_key = None
    for nid, pos in neighbors:
        d = distance(pos, dest_pos)
        if d >= own:
            continue
        key = (d, nid)
        if best_key is None or key < best_key:
            best, best_key = (nid, pos), key
    return best


def _hop(next_hop: int, header: GpsrHeader, transitions=(), **changes) -> Forward:
    return Forward(next_hop, replace(header, hop_count=header.hop_count + 1, **changes), transitions)


def enter_perimeter(
    header: GpsrHeader,
    self_id: int,
    self_pos: Position,
    planar_neighbors: Sequence[Neighbor],
    transitions: Tuple[str, ...] = (),
) -> Decision:
    transitions = transitions + (ENTER_PERIM,)
    if not planar_neighbors:
        return Drop(DropReason.NO_NEIGHBORS, header, transitions)
    nid, _ = right_hand_next(self_pos, header.dest_position, planar_neighbors)
    return _hop(
        nid,
        header,
        transitions,
        mode=Mode.PERIMETER,
        lp=self_pos,
        lf=self_pos,
        e0=(self_id, nid),
    )


def perimeter_step(
    header: GpsrHeader,
    self_id: int,
    self_pos: Position,
    arrived_from: Optional[Neighbor],
    planar_neighbors: Sequence[Neighbor],
    neighbors: Optional[Sequence[Neighbor]] = None,
) -> Decision:
    """One perimeter-mode hop.

    ``neighbors`` is the full table used if the packet recovers to greedy;
    it defaults to the planar set.
    """
    if header.mode is not Mode.PERIMETER:
        raise ValueError("perimeter_step needs a perimeter-mode header")
    if not planar_neighbors:
        return Drop(DropReason.NO_NEIGHBORS, header)
    dest = header.dest_position

    if distance(self_pos, dest) < distance(header.lp, dest):
        greedy = header.to_greedy()
        found = greedy_next_hop(self_pos, dest, planar_neighbors if neighbors is None else neighbors)
        if found is not None:
            return _hop(found[0], greedy, (EXIT_PERIM,))
        return enter_perimeter(greedy, self_id, self_pos, planar_neighbors, (EXIT_PERIM,))

    reference = arrived_from[1] if arrived_from is not None else dest
    cid, cpos = right_hand_next(self_pos, reference, planar_neighbors)

    lf = header.lf
    face_changed = False
    # each change moves lf strictly closer to dest, so this terminates
    for _ in range(len(planar_neighbors) + 1):
        if lf == dest:
            break
        crossing = segments_cross(Segment(self_pos, cpos), Segment(lf, dest))
        if crossing is None or not distance(crossing, dest) < distance(lf, dest) - FACE_CHANGE_MARGIN:
            break
        lf = crossing
        face_changed = True
        cid, cpos = right_hand_next(self_pos, cpos, planar_neighbors)

    if face_changed:
        return _hop(cid, header, lf=lf, e0=(self_id, cid))
    if header.e0 == (self_id, cid):
        return Drop(DropReason.UNREACHABLE, header)
    return _hop(cid, header)


def handle_packet(
    view: RouterView, header: GpsrHeader, arrived_from: Optional[Neighbor] = None
) -> Decision:
    """Route one packet at one node; ``arrived_from`` is None at the source."""
    if view.id == header.destination:
        return Deliver(header)
    if header.hop_count >= view.ttl:
        return Drop(DropReason.TTL, header)
    if header.mode is Mode.GREEDY:
        found = greedy_next_hop(view.position, header.dest_position, view.neighbors)
        if found is not None:
            return _hop(found[0], header)
        planar = planarize(view.position, view.neighbors, view.planarization)
        return enter_perimeter(header, view.id, view.position, planar)
    planar = planarize(view.position, view.neighbors, view.planarization)
    return perimeter_step(header, view.id, view.position, arrived_from, planar, view.neighbors)
