"""Beacons and the per-node position table."""

from __future__ import annotations

import math
import random
import struct
from dataclasses import dataclass, field

from .geometry import Position

BEACON_FORMAT = struct.Struct(">Iff")
BEACON_SIZE = BEACON_FORMAT.size  # 12
MAX_NODE_ID = 2**32 - 1

# jitter window around the nominal beacon interval
JITTER_LOW = 0.75
JITTER_HIGH = 1.25


class BeaconCodecError(ValueError):
    """A beacon cannot be encoded or a byte image is malformed."""


@dataclass(frozen=True)
class Beacon:
    sender: int
    position: Position


def encode_beacon(beacon: Beacon) -> bytes:
    """Pack as big-endian uint32 id followed by x and y as float32."""
    if not 0 <= beacon.sender <= MAX_NODE_ID:
        raise BeaconCodecError(f"node id {beacon.sender} does not fit in 32 bits")
    try:
        return BEACON_FORMAT.pack(beacon.sender, beacon.position.x, beacon.position.y)
    except (OverflowError, struct.error) as exc:
        raise BeaconCodecError(f"cannot encode {beacon}: {exc}") from None


def decode_beacon(data: bytes) -> Beacon:
    if len(data) != BEACON_SIZE:
        raise BeaconCodecError(f"beacon must be {BEACON_SIZE} bytes, got {len(data)}")
    sender, x, y = BEACON_FORMAT.unpack(data)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise BeaconCodecError("beacon carries a non-finite coordinate")
    return Beacon(sender, Position(x, y))


def next_beacon_time(node: int, interval: float, now: float, rng: random.Random) -> float:
    """Next beacon instant, jittered uniformly over [0.75, 1.25] intervals.

    ``node`` is unused by the draw itself: each node owns its own stream.
    """
    if interval <= 0:
        raise ValueError("beacon interval must be positive")
    return now + rng.uniform(JITTER_LOW * interval, JITTER_HIGH * interval)


@dataclass
class NeighborEntry:
    id: int
    position: Position
    last_heard: float


@dataclass
class NeighborTable:
    owner: int
    timeout: float
    entries: dict[int, NeighborEntry] = field(default_factory=dict)

    def on_heard(self, nid: int, position: Position, now: float) -> None:
        if nid == self.owner:
            raise ValueError(f"node {self.owner} cannot list itself as a neighbor")
        self.entries[nid] = NeighborEntry(nid, position, now)

    def evict_stale(self, now: float) -> list[int]:
        """Drop entries silent for longer than the timeout; return their ids."""
        stale = sorted(nid for nid, e in self.entries.items() if now - e.last_heard > self.timeout)
        for nid in stale:
            del self.entries[nid]
        return stale

    def neighbors(self) -> list[tuple[int, Position]]:
        return [(nid, self.entries[nid].position) for nid in sorted(self.entries)]

    def __contains__(self, nid: int) -> bool:
        return nid in self.entries

    def __len__(self) -> int:
        return len(self.entries)
