"""Scenario files: a sectioned, line-oriented text format.

    [params]
    radio_range = 100.0
    [nodes]        # id x y
    0 0.0 0.0
    [mobility]     # id t x y
    [flows]        # src dst start interval count
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .geometry import Position, distance

COLLINEAR_TOLERANCE = 1e-9
MAX_SEED = 2**64 - 1
MAX_NODE_ID = 2**32 - 1

SECTIONS = ("params", "nodes", "mobility", "flows")


class ScenarioError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Waypoint:
    t: float
    position: Position


@dataclass(frozen=True)
class Flow:
    src: int
    dst: int
    start: float
    interval: float
    count: int


@dataclass
class ScenarioConfig:
    radio_range: float = 100.0
    beacon_interval: float = 1.0
    neighbor_timeout: Optional[float] = None  # None -> 4.5 beacon intervals
    planarization: str = "GG"
    duration: float = 60.0
    seed: int = 0
    ttl: int = 128
    propagation_delay: float = 0.001
    loss_probability: float = 0.0
    nodes: dict[int, Position] = field(default_factory=dict)
    mobility: dict[int, list[Waypoint]] = field(default_factory=dict)
    flows: list[Flow] = field(default_factory=list)

    def __post_init__(self):
        if self.neighbor_timeout is None:
            self.neighbor_timeout = 4.5 * self.beacon_interval
        self.planarization = self.planarization.upper()


_PARAM_TYPES = {
    "radio_range": float,
    "beacon_interval": float,
    "neighbor_timeout": float,
    "planarization": str,
    "duration": float,
    "seed": int,
    "ttl": int,
    "propagation_delay": float,
    "loss_probability": float,
}


def _number(token: str, kind, line: int, what: str):
    try:
        value = kind(token)
    except ValueError:
        raise ScenarioError(f"bad {what} {token!r}", line) from None
    if kind is float and not math.isfinite(value):
        raise ScenarioError(f"{what} must be finite", line)
    return value


def _fields(tokens: list[str], n: int, line: int, section: str) -> list[str]:
    if len(tokens) != n:
        raise ScenarioError(f"[{section}] rows need {n} fields, got {len(tokens)}", line)
    return tokens


def parse_scenario(text: str) -> ScenarioConfig:
    params: dict = {}
    nodes: dict[int, Position] = {}
    mobility: dict[int, list[Waypoint]] = {}
    flows: list[Flow] = []
    lines: dict[tuple, int] = {}
    section = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("["):
            if not body.endswith("]"):
                raise ScenarioError(f"malformed section header {body!r}", lineno)
            section = body[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ScenarioError(f"unknown section [{section}]", lineno)
            continue
        if section is None:
            raise ScenarioError("content before any section header", lineno)

        if section == "params":
            key, sep, value = body.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not value:
                raise ScenarioError(f"expected 'key = value', got {body!r}", lineno)
            if key not in _PARAM_TYPES:
                raise ScenarioError(f"unknown key {key!r}", lineno)
            if key in params:
                raise ScenarioError(f"duplicate key {key!r}", lineno)
            params[key] = _number(value, _PARAM_TYPES[key], lineno, key)
            lines[("param", key)] = lineno
            continue

        tokens = body.split()
        if section == "nodes":
            nid, x, y = _fields(tokens, 3, lineno, section)
            nid = _number(nid, int, lineno, "node id")
            if nid in nodes:
                raise ScenarioError(f"duplicate node id {nid}", lineno)
            nodes[nid] = Position(_number(x, float, lineno, "x"), _number(y, float, lineno, "y"))
            lines[("node", nid)] = lineno
        elif section == "mobility":
            nid, t, x, y = _fields(tokens, 4, lineno, section)
            nid = _number(nid, int, lineno, "node id")
            wp = Waypoint(
                _number(t, float, lineno, "time"),
                Position(_number(x, float, lineno, "x"), _number(y, float, lineno, "y")),
            )
            mobility.setdefault(nid, []).append(wp)
            lines[("waypoint", nid, len(mobility[nid]) - 1)] = lineno
        else:
            src, dst, start, interval, count = _fields(tokens, 5, lineno, section)
            flows.append(
                Flow(
                    _number(src, int, lineno, "flow source"),
                    _number(dst, int, lineno, "flow destination"),
                    _number(start, float, lineno, "flow start"),
                    _number(interval, float, lineno, "flow interval"),
                    _number(count, int, lineno, "flow count"),
                )
            )
            lines[("flow", len(flows) - 1)] = lineno

    config = ScenarioConfig(**params, nodes=nodes, mobility=mobility, flows=flows)
    validate_scenario(config, lines)
    return config


def load_scenario(path) -> ScenarioConfig:
    return parse_scenario(Path(path).read_text())


def _min_altitude(a: Position, b: Position, c: Position) -> float:
    twice_area = abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
    longest = max(distance(a, b), distance(b, c), distance(a, c))
    return twice_area / longest


def validate_scenario(config: ScenarioConfig, lines: Optional[dict] = None) -> None:
    """Raise ScenarioError on the first violated invariant."""
    lines = lines or {}

    def fail(message, key=None):
        raise ScenarioError(message, lines.get(key))

    c = config
    if not c.radio_range > 0:
        fail("radio_range must be positive", ("param", "radio_range"))
    if not c.beacon_interval > 0:
        fail("beacon_interval must be positive", ("param", "beacon_interval"))
    if not c.neighbor_timeout > c.beacon_interval:
        fail("neighbor_timeout must exceed beacon_interval", ("param", "neighbor_timeout"))
    if c.planarization not in ("RNG", "GG"):
        fail(f"planarization must be RNG or GG, got {c.planarization!r}", ("param", "planarization"))
    if not c.duration > 0:
        fail("duration must be positive", ("param", "duration"))
    if not 0 <= c.seed <= MAX_SEED:
        fail("seed must be an unsigned 64-bit integer", ("param", "seed"))
    if c.ttl < 1:
        fail("ttl must be at least 1", ("param", "ttl"))
    if c.propagation_delay < 0:
        fail("propagation_delay must be nonnegative", ("param", "propagation_delay"))
    if not 0.0 <= c.loss_probability <= 1.0:
        fail("loss_probability must lie in [0, 1]", ("param", "loss_probability"))

    for nid in c.nodes:
        if not 0 <= nid <= MAX_NODE_ID:
            fail(f"node id {nid} outside 32-bit range", ("node", nid))

    for nid, waypoints in c.mobility.items():
        if nid not in c.nodes:
            fail(f"waypoints for undeclared node {nid}", ("waypoint", nid, 0))
        previous = 0.0
        for i, wp in enumerate(waypoints):
            if wp.t < previous:
                fail(f"waypoint times for node {nid} must be nondecreasing from 0", ("waypoint", nid, i))
            if wp.t == 0.0 and wp.position != c.nodes[nid]:
                fail(f"waypoint at t=0 for node {nid} differs from its initial position", ("waypoint", nid, i))
            previous = wp.t

    for i, f in enumerate(c.flows):
        for endpoint in (f.src, f.dst):
            if endpoint not in c.nodes:
                fail(f"flow references undeclared node {endpoint}", ("flow", i))
        if f.src == f.dst:
            fail("flow source and destination coincide", ("flow", i))
        if f.start < 0 or f.interval < 0 or f.count < 0:
            fail("flow start, interval and count must be nonnegative", ("flow", i))

    ids = list(c.nodes)
    for u, v in itertools.combinations(ids, 2):
        if c.nodes[u] == c.nodes[v]:
            fail(f"nodes {u} and {v} share position {c.nodes[u]}", ("node", v))

    r = c.radio_range
    adjacency = {
        u: {v for v in ids if v != u and distance(c.nodes[u], c.nodes[v]) <= r} for u in ids
    }
    for u in ids:
        for v, w in itertools.combinations(sorted(adjacency[u]), 2):
            if u < v and w in adjacency[v]:
                a, b, d = c.nodes[u], c.nodes[v], c.nodes[w]
                if _min_altitude(a, b, d) <= COLLINEAR_TOLERANCE:
                    fail(f"nodes {u}, {v}, {w} are collinear", ("node", w))


def _fmt(value: float) -> str:
    return repr(float(value))


def render_scenario(config: ScenarioConfig) -> str:
    """Text that parses back to an equal config."""
    c = config
    out = [
        "[params]",
        f"radio_range = {_fmt(c.radio_range)}",
        f"beacon_interval = {_fmt(c.beacon_interval)}",
        f"neighbor_timeout = {_fmt(c.neighbor_timeout)}",
        f"planarization = {c.planarization}",
        f"duration = {_fmt(c.duration)}",
        f"seed = {c.seed}",
        f"ttl = {c.ttl}",
        f"propagation_delay = {_fmt(c.propagation_delay)}",
        f"loss_probability = {_fmt(c.loss_probability)}",
        "[nodes]  # id x y",
    ]
    out += [f"{nid} {_fmt(p.x)} {_fmt(p.y)}" for nid, p in c.nodes.items()]
    out.append("[mobility]  # id t x y")
    for nid, waypoints in c.mobility.items():
        out += [f"{nid} {_fmt(w.t)} {_fmt(w.position.x)} {_fmt(w.position.y)}" for w in waypoints]
    out.append("[flows]  # src dst start interval count")
    out += [f"{f.src} {f.dst} {_fmt(f.start)} {_fmt(f.interval)} {f.count}" for f in c.flows]
    return "\n".join(out) + "\n"
