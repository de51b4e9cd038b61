"""Brute-force reference computations and random scenario builders used to
check the simulator from the outside."""

from __future__ import annotations

import itertools
import random
from typing import Mapping

import networkx as nx

from .geometry import Position, Segment, distance, planarize, segments_cross
from .scenario import Flow, ScenarioConfig, ScenarioError, validate_scenario

Nodes = Mapping[int, Position]


def unit_disk_graph(nodes: Nodes, radio_range: float) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(nodes)
    for u, v in itertools.combinations(nodes, 2):
        if distance(nodes[u], nodes[v]) <= radio_range:
            g.add_edge(u, v)
    return g


def bfs_reachable(nodes: Nodes, radio_range: float) -> set[tuple[int, int]]:
    """Ordered pairs (u, v) joined by a unit-disk path, including (u, u)."""
    pairs = set()
    for component in nx.connected_components(unit_disk_graph(nodes, radio_range)):
        pairs.update(itertools.product(component, repeat=2))
    return pairs


def hop_distances(nodes: Nodes, radio_range: float) -> dict[int, dict[int, int]]:
    return dict(nx.all_pairs_shortest_path_length(unit_disk_graph(nodes, radio_range)))


def planar_graph(nodes: Nodes, radio_range: float, method: str) -> nx.Graph:
    """Union of every node's local planarization.

    Raises if the two endpoints of an edge disagree, which the filters'
    symmetry rules out.
    """
    udg = unit_disk_graph(nodes, radio_range)
    kept: dict[int, set[int]] = {}
    for u in nodes:
        local = [(v, nodes[v]) for v in sorted(udg[u])]
        kept[u] = {v for v, _ in planarize(nodes[u], local, method)}
    g = nx.Graph()
    g.add_nodes_from(nodes)
    for u, vs in kept.items():
        for v in vs:
            if u not in kept[v]:
                raise AssertionError(f"{method} edge {u}-{v} kept by only one endpoint")
            g.add_edge(u, v)
    return g


def crossing_pairs(graph: nx.Graph, nodes: Nodes) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """All pairs of edges that properly cross (edges sharing a node are skipped)."""
    edges = [tuple(sorted(e)) for e in graph.edges]
    found = []
    for e, f in itertools.combinations(edges, 2):
        if set(e) & set(f):
            continue
        if segments_cross(Segment(nodes[e[0]], nodes[e[1]]), Segment(nodes[f[0]], nodes[f[1]])):
            found.append((e, f))
    return found


def edge_set(graph: nx.Graph) -> set[tuple[int, int]]:
    return {tuple(sorted(e)) for e in graph.edges}


def random_nodes(rng: random.Random, count: int, width: float, height: float,
                 x0: float = 0.0, y0: float = 0.0, first_id: int = 0) -> dict[int, Position]:
    return {
        first_id + i: Position(x0 + rng.uniform(0.0, width), y0 + rng.uniform(0.0, height))
        for i in range(count)
    }


def _all_pairs_flows(nodes: Nodes, start: float) -> list[Flow]:
    return [Flow(s, d, start, 0.0, 1) for s, d in itertools.permutations(sorted(nodes), 2)]


def _usable(config: ScenarioConfig) -> bool:
    try:
        validate_scenario(config)
    except ScenarioError:
        return False
    return True


def connected_scenario(seed: int, count: int = 30, side: float = 300.0, radio_range: float = 100.0,
                       planarization: str = "GG", all_pairs: bool = True) -> ScenarioConfig:
    """Static uniform scenario redrawn until its unit-disk graph is connected.

    With ``all_pairs`` every ordered pair gets one packet after a 2-interval warmup.
    """
    rng = random.Random(f"connected:{seed}")
    while True:
        nodes = random_nodes(rng, count, side, side)
        config = ScenarioConfig(radio_range=radio_range, planarization=planarization,
                                duration=10.0, seed=seed, nodes=nodes)
        if nx.is_connected(unit_disk_graph(nodes, radio_range)) and _usable(config):
            break
    if all_pairs:
        config.flows = _all_pairs_flows(nodes, 2.0 * config.beacon_interval)
    return config


def disconnected_scenario(seed: int, per_cluster: int = 15, width: float = 100.0, height: float = 300.0,
                          gap: float = 200.0, radio_range: float = 100.0,
                          planarization: str = "GG") -> ScenarioConfig:
    """Two clusters, each internally connected, separated by more than the radio range."""
    if gap <= radio_range:
        raise ValueError("gap must exceed the radio range")
    rng = random.Random(f"disconnected:{seed}")
    while True:
        left = random_nodes(rng, per_cluster, width, height)
        right = random_nodes(rng, per_cluster, width, height, x0=width + gap, first_id=per_cluster)
        if not all(nx.is_connected(unit_disk_graph(c, radio_range)) for c in (left, right)):
            continue
        nodes = {**left, **right}
        config = ScenarioConfig(radio_range=radio_range, planarization=planarization,
                                duration=10.0, seed=seed, nodes=nodes)
        if _usable(config):
            break
    config.flows = _all_pairs_flows(nodes, 2.0 * config.beacon_interval)
    return config
