"""Command line entry point: ``gpsrsim run|validate|graph``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .oracles import edge_set, planar_graph, unit_disk_graph
from .scenario import ScenarioConfig, ScenarioError, load_scenario
from .simkernel import STATS_FIELDS, Simulation, SimulationError, SimStats, TraceWriter

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2

log = logging.getLogger("gpsrsim")


def _trace_path(base: Optional[str], seed: int, repeat: int) -> Optional[Path]:
    if base is None:
        return None
    path = Path(base)
    if repeat == 1:
        return path
    return path.with_name(f"{path.stem}.seed{seed}{path.suffix}")


def _run_one(config: ScenarioConfig, seed: int, trace_path: Optional[Path]) -> SimStats:
    if trace_path is None:
        return Simulation(config, seed=seed).run()
    with open(trace_path, "w", newline="\n") as fh:
        return Simulation(config, TraceWriter(fh), seed=seed).run()


def write_stats(path, rows: Sequence[SimStats]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=STATS_FIELDS, lineterminator="\n")
        writer.writeheader()
        for stats in rows:
            writer.writerow(stats.as_row())


def cmd_run(args) -> int:
    config = load_scenario(args.scenario)
    base_seed = config.seed if args.seed is None else args.seed
    seeds = [base_seed + i for i in range(args.repeat)]
    traces = [_trace_path(args.trace, s, args.repeat) for s in seeds]
    if args.repeat > 1 and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, [config] * len(seeds), seeds, traces))
    else:
        results = [_run_one(config, s, t) for s, t in zip(seeds, traces)]
    if args.stats:
        write_stats(args.stats, results)
    for stats in results:
        print(
            f"seed={stats.seed} originated={stats.originated} delivered={stats.delivered} "
            f"dropped={stats.dropped} in_flight={stats.in_flight} beacons={stats.beacons_sent}"
        )
    return EXIT_OK


def cmd_validate(args) -> int:
    config = load_scenario(args.scenario)
    waypoints = sum(len(w) for w in config.mobility.values())
    print(
        f"OK: {len(config.nodes)} nodes, {waypoints} waypoints, {len(config.flows)} flows, "
        f"R={config.radio_range} B={config.beacon_interval} T={config.neighbor_timeout} "
        f"{config.planarization}"
    )
    return EXIT_OK


def _write_edges(path: Path, edges, nodes) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["u", "v", "ux", "uy", "vx", "vy"])
        for u, v in sorted(edges):
            writer.writerow([u, v, nodes[u].x, nodes[u].y, nodes[v].x, nodes[v].y])


def full_graph_path(out) -> Path:
    out = Path(out)
    return out.with_name(f"{out.stem}.udg{out.suffix or '.csv'}")


def cmd_graph(args) -> int:
    """Planarized edges go to --out, the full unit-disk edges next to it."""
    config = load_scenario(args.scenario)
    nodes = config.nodes
    full = edge_set(unit_disk_graph(nodes, config.radio_range))
    planar = edge_set(planar_graph(nodes, config.radio_range, args.method))
    _write_edges(Path(args.out), planar, nodes)
    _write_edges(full_graph_path(args.out), full, nodes)
    print(f"{len(planar)} {args.method} edges -> {args.out}; {len(full)} unit-disk edges -> {full_graph_path(args.out)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpsrsim", description="GPSR discrete-event simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario")
    run.add_argument("--scenario", required=True)
    run.add_argument("--trace", help="trace file (per-seed suffix when --repeat > 1)")
    run.add_argument("--stats", help="CSV statistics, one row per run")
    run.add_argument("--seed", type=int, help="overrides the scenario seed")
    run.add_argument("--repeat", type=int, default=1, help="run seeds seed..seed+N-1")
    run.add_argument("--jobs", type=int, default=1, help="worker processes for --repeat")
    run.set_defaults(func=cmd_run)

    validate = sub.add_parser("validate", help="parse and check a scenario")
    validate.add_argument("--scenario", required=True)
    validate.set_defaults(func=cmd_validate)

    graph = sub.add_parser("graph", help="dump unit-disk and planarized edge lists as CSV")
    graph.add_argument("--scenario", required=True)
    graph.add_argument("--method", choices=("RNG", "GG"), type=str.upper, default="GG")
    graph.add_argument("--out", required=True)
    graph.set_defaults(func=cmd_graph)
    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "repeat", 1) < 1:
        print("error: --repeat must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SimulationError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run_cli())
