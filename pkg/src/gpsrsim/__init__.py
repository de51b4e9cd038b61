"""Discrete-event simulator for GPSR geographic routing."""

from .forwarding import DropReason, GpsrHeader, Mode, handle_packet
from .geometry import Position, Segment, distance, planarize, right_hand_next, segments_cross
from .neighbor import Beacon, NeighborTable, decode_beacon, encode_beacon
from .scenario import ScenarioConfig, load_scenario, parse_scenario, render_scenario
from .simkernel import SimStats, Simulation, TraceWriter, run_scenario

__version__ = "0.1.0"

__all__ = [
    "Beacon", "DropReason", "GpsrHeader", "Mode", "NeighborTable", "Position", "ScenarioConfig",
    "Segment", "SimStats", "Simulation", "TraceWriter", "decode_beacon", "distance", "encode_beacon",
    "handle_packet", "load_scenario", "parse_scenario", "planarize", "render_scenario",
    "right_hand_next", "run_scenario", "segments_cross",
]
