"""Centralized stream scheduling at the master."""

from tdmh.scheduler.codec import decode_schedule, encode_schedule, format_schedule, parse_schedule
from tdmh.scheduler.greedy import schedule_streams
from tdmh.scheduler.latency import latency_bounds
from tdmh.scheduler.routing import disjoint_paths, route_paths
from tdmh.scheduler.schedule import Path, Schedule, Transmission
from tdmh.scheduler.streams import Action, Stream, StreamManagementElement, StreamState
from tdmh.scheduler.verify import Rule, Violation, verify_schedule, violated_rules

__all__ = [
    "Action", "Path", "Rule", "Schedule", "Stream", "StreamManagementElement", "StreamState",
    "Transmission", "Violation", "decode_schedule", "disjoint_paths", "encode_schedule",
    "format_schedule", "latency_bounds", "parse_schedule", "route_paths", "schedule_streams",
    "verify_schedule", "violated_rules",
]
