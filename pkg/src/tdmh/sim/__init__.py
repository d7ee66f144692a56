"""Discrete-event simulation of a TDMH network and the measurement campaigns."""

from tdmh.sim.dataplane import DataPlane, stream_reliability
from tdmh.sim.engine import Simulator, run_scenario
from tdmh.sim.metrics import (Metrics, TraceEvent, convergence_phases, format_trace,
                              measure_convergence_after_failure, measure_formation_time,
                              measure_stream_reliability, metrics_csv, parse_trace)
from tdmh.sim.power import CurrentModel, DataLoad, estimate_power
from tdmh.sim.scenario import Fault, FaultKind, Scenario, StreamRequest
from tdmh.sim.topologies import hexagonal, line, office_graph, star

__all__ = [
    "CurrentModel", "DataLoad", "DataPlane", "Fault", "FaultKind", "Metrics", "Scenario",
    "Simulator", "StreamRequest", "TraceEvent", "convergence_phases", "estimate_power",
    "format_trace", "hexagonal", "line", "measure_convergence_after_failure",
    "measure_formation_time", "measure_stream_reliability", "metrics_csv", "office_graph",
    "parse_trace", "run_scenario", "star", "stream_reliability",
]
