"""Measurement campaigns: formation, convergence, overhead, power, redundancy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

from tdmh.graph import NetworkGraph
from tdmh.netconfig import NetworkConfiguration, TileKind, control_overhead
from tdmh.scheduler.greedy import schedule_streams
from tdmh.scheduler.latency import latency_bounds
from tdmh.scheduler.streams import StreamManagementElement
from tdmh.sim.dataplane import stream_reliability
from tdmh.sim.engine import run_scenario
from tdmh.sim.metrics import Metrics
from tdmh.sim.power import CurrentModel, estimate_power
from tdmh.sim.scenario import Fault, Scenario
from tdmh.sim.topologies import OFFICE_STREAMS, hexagonal, office_graph


def uplink_slot_start(config: NetworkConfiguration, index: int) -> int:
    """Start time in ms of the ``index``-th uplink slot since time zero."""
    ups = [k for k, kind in enumerate(config.control_superframe) if kind is TileKind.UPLINK]
    cycle, pos = divmod(index, len(ups))
    return (cycle * len(config.control_superframe) + ups[pos]) * config.tile_duration_ms


def next_uplink_slot(config: NetworkConfiguration, node: int, after_ms: int) -> int:
    """Index of the first uplink slot owned by ``node`` starting at or after ``after_ms``."""
    n = config.round_slots
    first = (config.max_nodes - 1) - node
    ups = config.uplink_tiles_per_superframe
    approx = max(0, after_ms // config.control_superframe_ms * ups - ups)
    k = max(0, math.ceil((approx - first) / n))
    while uplink_slot_start(config, first + k * n) < after_ms:
        k += 1
    return first + k * n


def hex_config(n: int, max_nodes: Optional[int] = None, **overrides) -> NetworkConfiguration:
    """Configuration for a hexagonal run: flood depth covers the whole network."""
    g = hexagonal(n)
    depth = max(g.hops_from(0).values(), default=1)
    return NetworkConfiguration(max_nodes=max_nodes or n, max_hops=max(6, depth), **overrides)


def formation_run(n: int, max_nodes: Optional[int] = None, ids: str = "reverse",
                  seed: int = 0, duration_ms: int = 1_200_000, **config) -> Metrics:
    cfg = hex_config(n, max_nodes, **config)
    sc = Scenario(cfg, hexagonal(n, ids), duration_ms, seed=seed, name=f"formation-n{n}-{ids}")
    return run_scenario(sc, record_uplinks=False)


def convergence_run(n: int, max_nodes: Optional[int] = None, failed: int = 1, seed: int = 0,
                    settle_ms: int = 0, horizon_ms: int = 1_200_000, **config) -> Metrics:
    """Kill ``failed`` right after its first uplink slot once the network has formed.

    A first run finds the formation time; the identical prefix is then replayed
    with the failure scripted in.
    """
    cfg = hex_config(n, max_nodes, **config)
    g = hexagonal(n)
    probe = run_scenario(Scenario(cfg, g, horizon_ms, seed=seed), record_uplinks=False)
    if probe.formation_time_ms is None:
        return probe
    formed = probe.formation_time_ms + settle_ms
    slot = next_uplink_slot(cfg, failed, formed + 1)
    t_fail = uplink_slot_start(cfg, slot) + cfg.uplink_slot_duration_ms
    sc = Scenario(cfg, g, t_fail + horizon_ms, seed=seed, faults=[Fault.fail(t_fail, failed)],
                  name=f"convergence-n{n}-nmax{cfg.max_nodes}")
    return run_scenario(sc, record_uplinks=False)


def overhead_sweep(base: NetworkConfiguration, key: str, values: Iterable) -> list[dict]:
    rows = []
    for v in values:
        cfg = base.replace(**{key: v})
        rows.append({key: v, "overhead": control_overhead(cfg)})
    return rows


def power_sweep(base: NetworkConfiguration, tiles_ms: Iterable[int], usage: Iterable[float],
                connectivity: Iterable[float], model: Optional[CurrentModel] = None) -> list[dict]:
    rows = []
    for t in tiles_ms:
        cfg = base.replace(tile_duration_ms=t)
        for c in connectivity:
            for u in usage:
                rows.append({"tile_duration_ms": t, "connectivity": c, "data_usage": u,
                             "current_ma": estimate_power(cfg, u, c, model)})
    return rows


@dataclass
class RedundancyResult:
    stream: tuple[int, int, int]
    paths: dict[int, list[tuple[int, ...]]]
    reliability: dict[int, float]
    latency_ms: dict[int, int]


def redundancy_study(periods: int = 100_000, seed: int = 0, threshold: float = 0.8,
                     streams=OFFICE_STREAMS, graph: Optional[NetworkGraph] = None,
                     redundancy_levels=(1, 2)) -> list[RedundancyResult]:
    """Per stream and redundancy level: measured reliability and latency bound.

    Routing uses the links above ``threshold``; collisions and per-frame
    losses use every physical link.
    """
    phys = graph or office_graph()
    routing = phys.subgraph(phys.nodes, min_reliability=threshold)
    cfg = NetworkConfiguration(max_nodes=max(phys.nodes) + 1)
    out = []
    for i, (src, dst, period) in enumerate(streams):
        rel, lat, paths = {}, {}, {}
        for r in redundancy_levels:
            sme = StreamManagementElement(src, dst, period, r, 1)
            sch = schedule_streams(routing, [sme], cfg, interference=phys)
            if not sch.streams:
                continue
            got = stream_reliability(sch, phys, periods, seed + 7919 * r + i)
            rel[r] = got.get(0, 0.0)
            lat[r] = latency_bounds(sch)[0]
            paths[r] = sorted(path_nodes(sch, p) for p in sch.paths().values() if p.transmissions)
        out.append(RedundancyResult((src, dst, period), paths, rel, lat))
    return out


def path_nodes(schedule, path) -> tuple[int, ...]:
    """Node sequence of a scheduled path, read from its first period instance."""
    first = sorted((t for t in path.transmissions if schedule.instance_of(t) == 0),
                   key=lambda t: t.slot)
    nodes = [path.src]
    for t in first:
        # temporal copies repeat a hop already taken
        if t.sender == nodes[-1] and t.receiver not in nodes:
            nodes.append(t.receiver)
    return tuple(nodes)


def path_product(graph: NetworkGraph, path) -> float:
    p = 1.0
    for a, b in zip(path, path[1:]):
        p *= graph.reliability(a, b)
    return p
