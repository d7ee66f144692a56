"""Tile-by-tile discrete-event simulation of a whole network.

Every tile starts with its control slot. Downlink tiles carry a master
flood (a schedule repetition when one is being disseminated, a sync frame
otherwise). Uplink tiles carry one round-robin topology message overheard
by each neighbour with the link's reliability. The data slots then run the
active schedule on the nodes that received it.

Script events (faults, stream requests) take effect at the first tile
boundary at or after their time; the trace records them at the scripted
time. All randomness comes from one ``random.Random(seed)``.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from tdmh.flood import run_flood
from tdmh.graph import NetworkGraph, edge
from tdmh.netconfig import MASTER, TileKind, control_overhead, uplink_node_for_slot
from tdmh.scheduler.greedy import schedule_streams
from tdmh.scheduler.schedule import Schedule
from tdmh.scheduler.streams import Action, Stream
from tdmh.sim.dataplane import DataPlane
from tdmh.sim.metrics import (Metrics, TraceEvent, convergence_phases,
                              measure_convergence_after_failure, measure_formation_time)
from tdmh.sim.power import CurrentModel, activity_current
from tdmh.sim.scenario import FaultKind, Scenario
from tdmh.errors import NotConverged, NotFormed
from tdmh.topology import (MasterGraphState, NodeTopologyState, build_uplink_message,
                           expire_stale, forward_capacity, master_process, process_overheard)


@dataclass
class _Dissemination:
    schedule: Schedule
    repetitions_left: int
    holders: set = field(default_factory=lambda: {MASTER})


class Simulator:
    def __init__(self, scenario: Scenario, record_uplinks: bool = True):
        scenario.check()
        self.scenario = scenario
        self.config = cfg = scenario.config
        self.rng = random.Random(scenario.seed)
        self.phys: NetworkGraph = scenario.resolved_graph().copy()
        self.alive = set(self.phys.nodes) - set(scenario.absent)
        self.nodes = {n: self._new_node(n) for n in sorted(self.phys.nodes) if n != MASTER}
        self.master = MasterGraphState()
        self.capacity = forward_capacity(cfg)
        self.expiry = cfg.topology_expiry_rounds * cfg.round_slots
        self.record_uplinks = record_uplinks
        self.trace: list[TraceEvent] = []
        self.uplink_counter = 0
        self.activity: dict[int, Counter] = {n: Counter() for n in self.phys.nodes}

        script = []
        for i, f in enumerate(scenario.faults):
            script.append((f.time_ms, 1, i, "fault", f))
        for i, r in enumerate(scenario.streams):
            script.append((r.open_ms, 0, i, "open", r))
            if r.close_ms is not None:
                script.append((r.close_ms, 0, i, "close", r))
        self.script = sorted(script, key=lambda x: x[:3])
        self.stream_ids = {r.sme.key: i for i, r in enumerate(scenario.streams)}

        self.requested: dict[tuple[int, int], Stream] = {}
        self.last_key = None
        self.next_schedule_id = 1
        self.pending: Optional[_Dissemination] = None
        self.waiting: Optional[tuple[int, _Dissemination]] = None
        self.plane: Optional[DataPlane] = None
        self.plane_start = 0
        self.sent: Counter = Counter()
        self.delivered: Counter = Counter()
        self.collisions = 0
        self.schedules = 0

        self.true_edges: set = set()
        self.master_edges: set = set()
        self.synced = False
        self.formed_at: Optional[int] = None
        self.watch_silent: set = set()
        self.uptime_hits: Counter = Counter()
        self.uptime_samples = 0

    def _new_node(self, n: int) -> NodeTopologyState:
        return NodeTopologyState(n)

    # -- bookkeeping -------------------------------------------------------

    def log(self, t: int, event: str, **fields) -> None:
        self.trace.append(TraceEvent(t, event, tuple(fields.items())))

    def _true_graph(self) -> set:
        return {(u, v) for u, v, r in self.phys.weighted_edges()
                if r > 0 and u in self.alive and v in self.alive}

    def _sync_true_graph(self, t: int) -> None:
        now = self._true_graph()
        for u, v in sorted(self.true_edges - now):
            self.log(t, "link_down", u=u, v=v)
        for u, v in sorted(now - self.true_edges):
            self.log(t, "link_up", u=u, v=v)
        self.true_edges = now

    def _sync_master_graph(self, t: int) -> None:
        now = self.master.edges()
        for u, v in sorted(self.master_edges - now):
            self.log(t, "master_del", u=u, v=v)
        for u, v in sorted(now - self.master_edges):
            self.log(t, "master_add", u=u, v=v)
        self.master_edges = now

    # -- script ------------------------------------------------------------

    def _run_script(self, now: int) -> None:
        while self.script and self.script[0][0] <= now:
            t, _, i, what, item = self.script.pop(0)
            if what == "fault":
                self._apply_fault(t, item)
            else:
                sme = item.sme
                if what == "close":
                    sme = type(sme)(sme.src, sme.dst, sme.period_ms, sme.spatial_redundancy,
                                    sme.temporal_redundancy, Action.CLOSE)
                self.log(t, "stream_" + what, id=i, src=sme.src, dst=sme.dst)
                if sme.src not in self.alive:
                    continue
                if sme.src == MASTER:
                    self.master.smes.append(sme)
                else:
                    self.nodes[sme.src].pending_smes.append(sme)

    def _apply_fault(self, t: int, f) -> None:
        if f.kind is FaultKind.NODE_FAIL:
            self.log(t, "fail", node=f.node)
            if f.node in self.alive:
                self.alive.discard(f.node)
                self.watch_silent.add(f.node)
        elif f.kind is FaultKind.NODE_JOIN:
            self.log(t, "join", node=f.node)
            if f.node not in self.alive:
                self.alive.add(f.node)
                self.nodes[f.node] = self._new_node(f.node)
                self.watch_silent.discard(f.node)
        else:
            self.log(t, "link_set", u=f.u, v=f.v, reliability=f.reliability)
            if f.reliability > 0:
                self.phys.add_edge(f.u, f.v, f.reliability)
            else:
                self.phys.remove_edge(f.u, f.v)
        self._sync_true_graph(t)

    # -- control slots -----------------------------------------------------

    def _downlink(self, tile: int, t: int) -> None:
        self._maybe_reschedule(tile, t)
        graph = self.phys.subgraph(self.alive)
        outcome = run_flood(graph, MASTER, None, self.rng, self.config.max_hops)
        self.activity[MASTER]["flood_tx"] += 1
        for n in sorted(outcome.receivers):
            self.nodes[n].on_flood(outcome.hops[n], self.uplink_counter)
            self.activity[n]["flood_rx"] += 1
            self.activity[n]["flood_tx"] += 1
        if self.pending is not None:
            d = self.pending
            d.holders |= outcome.receivers
            d.repetitions_left -= 1
            self.log(t, "flood", kind="schedule", id=d.schedule.schedule_id,
                     reached=len(outcome.receivers))
            if d.repetitions_left == 0:
                self.waiting = (d.schedule.activation_tile, d)
                self.pending = None
        else:
            self.log(t, "flood", kind="sync", reached=len(outcome.receivers))
        if not self.synced and all(self.nodes[n].my_hop is not None
                                   for n in self.alive if n != MASTER):
            self.synced = True
            self.log(t, "synced")

    def _maybe_reschedule(self, tile: int, t: int) -> None:
        for sme in self.master.smes:
            if sme.action is Action.CLOSE:
                self.requested.pop(sme.key, None)
            elif sme.key not in self.requested:
                self.requested[sme.key] = Stream.from_sme(self.stream_ids.get(sme.key, 0), sme)
        self.master.smes.clear()
        streams = list(self.requested.values())
        key = (frozenset(self.master_edges), tuple(s.spec() for s in streams))
        if key == self.last_key:
            return
        self.last_key = key
        if not streams and self.plane is None and self.pending is None and self.waiting is None:
            return
        cfg = self.config
        csf = len(cfg.control_superframe)
        downlinks = [k for k in range(tile, tile + csf * cfg.schedule_repetitions + csf)
                     if cfg.tile_kind(k) is TileKind.DOWNLINK][:cfg.schedule_repetitions]
        activation = (downlinks[-1] // csf + 1) * csf
        schedule = schedule_streams(self.master.graph, streams, cfg,
                                    schedule_id=self.next_schedule_id, activation_tile=activation)
        self.next_schedule_id += 1
        self.schedules += 1
        self.log(t, "schedule", id=schedule.schedule_id, streams=len(schedule.streams),
                 rejected=len(schedule.rejected), tx=len(schedule.transmissions),
                 activation=activation)
        self.pending = _Dissemination(schedule, cfg.schedule_repetitions)
        self.waiting = None

    def _uplink(self, t: int) -> None:
        u = self.uplink_counter
        owner = uplink_node_for_slot(u, self.config.max_nodes)
        state = self.nodes.get(owner)
        heard_by = set()
        if owner in self.alive and state is not None and state.my_hop is not None:
            msg = build_uplink_message(state, self.capacity, self.rng, self.config)
            self.activity[owner]["uplink_tx"] += 1
            for v in self.phys.neighbors(owner):
                if v not in self.alive or self.rng.random() >= self.phys.reliability(owner, v):
                    continue
                heard_by.add(v)
                if v == MASTER:
                    master_process(self.master, msg, u)
                else:
                    process_overheard(self.nodes[v], msg, u)
            if self.record_uplinks:
                self.log(t, "uplink", node=owner, hop=msg.hop, forwardee=msg.forwardee,
                         forwarded=len(msg.forwarded), smes=len(msg.smes))
        for n in self.alive:
            if n != owner:
                self.activity[n]["uplink_rx" if n in heard_by else "uplink_sense"] += 1

        for n in sorted(self.alive):
            st = self.master if n == MASTER else self.nodes[n]
            before = set(st.heard)
            expire_stale(st, u, self.expiry)
            for lost in sorted(before - set(st.heard)):
                self.log(t, "expire", node=n, lost=lost)
        self._sync_master_graph(t)

        for f in sorted(self.watch_silent):
            if not any(f in (self.master if n == MASTER else self.nodes[n]).heard
                       for n in self.alive):
                self.log(t, "silent", node=f)
                self.watch_silent.discard(f)

        if self.formed_at is None and self.synced and self.master_edges == self.true_edges:
            self.formed_at = t
            self.log(t, "formed")
        if self.formed_at is not None:
            self.uptime_samples += 1
            for e in self.master_edges:
                self.uptime_hits[e] += 1
        self.uplink_counter += 1

    # -- data slots --------------------------------------------------------

    def _activate(self, tile: int, t: int) -> None:
        activation, d = self.waiting
        if tile != activation:
            return
        self._retire_plane()
        self.plane = DataPlane(d.schedule, d.holders & self.alive)
        self.plane_start = tile
        self.waiting = None
        self.log(t, "activate", id=d.schedule.schedule_id, holders=len(self.plane.states))

    def _retire_plane(self) -> None:
        if self.plane is None:
            return
        self.sent.update(self.plane.elapsed)
        self.delivered.update(self.plane.delivered)
        self.collisions += self.plane.collisions
        for n, c in self.plane.activity.items():
            self.activity[n].update(c)
        self.plane = None

    def _data(self, tile: int) -> None:
        plane = self.plane
        if plane is None:
            return
        rel = tile - self.plane_start
        length = plane.schedule.superframe_tiles
        superframe, in_frame = divmod(rel, length)
        phys, rng = self.phys, self.rng

        def success(s, r):
            return rng.random() < phys.reliability(s, r)

        for slot in plane.schedule.grid.slots_in_tiles(in_frame, 1):
            plane.run_slot(slot, superframe, phys, success, self.alive)
        plane.end_tile(in_frame, superframe)

    # -- main loop ---------------------------------------------------------

    def run(self) -> Metrics:
        cfg = self.config
        sc = self.scenario
        self._sync_true_graph(0)
        tiles = math.ceil(sc.duration_ms / cfg.tile_duration_ms)
        for tile in range(tiles):
            t = tile * cfg.tile_duration_ms
            self._run_script(t)
            if self.waiting is not None:
                self._activate(tile, t)
            if cfg.tile_kind(tile) is TileKind.DOWNLINK:
                self._downlink(tile, t)
            else:
                self._uplink(t)
            self._data(tile)
        self._run_script(sc.duration_ms)
        self._retire_plane()
        end = tiles * cfg.tile_duration_ms
        for i, r in enumerate(sc.streams):
            self.log(end, "stream", id=i, src=r.sme.src, dst=r.sme.dst,
                     sent=self.sent[i], delivered=self.delivered[i])
        return self._metrics(end)

    def _metrics(self, end: int) -> Metrics:
        sc = self.scenario
        m = Metrics(sc.name, sc.seed, trace=self.trace)
        try:
            m.formation_time_ms = measure_formation_time(self.trace)
        except NotFormed:
            pass
        failed = [f.node for f in sc.faults if f.kind is FaultKind.NODE_FAIL]
        if failed:
            try:
                m.convergence_after_failure_ms = measure_convergence_after_failure(self.trace, failed[0])
                m.silent_phase_ms, m.propagation_phase_ms = convergence_phases(self.trace, failed[0])
            except NotConverged:
                pass
        m.sent = {i: self.sent[i] for i in range(len(sc.streams))}
        m.delivered = {i: self.delivered[i] for i in range(len(sc.streams))}
        links = set(self.uptime_hits) | {edge(u, v) for u, v in self.phys.edges()}
        m.link_uptime = {e: (self.uptime_hits[e] / self.uptime_samples if self.uptime_samples else 0.0)
                         for e in sorted(links)}
        m.control_overhead = control_overhead(self.config)
        model = CurrentModel()
        m.node_current_ma = {n: activity_current(self.activity[n], end, self.config, model)
                             for n in sorted(self.phys.nodes)}
        m.collisions = self.collisions
        m.schedules = self.schedules
        return m


def run_scenario(scenario: Scenario, record_uplinks: bool = True) -> Metrics:
    return Simulator(scenario, record_uplinks).run()
