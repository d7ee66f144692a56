import os
import random

import pytest
from hypothesis import given, settings

from conftest import DATA
from oracles import path_reliability, round_robin_owner
from test_scheduler import CFG, scheduling_cases, sme
from tdmh.errors import InvalidScenario, NotFormed
from tdmh.graph import NetworkGraph
from tdmh.io import load_scenario
from tdmh.netconfig import NetworkConfiguration
from tdmh.scheduler import schedule_streams
from tdmh.sim.campaigns import (formation_run, hex_config, next_uplink_slot, path_nodes,
                                path_product, uplink_slot_start)
from tdmh.sim.dataplane import DataPlane, stream_reliability
from tdmh.sim.engine import run_scenario
from tdmh.sim.metrics import (TraceEvent, format_trace, measure_formation_time, metrics_csv,
                              parse_trace)
from tdmh.sim.scenario import Fault, Scenario, StreamRequest
from tdmh.sim.topologies import hexagonal, line, office_graph

CFG8 = NetworkConfiguration(max_nodes=8)
PAIR = NetworkGraph(range(2), [(0, 1)])


def walkthrough():
    return load_scenario(os.path.join(DATA, "walkthrough.yaml"))


# -- determinism and formation -------------------------------------------------

def test_same_seed_same_run():
    a, b = run_scenario(walkthrough()), run_scenario(walkthrough())
    assert format_trace(a.trace) == format_trace(b.trace)
    assert metrics_csv([a]) == metrics_csv([b])


def test_seed_changes_lossy_runs():
    g = hexagonal(12, reliability=0.6)
    cfg = hex_config(12)
    traces = {format_trace(run_scenario(Scenario(cfg, g, 20_000, seed=s)).trace) for s in range(3)}
    assert len(traces) == 3


def test_walkthrough_forms_when_node_1_first_reports():
    m = run_scenario(walkthrough())
    # sync completes with the first flood at t=0; node 1 owns uplink slot 6
    assert round_robin_owner(6, 8) == 1
    assert m.formation_time_ms == uplink_slot_start(CFG8, 6) == 1300
    assert set(m.link_uptime.values()) == {1.0}


def test_single_neighbour_forms_at_its_first_slot():
    cfg = NetworkConfiguration(max_nodes=16)
    m = run_scenario(Scenario(cfg, PAIR, 5000))
    assert m.formation_time_ms == uplink_slot_start(cfg, next_uplink_slot(cfg, 1, 0))


def test_dead_links_never_form():
    g = NetworkGraph(range(3), [(0, 1, 0.0), (1, 2, 0.0)])
    m = run_scenario(Scenario(CFG8, g, 10_000))
    assert m.formation_time_ms is None
    with pytest.raises(NotFormed):
        measure_formation_time(m.trace)


def test_lossless_chain_forms():
    cfg = NetworkConfiguration(max_nodes=8)
    m = run_scenario(Scenario(cfg, line(5), 20_000))
    assert m.formation_time_ms is not None
    assert all(u == 1.0 for u in m.link_uptime.values())


def test_formation_grows_with_size():
    times = [formation_run(n).formation_time_ms for n in (8, 16, 32)]
    assert times[0] < times[1] < times[2] < 100_000


@pytest.mark.parametrize("n", [8, 16])
def test_forward_ids_form_no_slower(n):
    assert formation_run(n, ids="forward").formation_time_ms <= formation_run(n).formation_time_ms


# -- failures ------------------------------------------------------------------

def test_convergence_of_a_leaf_is_the_expiry_time():
    # kill node 1 right after its uplink slot; the master drops the link once
    # topology_expiry_rounds rounds pass without hearing it
    cfg = CFG8
    slot = next_uplink_slot(cfg, 1, 3000)
    t_fail = uplink_slot_start(cfg, slot) + cfg.uplink_slot_duration_ms
    m = run_scenario(Scenario(cfg, PAIR, 20_000, faults=[Fault.fail(t_fail, 1)]))
    round_ms = cfg.round_slots * cfg.control_superframe_ms // cfg.uplink_tiles_per_superframe
    expected = cfg.topology_expiry_rounds * round_ms
    assert abs(m.convergence_after_failure_ms - expected) <= cfg.uplink_slot_duration_ms
    assert m.silent_phase_ms == m.convergence_after_failure_ms
    assert m.propagation_phase_ms == 0


def test_failing_an_absent_node_is_immediate():
    g = NetworkGraph(range(3), [(0, 1), (1, 2)])
    sc = Scenario(CFG8, g, 8000, absent=frozenset({2}), faults=[Fault.fail(5000, 2)])
    m = run_scenario(sc)
    assert m.convergence_after_failure_ms == 0


def test_join_then_link_loss():
    g = NetworkGraph(range(3), [(0, 1), (1, 2)])
    sc = Scenario(CFG8, g, 30_000, absent=frozenset({2}),
                  faults=[Fault.join(3000, 2), Fault.link(15_000, 1, 2, 0.0)])
    kinds = [(e.kind, dict(e.fields)) for e in run_scenario(sc).trace]
    assert ("master_add", {"u": 1, "v": 2}) in kinds
    assert ("master_del", {"u": 1, "v": 2}) in kinds
    assert kinds.index(("master_add", {"u": 1, "v": 2})) < kinds.index(("master_del", {"u": 1, "v": 2}))


def test_dead_link_has_zero_uptime():
    g = NetworkGraph(range(3), [(0, 1), (1, 2), (0, 2, 0.0)])
    m = run_scenario(Scenario(CFG8, g, 6000))
    assert m.link_uptime[(0, 2)] == 0.0
    assert m.link_uptime[(0, 1)] == 1.0


# -- data plane ----------------------------------------------------------------

def test_streams_flow_end_to_end():
    sc = walkthrough()
    sc.streams = [StreamRequest(sme(3, 0, 200))]
    m = run_scenario(sc)
    assert m.collisions == 0 and m.schedules >= 1
    assert m.sent[0] > 0 and m.reliability[0] == 1.0


@settings(max_examples=60)
@given(scheduling_cases(max_nodes=10))
def test_verified_schedules_never_collide(case):
    g, streams = case
    sch = schedule_streams(g, streams, CFG)
    plane = DataPlane(sch, strict=True)
    plane.run_superframes(2, g, random.Random(0))
    assert plane.collisions == 0
    for sid, n in plane.elapsed.items():
        assert plane.delivered[sid] == n


def test_single_path_reliability_matches_product():
    g = office_graph()
    sch = schedule_streams(office_graph(0.8), [sme(6, 0, 200)], NetworkConfiguration(max_nodes=9),
                           interference=g)
    (path,) = [p for p in sch.paths().values()]
    nodes = path_nodes(sch, path)
    rel = {frozenset((u, v)): r for u, v, r in g.weighted_edges()}
    want = path_reliability(rel, nodes)
    assert path_product(g, nodes) == pytest.approx(want)
    got = stream_reliability(sch, g, 20_000, seed=1)[0]
    assert got == pytest.approx(want, abs=0.015)


def test_path_nodes_ignore_repeats():
    # period 100 in a two-tile superframe, each hop sent twice
    sch = schedule_streams(line(4), [sme(3, 0, 100, 1, 2)], CFG)
    (path,) = sch.paths().values()
    assert len(path.transmissions) == 12
    assert path_nodes(sch, path) == (3, 2, 1, 0)


def test_lossless_reliability_is_one():
    sch = schedule_streams(line(4), [sme(3, 0, 100, 2, 2)], CFG)
    assert stream_reliability(sch, line(4), 500) == {0: 1.0}


# -- scenario checks and trace -------------------------------------------------

@pytest.mark.parametrize("change, needle", [
    (dict(duration_ms=0), "duration"),
    (dict(absent=frozenset({0})), "master"),
    (dict(faults=[Fault.fail(500, 0)]), "master"),
    (dict(faults=[Fault.fail(99_999, 1)]), "outside"),
    (dict(faults=[Fault.link(10, 0, 1, 1.5)]), "LINK_SET"),
    (dict(faults=[Fault.join(10, 9)]), "unknown"),
    (dict(streams=[StreamRequest(sme(1, 0)), StreamRequest(sme(1, 0, 500))]), "share"),
    (dict(physical_graph=NetworkGraph([1, 2], [(1, 2)])), "master"),
    (dict(id_assignment={0: 1, 1: 1}), "permutation"),
])
def test_invalid_scenarios(change, needle):
    sc = Scenario(CFG8, PAIR, 1000)
    for k, v in change.items():
        setattr(sc, k, v)
    with pytest.raises(InvalidScenario, match=needle):
        sc.check()


def test_bad_config_is_an_invalid_scenario():
    with pytest.raises(InvalidScenario):
        run_scenario(Scenario(NetworkConfiguration(max_nodes=1), PAIR, 1000))


def test_trace_round_trip():
    events = run_scenario(walkthrough()).trace
    assert parse_trace(format_trace(events)) == events
    assert parse_trace("5 link_set u=1 v=2 reliability=0.5\n") == [
        TraceEvent(5, "link_set", (("u", 1), ("v", 2), ("reliability", 0.5)))]


def test_metrics_csv_header():
    head = metrics_csv([run_scenario(walkthrough())]).splitlines()[0]
    assert head == "scenario,seed,formation_ms,convergence_ms,silent_ms,propagation_ms,overhead,collisions,schedules"
