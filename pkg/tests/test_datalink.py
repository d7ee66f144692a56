from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import min_buffers_bruteforce
from test_scheduler import CFG, scheduling_cases, sme
from tdmh.datalink import (SLEEP, Frame, NodeDataState, NodeSlotProgram, Op, SlotAction,
                           allocate_buffers, execute_data_slot, extract_node_schedule,
                           hold_intervals, listens, max_overlap)
from tdmh.scheduler import schedule_streams
from tdmh.sim.topologies import line

LINE4 = line(4)
TWO_WAY = schedule_streams(LINE4, [sme(3, 0, 100), sme(0, 3, 200)], CFG)


# -- extraction ----------------------------------------------------------------

def test_two_hop_relay():
    sch = schedule_streams(line(3), [sme(2, 0, 100)], CFG)
    prog = extract_node_schedule(sch, 1)
    acts = [(t, a.op) for t, a in enumerate(prog.actions) if a.op is not Op.SLEEP]
    # the superframe spans two tiles, so the chain appears once per tile
    assert acts == [(0, Op.RECEIVE_AND_BUFFER), (1, Op.FORWARD),
                    (14, Op.RECEIVE_AND_BUFFER), (15, Op.FORWARD)]
    assert extract_node_schedule(sch, 2).actions[0].op is Op.SEND_FROM_APP
    assert extract_node_schedule(sch, 0).actions[1].op is Op.RECEIVE_TO_APP


def test_uninvolved_node_sleeps():
    sch = schedule_streams(LINE4, [sme(0, 1)], CFG)
    for node in (2, 3):
        prog = extract_node_schedule(sch, node)
        assert prog.active_slots() == []
        assert len(prog.actions) == sch.grid.n_slots


def test_node_with_source_and_relay_roles():
    sch = schedule_streams(LINE4, [sme(1, 0, 100), sme(2, 0, 100)], CFG)
    ops = {a.op for a in extract_node_schedule(sch, 1).actions}
    assert {Op.SEND_FROM_APP, Op.RECEIVE_AND_BUFFER, Op.FORWARD} <= ops


def test_relay_program_dump():
    head = extract_node_schedule(TWO_WAY, 1).dump().splitlines()[:5]
    assert head == ["0 RECEIVE_AND_BUFFER 0 0",
                    "1 RECEIVE_AND_BUFFER 2 1",
                    "2 FORWARD 0 1",
                    "3 FORWARD 2 0",
                    "4 SLEEP - -"]


@settings(max_examples=100)
@given(scheduling_cases())
def test_programs_reconstruct_the_schedule(case):
    g, streams = case
    sch = schedule_streams(g, streams, CFG)
    sent, heard = set(), set()
    for node in g.nodes:
        for t, a in enumerate(extract_node_schedule(sch, node).actions):
            if a.transmits:
                sent.add((t, node, a.peer, a.stream, a.path))
            elif a.receives:
                heard.add((t, a.peer, node, a.stream, a.path))
    expected = {(tx.slot, tx.sender, tx.receiver, tx.stream, tx.path) for tx in sch.transmissions}
    assert sent == expected == heard


# -- buffers -------------------------------------------------------------------

def relay_program(intervals, n_slots):
    """A program holding stream k from intervals[k][0] to intervals[k][1]."""
    actions = [SLEEP] * n_slots
    for k, (r, f) in enumerate(intervals):
        actions[r] = SlotAction(Op.RECEIVE_AND_BUFFER, 0, k, 0, 0)
        actions[f] = SlotAction(Op.FORWARD, 2, k, 0, 0)
    return NodeSlotProgram(1, actions)


def test_disjoint_holds_share_one_buffer():
    a = allocate_buffers(relay_program([(0, 1), (2, 3)], 6))
    assert a.buffer_count == 1
    assert a.mapping == {(0, 0): 0, (1, 0): 0}


def test_overlapping_holds_need_two():
    a = allocate_buffers(relay_program([(0, 2), (1, 3)], 6))
    assert a.buffer_count == 2
    assert allocate_buffers(extract_node_schedule(TWO_WAY, 1, with_buffers=False)).buffer_count == 2


def test_redundant_paths_through_one_relay_use_one_buffer():
    # both copies of a spatially redundant stream pass through node 1
    from tdmh.netconfig import SlotGrid
    from tdmh.scheduler import Schedule, Stream, Transmission
    sch = Schedule(0, 1, 0, [Stream(0, 0, 2, 100, 2)],
                   [Transmission(0, 0, 1, 0, 0), Transmission(1, 1, 2, 0, 0),
                    Transmission(2, 0, 1, 0, 1), Transmission(3, 1, 2, 0, 1)],
                   SlotGrid(100, 6, [14]))
    prog = extract_node_schedule(sch, 1)
    assert allocate_buffers(prog).buffer_count == 1
    assert {a.buffer for a in prog.actions if a.op is not Op.SLEEP} == {0}


@st.composite
def plain_intervals(draw):
    n = draw(st.integers(2, 10))
    slots = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=min(n, 10), unique=True))
    ivs = [tuple(sorted(slots[k:k + 2])) for k in range(0, len(slots) - 1, 2)]
    return ivs, n


@given(plain_intervals())
def test_buffer_count_is_optimal_for_plain_intervals(case):
    ivs, n = case
    a = allocate_buffers(relay_program(ivs, n))
    assert a.buffer_count == max_overlap(a.live, n) == min_buffers_bruteforce(ivs, n)


def test_wrapping_holds_are_safe_but_may_exceed_the_overlap():
    # five arcs round a ring, each overlapping only its neighbours
    ivs = [(0, 3), (2, 5), (4, 7), (6, 9), (8, 1)]
    a = allocate_buffers(relay_program(ivs, 10))
    assert max_overlap(a.live, 10) == 2
    assert a.buffer_count == min_buffers_bruteforce(ivs, 10) == 3


def replay_is_safe(program, rounds=3):
    """Replay with symbolic frames; a receive must never land on a frame of
    another (stream, instance) that still awaits a forward."""
    live = hold_intervals(program)
    last_forward = {k: f for k, (_, f) in live.items()}
    slots = {}       # buffer -> key
    pending = set()
    for _ in range(rounds):
        for t, a in enumerate(program.actions):
            key = (a.stream, a.instance)
            if a.op is Op.RECEIVE_AND_BUFFER:
                held = slots.get(a.buffer)
                if held is not None and held != key and held in pending:
                    return False
                slots[a.buffer] = key
                pending.add(key)
            elif a.op is Op.FORWARD and last_forward.get(key) == t:
                pending.discard(key)
    return True


@settings(max_examples=150)
@given(scheduling_cases(max_streams=8))
def test_buffers_are_safe_and_minimal_on_schedules(case):
    g, streams = case
    sch = schedule_streams(g, streams, CFG)
    for node in g.nodes:
        prog = extract_node_schedule(sch, node)
        assert replay_is_safe(prog)
        a = allocate_buffers(prog)
        assert a.buffer_count == max_overlap(a.live, len(prog.actions))


@given(st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)).filter(lambda p: p[0] != p[1]),
                max_size=6, unique_by=lambda p: p[0]))
def test_safety_with_wrapping_holds(pairs):
    used = set()
    ivs = []
    for r, f in pairs:
        if r not in used and f not in used:
            used |= {r, f}
            ivs.append((r, f))
    prog = relay_program(ivs, 12)
    a = allocate_buffers(prog)
    prog.actions = [x if x.op is Op.SLEEP else SlotAction(x.op, x.peer, x.stream, x.path, x.instance,
                                                          a.mapping[(x.stream, x.instance)])
                    for x in prog.actions]
    assert replay_is_safe(prog)
    assert a.buffer_count >= max_overlap(a.live, 12)


# -- slot execution ------------------------------------------------------------

RECV = SlotAction(Op.RECEIVE_AND_BUFFER, 0, 0, 0, 0, buffer=0)
FWD = SlotAction(Op.FORWARD, 2, 0, 0, 0, buffer=0)


def test_receive_then_forward():
    s = NodeDataState(1)
    assert execute_data_slot(s, RECV, Frame(0, 0)) is None
    assert execute_data_slot(s, FWD, None) == Frame(0, 0)
    assert (s.rx_slots, s.tx_slots) == (1, 1)


def test_forward_with_empty_buffer_is_silent():
    s = NodeDataState(1)
    assert execute_data_slot(s, RECV, None) is None   # upstream loss
    assert execute_data_slot(s, FWD, None) is None
    assert s.tx_slots == 0


def test_stale_buffer_is_not_forwarded_next_period():
    s = NodeDataState(1)
    execute_data_slot(s, RECV, Frame(0, 4), epoch_instance=4)
    assert execute_data_slot(s, FWD, None, epoch_instance=4) == Frame(0, 4)
    execute_data_slot(s, RECV, None, epoch_instance=5)
    assert execute_data_slot(s, FWD, None, epoch_instance=5) is None


def test_listen_skip_after_a_copy_arrives():
    s = NodeDataState(3)
    sink = SlotAction(Op.RECEIVE_TO_APP, 1, 0, 0, 0)
    second = SlotAction(Op.RECEIVE_TO_APP, 2, 0, 1, 0)
    assert listens(s, sink, 0)
    execute_data_slot(s, sink, Frame(0, 0))
    assert not listens(s, second, 0)
    assert execute_data_slot(s, second, Frame(0, 0)) is None
    assert s.rx_slots == 1 and s.delivered[0] == 1
    # a new period resets the flag
    assert listens(s, second, 1)


def test_sleep_changes_nothing():
    s = NodeDataState(5)
    assert execute_data_slot(s, SLEEP, Frame(0, 0)) is None
    assert s == NodeDataState(5)


def test_source_emits_current_instance():
    s = NodeDataState(0)
    src = SlotAction(Op.SEND_FROM_APP, 1, 2, 0, 0)
    assert execute_data_slot(s, src, None, epoch_instance=7) == Frame(2, 7)
