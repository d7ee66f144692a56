"""Per-node view of a schedule: slot programs, forwarding buffers, slot execution."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from tdmh.scheduler.schedule import Schedule, Transmission


class Op(str, enum.Enum):
    SEND_FROM_APP = "SEND_FROM_APP"
    RECEIVE_AND_BUFFER = "RECEIVE_AND_BUFFER"
    FORWARD = "FORWARD"
    RECEIVE_TO_APP = "RECEIVE_TO_APP"
    SLEEP = "SLEEP"


@dataclass(frozen=True)
class SlotAction:
    op: Op
    peer: Optional[int] = None
    stream: Optional[int] = None
    path: Optional[int] = None
    instance: Optional[int] = None
    buffer: Optional[int] = None

    @property
    def transmits(self) -> bool:
        return self.op in (Op.SEND_FROM_APP, Op.FORWARD)

    @property
    def receives(self) -> bool:
        return self.op in (Op.RECEIVE_AND_BUFFER, Op.RECEIVE_TO_APP)


SLEEP = SlotAction(Op.SLEEP)


@dataclass
class NodeSlotProgram:
    node: int
    actions: list[SlotAction]

    def active_slots(self) -> list[int]:
        return [t for t, a in enumerate(self.actions) if a.op is not Op.SLEEP]

    def dump(self) -> str:
        lines = []
        for t, a in enumerate(self.actions):
            peer = "-" if a.peer is None else a.peer
            buf = "-" if a.buffer is None else a.buffer
            lines.append(f"{t} {a.op.value} {peer} {buf}")
        return "\n".join(lines) + "\n"


def _action_for(schedule: Schedule, node: int, tx: Transmission) -> Optional[SlotAction]:
    if not schedule.is_registered(tx):
        return None
    stream = schedule.streams[tx.stream]
    instance = schedule.instance_of(tx)
    if tx.sender == node:
        op = Op.SEND_FROM_APP if node == stream.src else Op.FORWARD
        return SlotAction(op, tx.receiver, tx.stream, tx.path, instance)
    if tx.receiver == node:
        op = Op.RECEIVE_TO_APP if node == stream.dst else Op.RECEIVE_AND_BUFFER
        return SlotAction(op, tx.sender, tx.stream, tx.path, instance)
    return None


def extract_node_schedule(schedule: Schedule, node: int, with_buffers: bool = True) -> NodeSlotProgram:
    """The node's action in every data slot of one superframe; unused slots sleep."""
    actions = [SLEEP] * schedule.grid.n_slots
    for tx in schedule.transmissions:
        action = _action_for(schedule, node, tx)
        if action is None:
            continue
        if actions[tx.slot] is not SLEEP:
            raise ValueError(f"node {node} has two roles in slot {tx.slot}")
        actions[tx.slot] = action
    program = NodeSlotProgram(node, actions)
    if with_buffers:
        assignment = allocate_buffers(program)
        program.actions = [
            a if a.op not in (Op.RECEIVE_AND_BUFFER, Op.FORWARD)
            else SlotAction(a.op, a.peer, a.stream, a.path, a.instance,
                            assignment.mapping.get((a.stream, a.instance)))
            for a in actions
        ]
    return program


@dataclass
class BufferAssignment:
    buffer_count: int
    mapping: dict[tuple[int, int], int] = field(default_factory=dict)
    live: dict[tuple[int, int], tuple[int, int]] = field(default_factory=dict)


def hold_intervals(program: NodeSlotProgram) -> dict[tuple[int, int], tuple[int, int]]:
    """``(stream, instance) -> (first receive slot, last forward slot)`` at this node.

    The frame is live in ``(receive, forward]``; when the last forward comes
    no later than the first receive the interval wraps around the superframe.
    All redundant copies of a stream share one interval.
    """
    recv: dict[tuple[int, int], int] = {}
    fwd: dict[tuple[int, int], int] = {}
    for t, a in enumerate(program.actions):
        key = (a.stream, a.instance)
        if a.op is Op.RECEIVE_AND_BUFFER:
            recv.setdefault(key, t)
        elif a.op is Op.FORWARD:
            fwd[key] = t
    return {k: (recv[k], fwd[k]) for k in recv if k in fwd}


def _covers(interval, n_slots):
    """Slots in which the buffer is occupied, as a set (cyclic half-open (r, f])."""
    r, f = interval
    if f > r:
        return set(range(r + 1, f + 1))
    return set(range(r + 1, n_slots)) | set(range(0, f + 1))


def allocate_buffers(program: NodeSlotProgram) -> BufferAssignment:
    """Lowest-free-index colouring of hold intervals taken in order of their start."""
    n = len(program.actions)
    live = hold_intervals(program)
    occupied: list[set[int]] = []
    mapping: dict[tuple[int, int], int] = {}
    for key in sorted(live, key=lambda k: (live[k][0], live[k][1], k)):
        cover = _covers(live[key], n)
        for b, used in enumerate(occupied):
            if not used & cover:
                break
        else:
            occupied.append(set())
            b = len(occupied) - 1
        occupied[b] |= cover
        mapping[key] = b
    return BufferAssignment(len(occupied), mapping, live)


def max_overlap(live: dict, n_slots: int) -> int:
    counts = [0] * n_slots
    for interval in live.values():
        for t in _covers(interval, n_slots):
            counts[t] += 1
    return max(counts, default=0)


@dataclass(frozen=True)
class Frame:
    stream: int
    instance: int


@dataclass
class NodeDataState:
    """Runtime state of one node's data plane."""

    node: int
    buffers: dict[int, Frame] = field(default_factory=dict)
    received: dict[int, int] = field(default_factory=dict)
    delivered: Counter = field(default_factory=Counter)
    tx_slots: int = 0
    rx_slots: int = 0

    def has(self, stream: int, instance: int) -> bool:
        return self.received.get(stream) == instance


def listens(state: NodeDataState, action: SlotAction, epoch_instance: int) -> bool:
    """Whether a receive action actually turns the radio on (listen-skip otherwise)."""
    return action.receives and not state.has(action.stream, epoch_instance)


def execute_data_slot(state: NodeDataState, action: SlotAction, radio_outcome: Optional[Frame],
                      epoch_instance: Optional[int] = None) -> Optional[Frame]:
    """Run one slot; returns the frame this node emits, if any.

    ``radio_outcome`` is the frame that reached this node's antenna for a
    receive action (``None`` on loss). ``epoch_instance`` identifies the
    absolute period instance the slot serves (defaults to the in-superframe
    instance), so received-flags never leak across periods.
    """
    if action.op is Op.SLEEP:
        return None
    instance = action.instance if epoch_instance is None else epoch_instance
    if action.op is Op.SEND_FROM_APP:
        state.tx_slots += 1
        return Frame(action.stream, instance)
    if action.op is Op.FORWARD:
        frame = state.buffers.get(action.buffer)
        if frame is None or frame != Frame(action.stream, instance):
            return None
        state.tx_slots += 1
        return frame
    # Receive actions.
    if state.has(action.stream, instance):
        return None
    state.rx_slots += 1
    if radio_outcome is None or radio_outcome != Frame(action.stream, instance):
        return None
    state.received[action.stream] = instance
    if action.op is Op.RECEIVE_AND_BUFFER:
        state.buffers[action.buffer] = radio_outcome
    else:
        state.delivered[action.stream] += 1
    return None
