"""Execution of a schedule's data slots over a lossy radio."""

from __future__ import annotations

import random
from collections import Counter
from typing import Callable, Iterable, Optional

from tdmh.datalink import Frame, NodeDataState, Op, execute_data_slot, extract_node_schedule, listens
from tdmh.graph import NetworkGraph
from tdmh.scheduler.schedule import Schedule


class DataCollision(AssertionError):
    """Two transmitters reached one listening receiver in the same slot."""


class DataPlane:
    """All nodes running one schedule.

    ``holders`` are the nodes that received the schedule; everybody else
    sleeps through the data slots. Counters are keyed by stream id.
    """

    def __init__(self, schedule: Schedule, holders: Optional[Iterable[int]] = None,
                 strict: bool = False):
        self.schedule = schedule
        self.strict = strict
        nodes = {tx.sender for tx in schedule.transmissions} | {tx.receiver for tx in schedule.transmissions}
        if holders is not None:
            nodes &= set(holders)
        self.states = {n: NodeDataState(n) for n in sorted(nodes)}
        grid = schedule.grid
        self.by_slot: list[list[tuple[int, object]]] = [[] for _ in range(grid.n_slots)]
        for n in sorted(nodes):
            program = extract_node_schedule(schedule, n)
            for t, action in enumerate(program.actions):
                if action.op is not Op.SLEEP:
                    self.by_slot[t].append((n, action))
        self.per_superframe = {i: schedule.superframe_tiles // schedule.period_tiles(i)
                               for i in range(len(schedule.streams))}
        self.elapsed: Counter = Counter()
        self.delivered: Counter = Counter()
        self.collisions = 0
        self.activity: dict[int, Counter] = {n: Counter() for n in self.states}

    def stream_id(self, index: int) -> int:
        return self.schedule.streams[index].id

    def run_slot(self, slot: int, superframe: int, graph: NetworkGraph,
                 success: Callable[[int, int], bool], alive=None) -> None:
        """Execute one data slot of the ``superframe``-th repetition.

        ``success(sender, receiver)`` draws the outcome of one frame on one
        link; ``graph`` says who can hear whom at all (for collisions).
        """
        actions = self.by_slot[slot]
        if not actions:
            return
        emitted: dict[int, Frame] = {}
        for n, a in actions:
            if a.transmits and (alive is None or n in alive):
                frame = execute_data_slot(self.states[n], a, None, self._epoch(a, superframe))
                if frame is not None:
                    emitted[n] = frame
                    self.activity[n]["data_tx"] += 1
        for n, a in actions:
            if not a.receives or (alive is not None and n not in alive):
                continue
            state = self.states[n]
            epoch = self._epoch(a, superframe)
            if not listens(state, a, epoch):
                continue
            self.activity[n]["data_rx"] += 1
            others = [s for s in emitted if s != a.peer and graph.reliability(s, n) > 0]
            outcome = None
            if others:
                self.collisions += 1
                if self.strict:
                    raise DataCollision(f"slot {slot}: node {n} hears {sorted(others)} and {a.peer}")
            elif a.peer in emitted and success(a.peer, n):
                outcome = emitted[a.peer]
            execute_data_slot(state, a, outcome, epoch)

    def end_tile(self, tile_in_superframe: int, superframe: int = 0) -> None:
        """Close the period windows ending with this tile; a window counts as
        delivered when its instance reached the destination."""
        for i, s in enumerate(self.schedule.streams):
            p = self.schedule.period_tiles(i)
            if (tile_in_superframe + 1) % p:
                continue
            self.elapsed[s.id] += 1
            epoch = superframe * self.per_superframe[i] + tile_in_superframe // p
            dst = self.states.get(s.dst)
            if dst is not None and dst.has(i, epoch):
                self.delivered[s.id] += 1

    def _epoch(self, action, superframe: int) -> int:
        return superframe * self.per_superframe[action.stream] + action.instance

    def run_superframes(self, count: int, graph: NetworkGraph, rng: random.Random) -> None:
        """Repeat the whole data superframe ``count`` times; loss per frame ~ link reliability."""
        grid = self.schedule.grid

        def success(s, r):
            return rng.random() < graph.reliability(s, r)

        for k in range(count):
            for tile in range(grid.n_tiles):
                for slot in grid.slots_in_tiles(tile, 1):
                    self.run_slot(slot, k, graph, success)
                self.end_tile(tile, k)


def stream_reliability(schedule: Schedule, graph: NetworkGraph, periods: int,
                       seed: int = 0) -> dict[int, float]:
    """Fraction of period instances delivered per stream id, over at least ``periods``
    instances of the slowest stream."""
    plane = DataPlane(schedule)
    longest = max((schedule.period_tiles(i) for i in range(len(schedule.streams))), default=1)
    superframes = -(-periods * longest // schedule.superframe_tiles)
    plane.run_superframes(superframes, graph, random.Random(seed))
    got = plane.delivered
    return {sid: got[sid] / n for sid, n in plane.elapsed.items()}
