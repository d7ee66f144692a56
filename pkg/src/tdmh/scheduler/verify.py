"""Check a schedule against the seven formal schedule constraints.

Rules, by the name used in violation records:

connectivity
    every transmission uses a link of the graph.
unique-sender-receiver
    in one slot a node is at most one of: a sender to one receiver, or a
    receiver from one sender.
coexistence
    for concurrent ``i->j`` and ``k->l`` (``i != k``, ``j != l``) neither
    ``(i, l)`` nor ``(k, j)`` is a link.
no-spurious
    every transmission belongs to a registered path.
periodicity
    a path transmission in slot ``t`` recurs in the slot at the same tile
    offset one period later (modulo the superframe).
causality
    each path transmission is preceded by one into its sender within the
    open interval ``(t - p, t)`` unless it leaves the source, and followed by
    one out of its receiver within ``(t, t + p)`` unless it reaches the
    destination. Times are slot start times, cyclic over the superframe.
single-path
    the same ``(sender, receiver, slot)`` is never part of two paths.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass

from tdmh.graph import NetworkGraph
from tdmh.scheduler.schedule import Schedule


class Rule(str, enum.Enum):
    CONNECTIVITY = "connectivity"
    UNIQUE = "unique-sender-receiver"
    COEXISTENCE = "coexistence"
    NO_SPURIOUS = "no-spurious"
    PERIODICITY = "periodicity"
    CAUSALITY = "causality"
    SINGLE_PATH = "single-path"


@dataclass(frozen=True)
class Violation:
    rule: Rule
    slot: int
    nodes: tuple[int, ...]
    detail: str = ""

    def __str__(self):
        nodes = ",".join(map(str, self.nodes))
        text = f"{self.rule.value} slot={self.slot} nodes={nodes}"
        return f"{text} {self.detail}" if self.detail else text


def verify_schedule(schedule: Schedule, graph: NetworkGraph) -> list[Violation]:
    grid = schedule.grid
    out: list[Violation] = []

    by_slot: dict[int, set[tuple[int, int]]] = defaultdict(set)
    owners: dict[tuple[int, int, int], set[tuple[int, int]]] = defaultdict(set)
    for tx in schedule.transmissions:
        if not 0 <= tx.slot < grid.n_slots:
            out.append(Violation(Rule.NO_SPURIOUS, tx.slot, tx.link, "slot outside superframe"))
            continue
        by_slot[tx.slot].add(tx.link)
        if schedule.is_registered(tx):
            owners[(tx.sender, tx.receiver, tx.slot)].add((tx.stream, tx.path))
        else:
            out.append(Violation(Rule.NO_SPURIOUS, tx.slot, tx.link, "not on a registered path"))

    for t in sorted(by_slot):
        pairs = sorted(by_slot[t])
        sends = defaultdict(int)
        recvs = defaultdict(int)
        for i, j in pairs:
            sends[i] += 1
            recvs[j] += 1
        for i, j in pairs:
            if not graph.has_edge(i, j):
                out.append(Violation(Rule.CONNECTIVITY, t, (i, j)))
            if sends[i] > 1 or recvs[i] or recvs[j] > 1 or sends[j]:
                out.append(Violation(Rule.UNIQUE, t, (i, j)))
        for a, (i, j) in enumerate(pairs):
            for k, l in pairs[a + 1:]:
                if i != k and j != l and (graph.has_edge(i, l) or graph.has_edge(k, j)):
                    out.append(Violation(Rule.COEXISTENCE, t, (i, j, k, l)))

    for (i, j, t), paths in sorted(owners.items(), key=lambda kv: (kv[0][2], kv[0][:2])):
        if len(paths) > 1:
            out.append(Violation(Rule.SINGLE_PATH, t, (i, j), f"paths={sorted(paths)}"))

    duration = grid.duration_ms
    for (s, z), path in sorted(schedule.paths().items()):
        members = {(tx.sender, tx.receiver, tx.slot) for tx in path.transmissions}
        p_tiles = schedule.period_tiles(s)
        p_ms = path.period_ms
        for i, j, t in sorted(members, key=lambda m: (m[2], m[0], m[1])):
            if p_tiles is None or grid.n_tiles % p_tiles:
                out.append(Violation(Rule.PERIODICITY, t, (i, j), "period does not divide superframe"))
            else:
                nxt = grid.shift(t, p_tiles)
                if nxt is None or (i, j, nxt) not in members:
                    out.append(Violation(Rule.PERIODICITY, t, (i, j), f"stream={s} path={z}"))

            start = grid.start_ms[t]

            def gap(x):
                # smallest positive distance once the superframe is unrolled
                return x % duration or duration

            following = any(a == j and gap(grid.start_ms[u] - start) < p_ms for a, _, u in members)
            preceding = any(b == i and gap(start - grid.start_ms[u]) < p_ms for _, b, u in members)
            at_src = i == path.src
            at_dst = j == path.dst
            if not ((at_src and at_dst) or (at_src and following)
                    or (at_dst and preceding) or (following and preceding)):
                out.append(Violation(Rule.CAUSALITY, t, (i, j), f"stream={s} path={z}"))
    return out


def violated_rules(schedule: Schedule, graph: NetworkGraph) -> set[Rule]:
    return {v.rule for v in verify_schedule(schedule, graph)}
