"""Run results, the event trace, and measurements taken from the trace."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from tdmh.errors import NotConverged, NotFormed
from tdmh.graph import edge


@dataclass(frozen=True)
class TraceEvent:
    time_ms: int
    kind: str
    fields: tuple = ()

    def get(self, key, default=None):
        for k, v in self.fields:
            if k == key:
                return v
        return default

    def line(self) -> str:
        parts = [str(self.time_ms), self.kind]
        parts += [f"{k}={v}" for k, v in self.fields]
        return " ".join(parts)


def format_trace(events: Iterable[TraceEvent]) -> str:
    return "".join(e.line() + "\n" for e in events)


def parse_trace(text: str) -> list[TraceEvent]:
    out = []
    for raw in text.splitlines():
        if not raw.strip():
            continue
        time_ms, kind, *rest = raw.split()
        fields = []
        for tok in rest:
            k, _, v = tok.partition("=")
            try:
                value = int(v)
            except ValueError:
                try:
                    value = float(v)
                except ValueError:
                    value = v
            fields.append((k, value))
        out.append(TraceEvent(int(time_ms), kind, tuple(fields)))
    return out


@dataclass
class Metrics:
    scenario: str
    seed: int
    formation_time_ms: Optional[int] = None
    convergence_after_failure_ms: Optional[int] = None
    silent_phase_ms: Optional[int] = None
    propagation_phase_ms: Optional[int] = None
    sent: dict[int, int] = field(default_factory=dict)
    delivered: dict[int, int] = field(default_factory=dict)
    link_uptime: dict[tuple[int, int], float] = field(default_factory=dict)
    control_overhead: float = 0.0
    node_current_ma: dict[int, float] = field(default_factory=dict)
    collisions: int = 0
    schedules: int = 0
    trace: list[TraceEvent] = field(default_factory=list, repr=False)

    @property
    def reliability(self) -> dict[int, float]:
        return {s: self.delivered.get(s, 0) / n for s, n in self.sent.items() if n}


CSV_FIXED = ["scenario", "seed", "formation_ms", "convergence_ms", "silent_ms",
             "propagation_ms", "overhead", "collisions", "schedules"]


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def metrics_rows(runs: list[Metrics]) -> tuple[list[str], list[list[str]]]:
    """CSV header and rows; one ``reliability_<stream id>`` column per stream seen."""
    stream_ids = sorted({s for m in runs for s in m.sent})
    header = CSV_FIXED + [f"reliability_{s}" for s in stream_ids]
    rows = []
    for m in runs:
        rel = m.reliability
        rows.append([_cell(v) for v in (
            m.scenario, m.seed, m.formation_time_ms, m.convergence_after_failure_ms,
            m.silent_phase_ms, m.propagation_phase_ms, m.control_overhead,
            m.collisions, m.schedules)] + [_cell(rel.get(s)) for s in stream_ids])
    return header, rows


def metrics_csv(runs: list[Metrics]) -> str:
    header, rows = metrics_rows(runs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _first_time(trace: list[TraceEvent], condition, start: int) -> Optional[int]:
    """Earliest timestamp >= ``start`` at which ``condition(true, master)`` holds,
    judged once all events carrying that timestamp have been applied."""
    true: set = set()
    master: set = set()
    for i, e in enumerate(trace):
        if e.kind == "link_up":
            true.add(edge(e.get("u"), e.get("v")))
        elif e.kind == "link_down":
            true.discard(edge(e.get("u"), e.get("v")))
        elif e.kind == "master_add":
            master.add(edge(e.get("u"), e.get("v")))
        elif e.kind == "master_del":
            master.discard(edge(e.get("u"), e.get("v")))
        if i + 1 < len(trace) and trace[i + 1].time_ms == e.time_ms:
            continue
        if e.time_ms >= start and condition(true, master):
            return e.time_ms
    return None


def sync_time(trace: Iterable[TraceEvent]) -> Optional[int]:
    for e in trace:
        if e.kind == "synced":
            return e.time_ms
    return None


def measure_formation_time(trace: list[TraceEvent]) -> int:
    """Time from clock synchronisation until the master first holds the true graph."""
    synced = sync_time(trace)
    if synced is None:
        raise NotFormed("nodes never synchronised")
    t = _first_time(trace, lambda true, master: true == master, synced)
    if t is None:
        raise NotFormed("master never held the full graph")
    return t - synced


def _failure_time(trace, failed):
    for e in trace:
        if e.kind == "fail" and e.get("node") == failed:
            return e.time_ms
    raise NotConverged(f"node {failed} never failed")


def measure_convergence_after_failure(trace: list[TraceEvent], failed: int) -> int:
    """Time from the failure until no master link touches ``failed``."""
    t_fail = _failure_time(trace, failed)
    t = _first_time(trace, lambda true, master: not any(failed in e for e in master), t_fail)
    if t is None:
        raise NotConverged(f"master still lists links of node {failed}")
    return t - t_fail


def convergence_phases(trace: list[TraceEvent], failed: int) -> tuple[int, int]:
    """(silent, propagation): until no node overhears ``failed`` any more, then the rest."""
    total = measure_convergence_after_failure(trace, failed)
    t_fail = _failure_time(trace, failed)
    for e in trace:
        if e.kind == "silent" and e.get("node") == failed and e.time_ms >= t_fail:
            silent = e.time_ms - t_fail
            return silent, total - silent
    raise NotConverged(f"node {failed} is still overheard")


def measure_stream_reliability(trace: list[TraceEvent]) -> dict[int, float]:
    """Delivered over elapsed period instances, per stream id."""
    out = {}
    for e in trace:
        if e.kind == "stream" and e.get("sent", 0) > 0:
            out[e.get("id")] = e.get("delivered") / e.get("sent")
    return out


def summary(values: list[float]) -> dict[str, float]:
    n = len(values)
    if n == 0:
        return {"n": 0, "mean": math.nan, "min": math.nan, "max": math.nan}
    return {"n": n, "mean": sum(values) / n, "min": min(values), "max": max(values)}
