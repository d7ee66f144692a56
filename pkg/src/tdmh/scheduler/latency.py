"""Worst-case delivery latency per stream, read off a schedule."""

from __future__ import annotations

from tdmh.scheduler.schedule import Schedule


def latency_bounds(schedule: Schedule) -> dict[int, int]:
    """Stream index -> latency bound in ms.

    Per period window the latency is counted from the start of the window's
    first data slot (the earliest moment the source can transmit) to the end
    of the last slot delivering a copy to the destination; the bound is the
    largest value over all windows of the superframe. A packet that arrives
    at all arrives within it.
    """
    grid = schedule.grid
    deliveries: dict[tuple[int, int], int] = {}
    for tx in schedule.transmissions:
        if not schedule.is_registered(tx):
            continue
        if tx.receiver != schedule.streams[tx.stream].dst:
            continue
        key = (tx.stream, schedule.instance_of(tx))
        deliveries[key] = max(deliveries.get(key, -1), tx.slot)

    bounds: dict[int, int] = {}
    for (s, m), last in deliveries.items():
        p = schedule.period_tiles(s)
        window = grid.slots_in_tiles(m * p, p)
        latency = grid.end_ms(last) - grid.start_ms[window.start]
        bounds[s] = max(bounds.get(s, 0), latency)
    return bounds
