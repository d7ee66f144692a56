"""Binary and text forms of a schedule.

Binary layout, all integers big-endian::

    header        schedule_id u32 | superframe_tiles u16 | activation_tile u32
                  | stream_count u16 | transmission_count u16
    stream        id u16 | src u8 | dst u8 | period_ms u32 | spatial u8 | temporal u8
    transmission  sender u8 | receiver u8 | slot u16 | stream_index u16 | path u8

A transmission on no path carries stream index 0xFFFF and path 0xFF.

The text dump has one ``schedule``, then one ``stream`` line per stream, then
one ``slot sender->receiver stream path`` line per transmission.
"""

from __future__ import annotations

import struct

from tdmh.errors import Malformed
from tdmh.netconfig import NetworkConfiguration, SlotGrid
from tdmh.scheduler.schedule import Schedule, Transmission
from tdmh.scheduler.streams import Stream, StreamState

HEADER = struct.Struct(">IHIHH")
STREAM = struct.Struct(">HBBIBB")
TX = struct.Struct(">BBHHB")
NO_STREAM = 0xFFFF
NO_PATH = 0xFF


def encode_schedule(schedule: Schedule, config: NetworkConfiguration = None) -> bytes:
    out = bytearray(HEADER.pack(schedule.schedule_id, schedule.superframe_tiles,
                                schedule.activation_tile, len(schedule.streams),
                                len(schedule.transmissions)))
    for s in schedule.streams:
        out += STREAM.pack(s.id, s.src, s.dst, s.period_ms,
                           s.spatial_redundancy, s.temporal_redundancy)
    for tx in schedule.transmissions:
        out += TX.pack(tx.sender, tx.receiver, tx.slot,
                       NO_STREAM if tx.stream is None else tx.stream,
                       NO_PATH if tx.path is None else tx.path)
    return bytes(out)


def decode_schedule(data: bytes, config: NetworkConfiguration) -> Schedule:
    if len(data) < HEADER.size:
        raise Malformed("truncated schedule header")
    sid, tiles, activation, n_streams, n_tx = HEADER.unpack_from(data)
    expected = HEADER.size + n_streams * STREAM.size + n_tx * TX.size
    if len(data) != expected:
        raise Malformed(f"schedule is {len(data)} bytes, header announces {expected}")
    if tiles == 0:
        raise Malformed("empty data superframe")
    pos = HEADER.size
    streams = []
    for _ in range(n_streams):
        sid_, src, dst, period, spatial, temporal = STREAM.unpack_from(data, pos)
        pos += STREAM.size
        try:
            streams.append(Stream(sid_, src, dst, period, spatial, temporal, StreamState.SCHEDULED))
        except ValueError as exc:
            raise Malformed(str(exc)) from None
    txs = []
    for _ in range(n_tx):
        sender, receiver, slot, stream, path = TX.unpack_from(data, pos)
        pos += TX.size
        try:
            txs.append(Transmission(slot, sender, receiver,
                                    None if stream == NO_STREAM else stream,
                                    None if path == NO_PATH else path))
        except ValueError as exc:
            raise Malformed(str(exc)) from None
    return Schedule(sid, tiles, activation, streams, txs, SlotGrid.from_config(config, tiles))


def format_schedule(schedule: Schedule) -> str:
    lines = [f"schedule id={schedule.schedule_id} superframe_tiles={schedule.superframe_tiles} "
             f"activation_tile={schedule.activation_tile}"]
    for index, s in enumerate(schedule.streams):
        lines.append(f"stream {index} id={s.id} {s.src}->{s.dst} period={s.period_ms} "
                     f"spatial={s.spatial_redundancy} temporal={s.temporal_redundancy}")
    for tx in schedule.transmissions:
        stream = "-" if tx.stream is None else tx.stream
        path = "-" if tx.path is None else tx.path
        lines.append(f"{tx.slot} {tx.sender}->{tx.receiver} {stream} {path}")
    return "\n".join(lines) + "\n"


def _kv(tokens):
    out = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {tok!r}")
        out[key] = int(value)
    return out


def _arrow(tok):
    a, sep, b = tok.partition("->")
    if not sep:
        raise ValueError(f"expected sender->receiver, got {tok!r}")
    return int(a), int(b)


def parse_schedule(text: str, config: NetworkConfiguration) -> Schedule:
    header = None
    streams: list[Stream] = []
    txs: list[Transmission] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "schedule":
                header = _kv(parts[1:])
            elif parts[0] == "stream":
                kv = _kv(parts[4:])
                src, dst = _arrow(parts[3])
                streams.append(Stream(_kv([parts[2]])["id"], src, dst, kv["period"],
                                      kv.get("spatial", 1), kv.get("temporal", 1),
                                      StreamState.SCHEDULED))
            else:
                sender, receiver = _arrow(parts[1])
                stream = None if parts[2] == "-" else int(parts[2])
                path = None if parts[3] == "-" else int(parts[3])
                txs.append(Transmission(int(parts[0]), sender, receiver, stream, path))
        except (ValueError, IndexError, KeyError) as exc:
            raise Malformed(f"line {lineno}: {exc}") from None
    if header is None:
        raise Malformed("missing schedule header line")
    tiles = header.get("superframe_tiles", len(config.control_superframe))
    return Schedule(header.get("id", 0), tiles, header.get("activation_tile", 0),
                    streams, txs, SlotGrid.from_config(config, tiles))
