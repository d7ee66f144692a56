"""Text formats: configuration, graph, streams and scenario files.

Configuration files are flat ``key = value`` lines naming
:class:`~tdmh.netconfig.NetworkConfiguration` fields; ``#`` starts a comment.
Tuples are comma separated::

    tile_duration_ms = 100
    control_superframe = DOWNLINK,UPLINK
    max_nodes = 32

Streams files hold ``src dst period_ms [spatial [temporal]]`` lines.

Scenario files are YAML mappings with the keys ``name``, ``duration_ms``,
``seed``, ``config`` (field mapping), ``graph`` (a list of ``"u v reliability"``
strings, or ``{hexagonal: n, ids: reverse|forward}``, or ``{file: path}``),
``id_assignment`` (``position: id``), ``absent``, ``faults`` and ``streams``.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import fields
from typing import Optional

import yaml

from tdmh.graph import NetworkGraph
from tdmh.netconfig import NetworkConfiguration, TileKind
from tdmh.scheduler.streams import StreamManagementElement
from tdmh.sim.scenario import Fault, FaultKind, Scenario, StreamRequest
from tdmh.sim.topologies import hexagonal


class FormatError(ValueError):
    """A file that does not follow its documented grammar."""


_FIELDS = {f.name: f for f in fields(NetworkConfiguration)}


def _convert(name: str, raw):
    if name == "control_superframe":
        items = raw.split(",") if isinstance(raw, str) else raw
        return tuple(TileKind(str(k).strip().upper()) for k in items)
    if name == "allowed_periods_ms":
        if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "auto")):
            return None
        items = raw.split(",") if isinstance(raw, str) else raw
        return tuple(int(p) for p in items)
    if name == "propagation_delay_compensation":
        if isinstance(raw, bool):
            return raw
        value = str(raw).strip().lower()
        if value not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"expected a boolean, got {raw!r}")
        return value in ("true", "1", "yes")
    if name == "downlink_slot_duration_ms" and (raw is None or str(raw).strip().lower() == "auto"):
        return None
    if isinstance(raw, str):
        raw = raw.strip()
        return int(raw, 0)
    return int(raw)


def config_from_mapping(values: dict, base: Optional[NetworkConfiguration] = None) -> NetworkConfiguration:
    changes = {}
    for key, raw in values.items():
        if key not in _FIELDS:
            raise FormatError(f"unknown configuration key {key!r}")
        try:
            changes[key] = _convert(key, raw)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{key}: {exc}") from None
    return (base or NetworkConfiguration()).replace(**changes)


def parse_config(text: str) -> NetworkConfiguration:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",),
                                       delimiters=("=",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise FormatError(str(exc).replace("\n", " ")) from None
    return config_from_mapping(dict(parser["config"]))


def format_config(config: NetworkConfiguration) -> str:
    lines = []
    for name in _FIELDS:
        value = getattr(config, name)
        if name == "control_superframe":
            value = ",".join(k.value for k in value)
        elif name == "allowed_periods_ms":
            value = ",".join(map(str, value))
        elif isinstance(value, bool):
            value = str(value).lower()
        lines.append(f"{name} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> NetworkConfiguration:
    with open(path) as fh:
        return parse_config(fh.read())


def load_graph(path: str) -> NetworkGraph:
    with open(path) as fh:
        text = fh.read()
    try:
        return NetworkGraph.from_edge_list(text)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def parse_streams(text: str) -> list[StreamManagementElement]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if not 3 <= len(parts) <= 5:
            raise FormatError(f"line {lineno}: expected 'src dst period_ms [spatial [temporal]]'")
        try:
            out.append(StreamManagementElement(*(int(p) for p in parts)))
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    return out


def load_streams(path: str) -> list[StreamManagementElement]:
    with open(path) as fh:
        return parse_streams(fh.read())


def _graph_from(spec, base_dir: str) -> NetworkGraph:
    if isinstance(spec, list):
        return NetworkGraph.from_edge_list("\n".join(str(x) for x in spec))
    if isinstance(spec, dict) and "hexagonal" in spec:
        return hexagonal(int(spec["hexagonal"]), spec.get("ids", "reverse"),
                         float(spec.get("reliability", 1.0)))
    if isinstance(spec, dict) and "file" in spec:
        return load_graph(os.path.join(base_dir, spec["file"]))
    raise FormatError("graph must be an edge list, {hexagonal: n} or {file: path}")


def _fault(item: dict) -> Fault:
    kind = FaultKind(str(item["event"]).upper())
    t = int(item["time_ms"])
    if kind is FaultKind.LINK_SET:
        return Fault.link(t, int(item["u"]), int(item["v"]), float(item["reliability"]))
    return Fault(t, kind, node=int(item["node"]))


def _stream(item: dict) -> StreamRequest:
    sme = StreamManagementElement(int(item["src"]), int(item["dst"]), int(item["period_ms"]),
                                  int(item.get("spatial", 1)), int(item.get("temporal", 1)))
    close = item.get("close_ms")
    return StreamRequest(sme, int(item.get("open_ms", 0)), None if close is None else int(close))


def scenario_from_mapping(doc: dict, base_dir: str = ".") -> Scenario:
    if not isinstance(doc, dict):
        raise FormatError("scenario must be a mapping")
    unknown = set(doc) - {"name", "duration_ms", "seed", "config", "graph", "id_assignment",
                          "absent", "faults", "streams"}
    if unknown:
        raise FormatError(f"unknown scenario keys {sorted(unknown)}")
    try:
        config = config_from_mapping(doc.get("config") or {})
        graph = _graph_from(doc.get("graph", []), base_dir)
        ids = doc.get("id_assignment")
        return Scenario(
            config=config,
            physical_graph=graph,
            duration_ms=int(doc["duration_ms"]),
            seed=int(doc.get("seed", 0)),
            faults=[_fault(f) for f in doc.get("faults") or []],
            streams=[_stream(s) for s in doc.get("streams") or []],
            absent=frozenset(int(n) for n in doc.get("absent") or []),
            id_assignment=None if ids is None else {int(k): int(v) for k, v in ids.items()},
            name=str(doc.get("name", "scenario")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"bad scenario: {exc!r}") from None


def parse_scenario(text: str, base_dir: str = ".") -> Scenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise FormatError(f"scenario is not valid YAML: {exc}") from None
    return scenario_from_mapping(doc, base_dir)


def load_scenario(path: str) -> Scenario:
    with open(path) as fh:
        return parse_scenario(fh.read(), os.path.dirname(os.path.abspath(path)))
