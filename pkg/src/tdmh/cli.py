"""Command-line front end.

Exit codes: 0 success, 2 validation or verification violations (printed one
per line), 1 unreadable or malformed input, 64 usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from typing import Optional, Sequence

from tdmh.errors import InvalidScenario, Malformed
from tdmh.io import FormatError, load_config, load_graph, load_scenario, load_streams
from tdmh.netconfig import NetworkConfiguration, control_overhead, validate
from tdmh.scheduler import (decode_schedule, encode_schedule, format_schedule, latency_bounds,
                            parse_schedule, schedule_streams, verify_schedule)
from tdmh.sim.engine import run_scenario
from tdmh.sim.metrics import format_trace, metrics_csv
from tdmh.sim.power import estimate_power

EXIT_OK = 0
EXIT_IO = 1
EXIT_VIOLATION = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageError(message)


class _Violations(Exception):
    def __init__(self, lines):
        self.lines = list(lines)
        super().__init__("\n".join(self.lines))


def parse_sweep(spec: str) -> tuple[str, list[str]]:
    key, sep, values = spec.partition("=")
    if not sep or not key or not values:
        raise UsageError(f"--sweep expects key=v1,v2,... not {spec!r}")
    return key.strip(), [v.strip() for v in values.split(",") if v.strip()]


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def _config(path: Optional[str]) -> NetworkConfiguration:
    cfg = NetworkConfiguration() if path is None else load_config(path)
    problems = validate(cfg)
    if problems:
        raise _Violations(str(p) for p in problems)
    return cfg


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: Optional[str], binary: bool = False) -> None:
    if out is None:
        if binary:
            sys.stdout.buffer.write(text)
        else:
            sys.stdout.write(text)
        return
    with open(out, "wb" if binary else "w") as fh:
        fh.write(text)


# -- subcommands ---------------------------------------------------------------

def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    problems = validate(cfg)
    for p in problems:
        print(p)
    if problems:
        return EXIT_VIOLATION
    print("ok")
    return EXIT_OK


def cmd_overhead(args) -> int:
    from tdmh.io import config_from_mapping
    base = _config(args.config)
    key, values = ("tile_duration_ms", [str(base.tile_duration_ms)])
    if args.sweep:
        key, values = parse_sweep(args.sweep)
    rows = []
    for v in values:
        cfg = config_from_mapping({key: v}, base)
        problems = validate(cfg)
        if problems:
            raise _Violations(f"{key}={v}: {p}" for p in problems)
        rows.append([v, f"{control_overhead(cfg):.6f}"])
    _emit(_csv([key, "overhead"], rows), args.out)
    return EXIT_OK


def cmd_schedule(args) -> int:
    cfg = _config(args.config)
    graph = load_graph(args.graph)
    streams = load_streams(args.streams)
    schedule = schedule_streams(graph, streams, cfg)
    for s in schedule.rejected:
        print(f"rejected stream {s.id} {s.src}->{s.dst} period={s.period_ms}", file=sys.stderr)
    if args.out and not args.out.endswith(".txt"):
        _emit(encode_schedule(schedule, cfg), args.out, binary=True)
        return EXIT_OK
    text = format_schedule(schedule)
    bounds = latency_bounds(schedule)
    text += "".join(f"# latency stream {i}: {ms} ms\n" for i, ms in sorted(bounds.items()))
    _emit(text, args.out)
    return EXIT_OK


def read_schedule(path: str, cfg: NetworkConfiguration):
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        text = None
    if text is not None and text.lstrip().startswith(("schedule", "#")):
        return parse_schedule(text, cfg)
    return decode_schedule(data, cfg)


def cmd_verify(args) -> int:
    cfg = _config(args.config)
    schedule = read_schedule(args.schedule, cfg)
    graph = load_graph(args.graph)
    violations = verify_schedule(schedule, graph)
    for v in violations:
        print(v)
    if violations:
        return EXIT_VIOLATION
    print("ok")
    return EXIT_OK


def _sweep_scenarios(base, sweep):
    from dataclasses import replace
    from tdmh.io import config_from_mapping
    if not sweep:
        return [base]
    key, values = parse_sweep(sweep)
    out = []
    for v in values:
        if key == "seed":
            out.append(replace(base, seed=int(v)))
        elif key == "duration_ms":
            out.append(replace(base, duration_ms=int(v), name=f"{base.name}-{key}={v}"))
        else:
            out.append(replace(base, config=config_from_mapping({key: v}, base.config),
                               name=f"{base.name}-{key}={v}"))
    return out


def cmd_simulate(args) -> int:
    base = load_scenario(args.scenario)
    if args.seed is not None:
        from dataclasses import replace
        base = replace(base, seed=args.seed)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    runs = []
    for sc in _sweep_scenarios(base, args.sweep):
        m = run_scenario(sc)
        runs.append(m)
        if args.trace:
            name = f"trace_{sc.name}_seed{sc.seed}.log"
            path = os.path.join(args.out, name) if args.out else name
            with open(path, "w") as fh:
                fh.write(format_trace(m.trace))
    text = metrics_csv(runs)
    if args.out:
        _emit(text, os.path.join(args.out, "metrics.csv"))
    else:
        _emit(text, None)
    return EXIT_OK


def cmd_power(args) -> int:
    from tdmh.io import config_from_mapping
    base = _config(args.config)
    loads = [_number(x) for x in args.load.split(",")]
    conns = [_number(x) for x in args.connectivity.split(",")]
    key, values = (None, [None])
    if args.sweep:
        key, values = parse_sweep(args.sweep)
    header = ([key] if key else []) + ["data_usage", "connectivity", "current_ma"]
    rows = []
    for v in values:
        cfg = base if key is None else config_from_mapping({key: v}, base)
        problems = validate(cfg)
        if problems:
            raise _Violations(str(p) for p in problems)
        for c in conns:
            if not 0 <= c <= 1:
                raise UsageError("connectivity must lie in [0, 1]")
            for u in loads:
                if not 0 <= u <= 1:
                    raise UsageError("data usage must lie in [0, 1]")
                rows.append(([v] if key else []) + [u, c, f"{estimate_power(cfg, u, c):.6f}"])
    _emit(_csv(header, rows), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tdmh", description="TDMH-MAC tooling: schedules, verification, simulation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check a configuration file")
    v.add_argument("--config", required=True)
    v.set_defaults(func=cmd_validate)

    o = sub.add_parser("overhead", help="control overhead, optionally swept over one key")
    o.add_argument("--config")
    o.add_argument("--sweep")
    o.add_argument("--out")
    o.set_defaults(func=cmd_overhead)

    s = sub.add_parser("schedule", help="schedule streams on a graph")
    s.add_argument("--graph", required=True)
    s.add_argument("--streams", required=True)
    s.add_argument("--config")
    s.add_argument("--out", help="output file; text unless it ends in something other than .txt")
    s.set_defaults(func=cmd_schedule)

    c = sub.add_parser("verify", help="check a schedule against a graph")
    c.add_argument("schedule")
    c.add_argument("--graph", required=True)
    c.add_argument("--config")
    c.set_defaults(func=cmd_verify)

    m = sub.add_parser("simulate", help="run a scenario")
    m.add_argument("--scenario", required=True)
    m.add_argument("--seed", type=int)
    m.add_argument("--out", help="directory for metrics.csv and traces")
    m.add_argument("--sweep")
    m.add_argument("--trace", action="store_true")
    m.set_defaults(func=cmd_simulate)

    w = sub.add_parser("power", help="estimated average node current")
    w.add_argument("--config")
    w.add_argument("--load", default="0,0.1,0.2", help="fractions of data slots in use")
    w.add_argument("--connectivity", default="1.0")
    w.add_argument("--sweep")
    w.add_argument("--out")
    w.set_defaults(func=cmd_power)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"tdmh: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (_Violations,) as exc:
        for line in exc.lines:
            print(line)
        return EXIT_VIOLATION
    except InvalidScenario as exc:
        for line in str(exc).split("; "):
            print(line)
        return EXIT_VIOLATION
    except (OSError, FormatError, Malformed, ValueError) as exc:
        print(f"tdmh: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
