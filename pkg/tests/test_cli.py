import csv
import io
import os
import shutil

import pytest

from conftest import DATA
from tdmh.cli import main
from tdmh.io import load_config
from tdmh.netconfig import control_overhead


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_ok_and_violation(tmp_path, capsys):
    assert run(["validate", "--config", os.path.join(DATA, "default.cfg")], capsys)[:2] == (0, "ok\n")
    bad = tmp_path / "bad.cfg"
    bad.write_text("tile_duration_ms = 10\n")
    code, out, _ = run(["validate", "--config", str(bad)], capsys)
    assert code == 2 and out.strip()


def test_missing_and_malformed_inputs(tmp_path, capsys):
    assert run(["validate", "--config", str(tmp_path / "nope.cfg")], capsys)[0] == 1
    junk = tmp_path / "junk.cfg"
    junk.write_text("max_nodes = many\n")
    assert run(["validate", "--config", str(junk)], capsys)[0] == 1


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["validate"], ["simulate", "--scenario", "x", "--seed", "one"],
    ["overhead", "--sweep", "tile_duration_ms"],
])
def test_usage_errors(argv, capsys):
    assert run(argv, capsys)[0] == 64


def test_overhead_sweep_is_monotone(capsys):
    code, out, _ = run(["overhead", "--config", os.path.join(DATA, "default.cfg"),
                        "--sweep", "tile_duration_ms=50,100,200,500"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    values = [float(r["overhead"]) for r in rows]
    assert values == sorted(values, reverse=True)
    base = load_config(os.path.join(DATA, "default.cfg"))
    for r in rows:
        cfg = base.replace(tile_duration_ms=int(r["tile_duration_ms"]))
        assert float(r["overhead"]) == pytest.approx(control_overhead(cfg), abs=1e-6)


def test_overhead_sweep_with_invalid_value(capsys):
    assert run(["overhead", "--sweep", "tile_duration_ms=5"], capsys)[0] == 2


@pytest.mark.parametrize("suffix", [".txt", ".bin"])
def test_schedule_then_verify(tmp_path, capsys, suffix):
    out = tmp_path / ("sched" + suffix)
    code, _, _ = run(["schedule", "--graph", os.path.join(DATA, "office_sched.graph"),
                      "--streams", os.path.join(DATA, "office.streams"),
                      "--config", os.path.join(DATA, "office.cfg"), "--out", str(out)], capsys)
    assert code == 0
    code, text, _ = run(["verify", str(out), "--graph", os.path.join(DATA, "office_sched.graph"),
                         "--config", os.path.join(DATA, "office.cfg")], capsys)
    assert (code, text) == (0, "ok\n")


def test_schedule_prints_latency(capsys):
    code, out, _ = run(["schedule", "--graph", os.path.join(DATA, "office_sched.graph"),
                        "--streams", os.path.join(DATA, "office.streams"),
                        "--config", os.path.join(DATA, "office.cfg")], capsys)
    assert code == 0 and out.startswith("schedule ") and "# latency stream 0:" in out


def test_verify_reports_unique_sender_receiver(tmp_path, capsys):
    graph = tmp_path / "g.txt"
    graph.write_text("0 1 1.0\n1 2 1.0\n")
    sched = tmp_path / "s.txt"
    # node 1 receives from 2 while it sends to 0
    sched.write_text("schedule id=1 superframe_tiles=2 activation_tile=0\n"
                     "stream 0 id=0 2->0 period=200 spatial=1 temporal=1\n"
                     "0 2->1 0 0\n"
                     "0 1->0 0 0\n")
    code, out, _ = run(["verify", str(sched), "--graph", str(graph)], capsys)
    assert code == 2
    lines = out.splitlines()
    assert any(ln.startswith("unique-sender-receiver slot=0 nodes=") for ln in lines)
    assert all(" slot=" in ln for ln in lines)


def test_verify_malformed_schedule(tmp_path, capsys):
    sched = tmp_path / "s.bin"
    sched.write_bytes(b"\x00\x01")
    assert run(["verify", str(sched), "--graph", os.path.join(DATA, "office.graph")], capsys)[0] == 1


def test_simulate_is_deterministic(tmp_path, capsys):
    scenario = os.path.join(DATA, "walkthrough.yaml")
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        assert run(["simulate", "--scenario", scenario, "--seed", "4", "--out", str(d), "--trace"],
                   capsys)[0] == 0
        outs.append({name: (d / name).read_bytes() for name in sorted(os.listdir(d))})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"metrics.csv", "trace_walkthrough_seed4.log"}
    head = outs[0]["metrics.csv"].decode().splitlines()[0]
    assert head.startswith("scenario,seed,formation_ms,convergence_ms")


def test_simulate_seed_sweep_to_stdout(capsys):
    code, out, _ = run(["simulate", "--scenario", os.path.join(DATA, "walkthrough.yaml"),
                        "--sweep", "seed=1,2,3"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["seed"] for r in rows] == ["1", "2", "3"]
    assert all(r["formation_ms"] == "1300" for r in rows)


def test_simulate_invalid_scenario(tmp_path, capsys):
    p = tmp_path / "s.yaml"
    p.write_text("duration_ms: 100\ngraph: ['1 2 1.0']\n")
    code, out, _ = run(["simulate", "--scenario", str(p)], capsys)
    assert code == 2 and "master" in out


def test_power_table(capsys):
    code, out, _ = run(["power", "--load", "0,0.5", "--connectivity", "0,1",
                        "--sweep", "tile_duration_ms=100,1000"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["tile_duration_ms", "data_usage", "connectivity", "current_ma"]
    assert len(rows) == 8
    assert run(["power", "--connectivity", "2"], capsys)[0] == 64


def test_console_script_installed():
    assert shutil.which("tdmh") is not None
