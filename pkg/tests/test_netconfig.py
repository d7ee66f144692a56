import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tdmh.netconfig import (NetworkConfiguration, SlotGrid, TileKind, control_overhead,
                            data_superframe_length, slot_layout, uplink_node_for_slot, validate)

D, U = TileKind.DOWNLINK, TileKind.UPLINK


def rules(cfg):
    return [v.rule for v in validate(cfg)]


def test_default_config_is_valid():
    assert validate(NetworkConfiguration()) == []


def test_missing_uplink_tile():
    assert "missing UPLINK tile" in rules(NetworkConfiguration(control_superframe=(D,)))


def test_missing_downlink_tile():
    assert "missing DOWNLINK tile" in rules(NetworkConfiguration(control_superframe=(U, U)))


def test_oversized_frame():
    assert "frame exceeds physical maximum" in rules(NetworkConfiguration(data_frame_size_bytes=126))
    assert validate(NetworkConfiguration(data_frame_size_bytes=125)) == []


@pytest.mark.parametrize("changes, field", [
    ({"downlink_slot_duration_ms": 100}, "downlink_slot_duration_ms"),
    ({"uplink_frames_per_slot": 17}, "uplink_frames_per_slot"),
    ({"uplink_frames_per_slot": 0}, "uplink_frames_per_slot"),
    ({"max_nodes": 1}, "max_nodes"),
    ({"max_nodes": 257}, "max_nodes"),
    ({"max_hops": 0}, "max_hops"),
    ({"topology_expiry_rounds": 0}, "topology_expiry_rounds"),
    ({"schedule_repetitions": 0}, "schedule_repetitions"),
    ({"allowed_periods_ms": (150,)}, "allowed_periods_ms"),
])
def test_violations_name_the_field(changes, field):
    cfg = NetworkConfiguration().replace(**changes)
    assert field in {v.field for v in validate(cfg)}


def test_derived_defaults_follow_inputs():
    cfg = NetworkConfiguration()
    assert cfg.downlink_slot_duration_ms == 2 + 2 * cfg.max_hops
    assert cfg.replace(max_hops=10).downlink_slot_duration_ms == 22
    assert cfg.replace(tile_duration_ms=50).allowed_periods_ms[:3] == (50, 100, 250)
    assert cfg.replace(max_hops=10, downlink_slot_duration_ms=30).downlink_slot_duration_ms == 30


def test_propagation_compensation_adds_one_frame():
    cfg = NetworkConfiguration(uplink_frames_per_slot=2, propagation_delay_compensation=True)
    assert cfg.effective_uplink_frames == 3
    assert cfg.uplink_slot_duration_ms == 18


def test_slot_layout_uplink_example():
    lay = slot_layout(NetworkConfiguration(), U)
    assert (lay.control_slot_ms, lay.data_slot_count, lay.slack_ms) == (6, 15, 4)


def test_slot_layout_all_control_tile():
    lay = slot_layout(NetworkConfiguration(downlink_slot_duration_ms=100), D)
    assert (lay.data_slot_count, lay.slack_ms) == (0, 0)


def test_slot_layout_downlink_example():
    cfg = NetworkConfiguration(downlink_slot_duration_ms=22)
    lay = slot_layout(cfg, D)
    assert (lay.data_slot_count, lay.slack_ms) == (13, 0)


def test_downlink_tiles_never_hold_more_data_slots():
    for hops in range(1, 20):
        cfg = NetworkConfiguration(max_hops=hops)
        if cfg.downlink_slot_duration_ms >= cfg.uplink_slot_duration_ms:
            assert slot_layout(cfg, D).data_slot_count <= slot_layout(cfg, U).data_slot_count


@given(tile=st.integers(10, 1000), slot=st.integers(1, 50), hops=st.integers(1, 30),
       frames=st.integers(1, 6), frame_ms=st.integers(1, 20))
def test_slot_layout_identity(tile, slot, hops, frames, frame_ms):
    cfg = NetworkConfiguration(tile_duration_ms=tile, data_slot_duration_ms=slot, max_hops=hops,
                               uplink_frames_per_slot=frames, uplink_frame_duration_ms=frame_ms)
    if validate(cfg):
        return
    for kind in (D, U):
        lay = slot_layout(cfg, kind)
        assert lay.control_slot_ms + lay.data_slot_count * slot + lay.slack_ms == tile
        assert 0 <= lay.slack_ms < slot


def test_round_robin_examples():
    assert [uplink_node_for_slot(k, 8) for k in range(4)] == [7, 6, 5, 4]
    assert uplink_node_for_slot(6, 8) == 1
    assert uplink_node_for_slot(7, 8) == 7
    assert {uplink_node_for_slot(k, 2) for k in range(10)} == {1}


@given(max_nodes=st.integers(2, 256), start=st.integers(0, 10**6))
def test_round_robin_window_is_a_permutation(max_nodes, start):
    window = [uplink_node_for_slot(start + k, max_nodes) for k in range(max_nodes - 1)]
    assert sorted(window) == list(range(1, max_nodes))


def test_round_robin_rejects_master_only_network():
    with pytest.raises(ValueError):
        uplink_node_for_slot(0, 1)


def test_overhead_default_value():
    # downlink: 14 ms control -> 14 data slots; uplink: 6 ms -> 15; capacity 16 + 16
    assert control_overhead(NetworkConfiguration()) == pytest.approx(1 - Fraction(29, 32))
    assert 0.07 <= control_overhead(NetworkConfiguration()) <= 0.30


def test_overhead_all_control():
    cfg = NetworkConfiguration(downlink_slot_duration_ms=100, uplink_frames_per_slot=1,
                               uplink_frame_duration_ms=100)
    assert control_overhead(cfg) == 1.0


def test_overhead_monotone_in_downlink_duration():
    values = [control_overhead(NetworkConfiguration(downlink_slot_duration_ms=d))
              for d in range(2, 99)]
    assert all(a <= b for a, b in zip(values, values[1:]))


@given(reps=st.integers(1, 8), hops=st.integers(1, 20))
def test_overhead_independent_of_superframe_repetition(reps, hops):
    cfg = NetworkConfiguration(max_hops=hops)
    repeated = cfg.replace(control_superframe=cfg.control_superframe * reps)
    assert control_overhead(repeated) == pytest.approx(control_overhead(cfg), abs=1e-15)


def test_data_superframe_examples():
    cfg = NetworkConfiguration()
    assert data_superframe_length(cfg, {100, 200}) == 2
    assert data_superframe_length(cfg, set()) == 2
    cfg3 = NetworkConfiguration(allowed_periods_ms=(100, 200, 300))
    assert data_superframe_length(cfg3, {300}) == 6


def test_data_superframe_rejects_inadmissible_period():
    with pytest.raises(ValueError):
        data_superframe_length(NetworkConfiguration(), {300})


@given(st.sets(st.sampled_from(NetworkConfiguration().allowed_periods_ms[:6])),
       st.integers(2, 5))
def test_data_superframe_multiple_of_control(periods, csf_len):
    cfg = NetworkConfiguration(control_superframe=(D,) + (U,) * (csf_len - 1))
    tiles = data_superframe_length(cfg, periods)
    assert tiles % csf_len == 0
    for p in periods:
        assert (tiles * cfg.tile_duration_ms) % p == 0
    assert tiles * cfg.tile_duration_ms == math.lcm(cfg.control_superframe_ms, *periods)


def test_slot_grid_numbering():
    grid = SlotGrid.from_config(NetworkConfiguration(), 4)
    assert grid.tile_slots == [14, 15, 14, 15]
    assert grid.n_slots == 58
    assert grid.start_ms[0] == 14 and grid.start_ms[14] == 106
    assert grid.shift(0, 2) == 29
    assert grid.shift(29, 2) == 0
    assert grid.shift(14 + 14, 1) is None  # uplink offset 14 has no downlink twin
    assert list(grid.slots_in_tiles(1, 2)) == list(range(14, 43))
