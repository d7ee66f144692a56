"""Average current drawn by a node, from its duty cycle.

Charge is accumulated over one control superframe (or a longer window for
data-slot loads) in mA*ms and divided by the window length.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from tdmh.datalink import NodeSlotProgram
from tdmh.netconfig import MAX_FRAME_PAYLOAD, NetworkConfiguration, TileKind, slot_layout
from tdmh.scheduler.schedule import Schedule


@dataclass(frozen=True)
class CurrentModel:
    i_tx_ma: float = 10.0
    i_rx_ma: float = 8.0
    i_sleep_ma: float = 0.002
    i_timebase_ma: float = 0.1
    # Share of an uplink frame a node listens for before deciding nobody talks.
    sense_fraction: float = 0.1
    bitrate_kbps: float = 250.0
    phy_overhead_bytes: int = 6

    def __post_init__(self):
        for name in ("i_tx_ma", "i_rx_ma", "i_sleep_ma", "i_timebase_ma", "sense_fraction"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def airtime_ms(self, payload_bytes: int) -> float:
        return (payload_bytes + self.phy_overhead_bytes) * 8 / self.bitrate_kbps


@dataclass(frozen=True)
class DataLoad:
    """Data slots a node is active in over ``window_ms``."""

    tx_slots: float = 0.0
    rx_slots: float = 0.0
    window_ms: Optional[float] = None

    @classmethod
    def from_program(cls, program: NodeSlotProgram, schedule: Schedule) -> "DataLoad":
        tx = sum(1 for a in program.actions if a.transmits)
        rx = sum(1 for a in program.actions if a.receives)
        return cls(tx, rx, schedule.grid.duration_ms)

    @classmethod
    def fraction(cls, config: NetworkConfiguration, used: float) -> "DataLoad":
        """``used`` of all data slots in a control superframe, half sending, half receiving."""
        slots = sum(slot_layout(config, k).data_slot_count for k in config.control_superframe)
        return cls(used * slots / 2, used * slots / 2, config.control_superframe_ms)


def control_charge(config: NetworkConfiguration, connectivity_fraction: float,
                   model: CurrentModel) -> tuple[float, float]:
    """(charge in mA*ms, radio-on time in ms) of one control superframe."""
    frame = model.airtime_ms(MAX_FRAME_PAYLOAD)
    frames = config.effective_uplink_frames
    own = 1.0 / config.round_slots
    sense = model.sense_fraction * config.uplink_frame_duration_ms
    charge = on = 0.0
    for kind in config.control_superframe:
        if kind is TileKind.DOWNLINK:
            # Receive the flood, then rebroadcast it once.
            charge += (model.i_rx_ma + model.i_tx_ma) * frame
            on += 2 * frame
        else:
            listen = (connectivity_fraction * frames * frame
                      + (1 - connectivity_fraction) * sense)
            charge += own * model.i_tx_ma * frames * frame + (1 - own) * model.i_rx_ma * listen
            on += own * frames * frame + (1 - own) * listen
    return charge, on


def estimate_power(config: NetworkConfiguration,
                   load: Union[float, DataLoad, None] = 0.0,
                   connectivity_fraction: float = 1.0,
                   model: Optional[CurrentModel] = None) -> float:
    """Average node current in mA.

    ``load`` is a :class:`DataLoad` or the fraction of data slots in use.
    Receive slots are charged a full frame; the result is affine in the
    number of active data slots.
    """
    if not 0.0 <= connectivity_fraction <= 1.0:
        raise ValueError("connectivity_fraction must lie in [0, 1]")
    model = model or CurrentModel()
    if load is None:
        load = DataLoad()
    elif not isinstance(load, DataLoad):
        load = DataLoad.fraction(config, float(load))
    window = config.control_superframe_ms
    charge, on = control_charge(config, connectivity_fraction, model)
    data_frame = model.airtime_ms(config.data_frame_size_bytes)
    scale = 1.0 if load.window_ms is None else window / load.window_ms
    tx, rx = load.tx_slots * scale, load.rx_slots * scale
    charge += (tx * model.i_tx_ma + rx * model.i_rx_ma) * data_frame
    on += (tx + rx) * data_frame
    charge += max(0.0, window - on) * model.i_sleep_ma
    return charge / window + model.i_timebase_ma


def activity_current(counts: dict, elapsed_ms: float, config: NetworkConfiguration,
                     model: Optional[CurrentModel] = None) -> float:
    """Current from counted radio activity in a simulation run.

    ``counts`` holds ``flood_rx``, ``flood_tx``, ``uplink_tx``, ``uplink_rx``,
    ``uplink_sense``, ``data_tx`` and ``data_rx`` event counts.
    """
    model = model or CurrentModel()
    if elapsed_ms <= 0:
        return model.i_timebase_ma
    frame = model.airtime_ms(MAX_FRAME_PAYLOAD)
    data_frame = model.airtime_ms(config.data_frame_size_bytes)
    frames = config.effective_uplink_frames
    sense = model.sense_fraction * config.uplink_frame_duration_ms
    spans = {
        "flood_rx": (model.i_rx_ma, frame),
        "flood_tx": (model.i_tx_ma, frame),
        "uplink_tx": (model.i_tx_ma, frames * frame),
        "uplink_rx": (model.i_rx_ma, frames * frame),
        "uplink_sense": (model.i_rx_ma, sense),
        "data_tx": (model.i_tx_ma, data_frame),
        "data_rx": (model.i_rx_ma, data_frame),
    }
    charge = on = 0.0
    for key, (current, duration) in spans.items():
        n = counts.get(key, 0)
        charge += n * current * duration
        on += n * duration
    charge += max(0.0, elapsed_ms - on) * model.i_sleep_ma
    return charge / elapsed_ms + model.i_timebase_ma

