"""TDMH-MAC: a real-time TDMA mesh MAC, as a protocol library plus a simulator."""

from tdmh.graph import NetworkGraph
from tdmh.netconfig import NetworkConfiguration, TileKind, control_overhead, validate

__version__ = "0.1.0"

__all__ = ["NetworkConfiguration", "NetworkGraph", "TileKind", "control_overhead", "validate"]
