"""Packet-level simulator for AGEM and GPSR geographic routing in wireless
multimedia sensor networks."""

__version__ = "0.1.0"
