"""Quasiparticle and microwave-loss analysis for superconducting resonators
with air bridges."""

__version__ = "0.1.0"
