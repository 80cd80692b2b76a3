"""Deterministic simulator for zoned sensor networks with reward-driven
transmission range control (RL-TRC) and baseline power policies."""

__version__ = "0.1.0"
