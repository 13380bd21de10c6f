"""Quadruped in-between motion synthesis and adversarial imitation rewards, desk scale."""

__version__ = "0.1.0"
