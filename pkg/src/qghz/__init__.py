"""Qudit GHZ generation toolkit.

Closed-form fidelity and rate calculators, a time-resolved detection
engine, Monte-Carlo protocol trajectories, a brute-force Fock-space
oracle, and a secure-key-rate calculator for the multi-emitter
qudit-GHZ generation protocol, with a CSV-emitting CLI.
"""

__version__ = "0.1.0"
