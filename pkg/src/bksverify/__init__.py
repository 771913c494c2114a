"""Heat-kernel harmonic analysis on compact Lie groups with a BKS pairing verifier."""

__version__ = "0.1.0"
