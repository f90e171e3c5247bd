"""Greedy, relaxed-optimal and brute-force adaptive compression policies for
linear Gaussian signal-plus-noise models."""

__version__ = "0.1.0"
