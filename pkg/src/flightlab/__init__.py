"""Simulation and verification tools for random flights in Poissonian time.

The subpackages sample flights under power, exponential and faster clocks,
sample their limit processes exactly, and check the diffusion-approximation
chain and its first-order density expansion against independent oracles.
"""
__version__ = "0.1.0"
