"""
MESQ - Multipartite Entangled States and Squeezing

Dual-engine (truncated Fock / exact Gaussian) numerics for the n-mode
entangled states |p,chi>, their squeezing operators and generating
Hamiltonians, with a command-line verification front end.
"""

__version__ = "1.0.0"
