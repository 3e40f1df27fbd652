"""
MESQ - command handlers for verify, sweep/evolve and state.
"""
