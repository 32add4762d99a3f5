"""
Metrics package - average waiting time, improvement and sweep aggregates.
"""
