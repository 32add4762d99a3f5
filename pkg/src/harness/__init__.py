"""
Harness package - configuration, run orchestration, sweeps, replay and reports.
"""
