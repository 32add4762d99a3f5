"""
Traffic package - grid networks, demand, signal plans and the point-queue simulator.
"""
