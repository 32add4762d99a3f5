"""
DTM Market Sim - a deterministic simulator of a traffic-data marketplace.
"""

__version__ = "0.1.0"
