"""
Agents package - profiles, data valuation and trading decisions.
"""
