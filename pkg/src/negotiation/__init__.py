"""
Negotiation package - alternating offers, utilities and final pricing.
"""
