"""
Market package - accounts, fee-bearing proposals, settlement and trade history.
"""
