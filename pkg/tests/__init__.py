"""Tests for DTM Market Sim."""
