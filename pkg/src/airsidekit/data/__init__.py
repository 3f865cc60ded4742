"""Bundled reference data (fleet, airports, design-day scenario)."""
