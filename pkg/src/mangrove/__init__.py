"""Mangrove forcing conditions over a symbolic ordinal kernel."""
