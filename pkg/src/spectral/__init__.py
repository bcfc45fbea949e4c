"""Spectral initialization."""
