"""Experiments initialization."""
