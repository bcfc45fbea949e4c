"""Schemas initialization."""
