"""Core initialization."""
