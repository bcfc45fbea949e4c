"""CLI initialization."""
