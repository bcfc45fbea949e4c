"""Nonlinear initialization."""
