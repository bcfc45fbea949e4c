"""Model initialization."""
