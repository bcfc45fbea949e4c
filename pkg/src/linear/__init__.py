"""Linear initialization."""
