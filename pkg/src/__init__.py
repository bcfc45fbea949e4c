"""Source initialization."""
