"""Services initialization."""
