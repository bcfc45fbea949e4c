"""Application configuration."""
import os

from dotenv import load_dotenv

load_dotenv()


class Config:
    """Process-level settings read from the environment."""

    # Logging
    DEBUG: bool = os.getenv("DEBUG", "false").lower() == "true"
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Compute
    THREADS: int = int(os.getenv("LAB_THREADS", str(os.cpu_count() or 1)))

    # Outputs
    OUTPUT_DIR: str = os.getenv("LAB_OUTPUT_DIR", "output")

    # Validity floors, as a fraction of the equilibrium value
    FLOOR_FRACTION: float = float(os.getenv("LAB_FLOOR_FRACTION", "0.1"))


config = Config()
