"""Unit tests for process settings."""
import pytest

from src.core.config import Config, config


@pytest.mark.unit
def test_settings_surface():
    """Test only the lab's own settings are exposed."""
    names = {name for name in vars(Config) if name.isupper()}

    assert names == {"DEBUG", "LOG_LEVEL", "THREADS", "OUTPUT_DIR", "FLOOR_FRACTION"}


@pytest.mark.unit
def test_settings_types():
    """Test every setting is parsed to its declared type."""
    assert isinstance(config.DEBUG, bool)
    assert config.THREADS >= 1
    assert 0.0 < config.FLOOR_FRACTION < 1.0
