import logging
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel

from .settings_manager import get_settings_manager, SettingsCategory

# Load environment variables from .env file
load_dotenv()

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Settings(BaseModel):
    """Runtime settings backed by the centralized settings manager."""

    @property
    def log_level(self) -> str:
        return get_settings_manager().get("log_level", "WARNING")

    @property
    def input_tolerance(self) -> float:
        return get_settings_manager().get("input_tolerance", 1e-9)

    @property
    def internal_tolerance(self) -> float:
        return get_settings_manager().get("internal_tolerance", 1e-12)

    @property
    def grid_tolerance(self) -> float:
        return get_settings_manager().get("grid_tolerance", 1e-8)

    @property
    def degeneracy_tolerance(self) -> float:
        return get_settings_manager().get("degeneracy_tolerance", 1e-9)

    @property
    def minmax_restarts(self) -> int:
        return get_settings_manager().get("minmax_restarts", 32)

    @property
    def minmax_seed(self) -> int:
        return get_settings_manager().get("minmax_seed", 0)

    @property
    def minmax_iterations(self) -> int:
        return get_settings_manager().get("minmax_iterations", 500)

    @property
    def minmax_gap_tolerance(self) -> float:
        return get_settings_manager().get("minmax_gap_tolerance", 1e-6)

    @property
    def simplex_tolerance(self) -> float:
        return get_settings_manager().get("simplex_tolerance", 1e-9)

    @property
    def simplex_max_pivots(self) -> int:
        return get_settings_manager().get("simplex_max_pivots", 5000)

    @property
    def output_digits(self) -> int:
        return get_settings_manager().get("output_digits", 12)

    @property
    def batch_workers(self) -> int:
        return get_settings_manager().get("batch_workers", 4)

    def get_category_settings(self, category: SettingsCategory) -> dict:
        """Get all settings for a specific category."""
        return get_settings_manager().get_by_category(category)

    def validate_configuration(self) -> list:
        """Validate entire configuration."""
        return get_settings_manager().validate_all()


settings = Settings()


def configure_logging(level: Optional[str] = None) -> None:
    """Send diagnostics to stderr at the configured level."""
    logging.basicConfig(level=(level or settings.log_level).upper(), format=LOG_FORMAT, force=True)
