"""Centralized settings management for licnet.

This module provides the settings registry used by every solver:
- Environment variable loading with typed conversion
- Validation and range checking
- .env template generation and config export
"""

import os
import json
import logging
from typing import Dict, Any, Optional, List
from dataclasses import dataclass
from enum import Enum


class SettingsCategory(Enum):
    """Settings category types."""
    CORE = "core"
    NUMERICS = "numerics"
    SOLVER = "solver"
    OUTPUT = "output"
    MONITORING = "monitoring"


@dataclass
class SettingDefinition:
    """Definition of a configuration setting."""
    key: str
    category: SettingsCategory
    description: str
    required: bool = False
    default_value: Any = None
    env_var: Optional[str] = None
    min_value: Optional[float] = None
    max_value: Optional[float] = None
    allowed_values: Optional[List[Any]] = None


ENV_PREFIX = "LICNET_"


class SettingsManager:
    """Centralized settings management system."""

    def __init__(self, overrides: Optional[Dict[str, Any]] = None):
        self.logger = logging.getLogger(__name__)
        self._settings_cache: Dict[str, Any] = {}
        self._definitions = self._load_setting_definitions()
        self._load_settings()
        for key, value in (overrides or {}).items():
            if key not in self._definitions:
                raise KeyError(f"Unknown setting: {key}")
            self._settings_cache[key] = value

    def _load_setting_definitions(self) -> Dict[str, SettingDefinition]:
        """Load setting definitions."""
        definitions = [
            # Monitoring
            SettingDefinition(
                key="log_level",
                category=SettingsCategory.MONITORING,
                description="Log level for diagnostics written to stderr",
                default_value="WARNING",
                env_var="LOG_LEVEL",
                allowed_values=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
            ),

            # Numerical tolerances
            SettingDefinition(
                key="input_tolerance",
                category=SettingsCategory.NUMERICS,
                description="Tolerance for simplex membership and orthogonality of user inputs",
                default_value=1e-9,
                env_var="INPUT_TOLERANCE",
                min_value=0.0,
                max_value=1e-3,
            ),
            SettingDefinition(
                key="internal_tolerance",
                category=SettingsCategory.NUMERICS,
                description="Tolerance for internally constructed objects",
                default_value=1e-12,
                env_var="INTERNAL_TOLERANCE",
                min_value=0.0,
                max_value=1e-6,
            ),
            SettingDefinition(
                key="grid_tolerance",
                category=SettingsCategory.NUMERICS,
                description="Slack allowed on the parameter-grid inequality chains",
                default_value=1e-8,
                env_var="GRID_TOLERANCE",
                min_value=0.0,
                max_value=1e-3,
            ),
            SettingDefinition(
                key="degeneracy_tolerance",
                category=SettingsCategory.NUMERICS,
                description="Singular value separation below which the top pair is flagged degenerate",
                default_value=1e-9,
                env_var="DEGENERACY_TOLERANCE",
                min_value=0.0,
                max_value=1e-3,
            ),

            # Solvers
            SettingDefinition(
                key="minmax_restarts",
                category=SettingsCategory.SOLVER,
                description="Random restarts of the projected ascent for common-message programs",
                default_value=32,
                env_var="MINMAX_RESTARTS",
                min_value=1,
                max_value=4096,
            ),
            SettingDefinition(
                key="minmax_seed",
                category=SettingsCategory.SOLVER,
                description="Seed of the random stream used by the restarts",
                default_value=0,
                env_var="MINMAX_SEED",
                min_value=0,
            ),
            SettingDefinition(
                key="minmax_iterations",
                category=SettingsCategory.SOLVER,
                description="Ascent iterations per restart",
                default_value=500,
                env_var="MINMAX_ITERATIONS",
                min_value=1,
                max_value=100000,
            ),
            SettingDefinition(
                key="minmax_gap_tolerance",
                category=SettingsCategory.SOLVER,
                description="Largest accepted duality gap before SolverDidNotConverge",
                default_value=1e-6,
                env_var="MINMAX_GAP_TOLERANCE",
                min_value=0.0,
                max_value=1.0,
            ),
            SettingDefinition(
                key="simplex_tolerance",
                category=SettingsCategory.SOLVER,
                description="Pivoting and feasibility tolerance of the simplex solver",
                default_value=1e-9,
                env_var="SIMPLEX_TOLERANCE",
                min_value=0.0,
                max_value=1e-3,
            ),
            SettingDefinition(
                key="simplex_max_pivots",
                category=SettingsCategory.SOLVER,
                description="Pivot cap per simplex phase",
                default_value=5000,
                env_var="SIMPLEX_MAX_PIVOTS",
                min_value=1,
            ),

            # Output
            SettingDefinition(
                key="output_digits",
                category=SettingsCategory.OUTPUT,
                description="Significant digits of floating-point CLI output",
                default_value=12,
                env_var="OUTPUT_DIGITS",
                min_value=1,
                max_value=17,
            ),
            SettingDefinition(
                key="batch_workers",
                category=SettingsCategory.CORE,
                description="Documents processed concurrently in --batch mode",
                default_value=4,
                env_var="BATCH_WORKERS",
                min_value=1,
                max_value=64,
            ),
        ]
        return {definition.key: definition for definition in definitions}

    def _load_settings(self):
        """Load settings from environment variables and defaults."""
        for key, definition in self._definitions.items():
            self._settings_cache[key] = self._get_setting_value(definition)

    def _get_setting_value(self, definition: SettingDefinition) -> Any:
        """Get setting value from environment or default."""
        if definition.env_var:
            env_value = os.getenv(ENV_PREFIX + definition.env_var)
            if env_value is not None:
                return self._convert_value(env_value, definition)

        if definition.default_value is not None:
            return definition.default_value

        if not definition.required:
            return None

        raise ValueError(f"Required setting '{definition.key}' is not configured")

    def _convert_value(self, value: str, definition: SettingDefinition) -> Any:
        """Convert string value to appropriate type."""
        if isinstance(definition.default_value, bool):
            return value.lower() in ("true", "1", "t", "yes", "on")

        if isinstance(definition.default_value, int):
            try:
                return int(value)
            except ValueError:
                self.logger.warning(f"Invalid integer value for {definition.key}: {value}")
                return definition.default_value

        if isinstance(definition.default_value, float):
            try:
                return float(value)
            except ValueError:
                self.logger.warning(f"Invalid float value for {definition.key}: {value}")
                return definition.default_value

        if definition.allowed_values:
            return value.upper()
        return value

    def get(self, key: str, default: Any = None) -> Any:
        """Get setting value."""
        return self._settings_cache.get(key, default)

    def get_by_category(self, category: SettingsCategory) -> Dict[str, Any]:
        """Get all settings for a specific category."""
        return {
            key: self.get(key)
            for key, definition in self._definitions.items()
            if definition.category == category
        }

    def validate_all(self) -> List[Dict[str, Any]]:
        """Validate all settings and return validation results."""
        return [self.validate_setting(key) for key in self._definitions]

    def validate_setting(self, key: str) -> Dict[str, Any]:
        """Validate a specific setting."""
        if key not in self._definitions:
            return {
                "key": key,
                "valid": False,
                "message": f"Unknown setting: {key}"
            }

        definition = self._definitions[key]
        value = self.get(key)
        category = definition.category.value

        if definition.required and value is None:
            return {
                "key": key,
                "valid": False,
                "message": f"Required setting '{key}' is missing",
                "category": category
            }

        if definition.allowed_values and value not in definition.allowed_values:
            return {
                "key": key,
                "valid": False,
                "message": f"Invalid value for '{key}'. Allowed: {definition.allowed_values}",
                "category": category
            }

        if definition.min_value is not None and value < definition.min_value:
            return {
                "key": key,
                "valid": False,
                "message": f"'{key}' = {value} is below the minimum {definition.min_value}",
                "category": category
            }

        if definition.max_value is not None and value > definition.max_value:
            return {
                "key": key,
                "valid": False,
                "message": f"'{key}' = {value} is above the maximum {definition.max_value}",
                "category": category
            }

        return {
            "key": key,
            "valid": True,
            "message": f"Setting '{key}' is valid",
            "category": category
        }

    def get_environment_template(self) -> str:
        """Generate environment file template."""
        template_lines = [
            "# licnet configuration",
            "# Generated environment template\n",
        ]

        by_category: Dict[str, List[SettingDefinition]] = {}
        for definition in self._definitions.values():
            by_category.setdefault(definition.category.value, []).append(definition)

        for category, definitions in by_category.items():
            template_lines.append(f"# {category.title()} Settings")
            for definition in definitions:
                template_lines.append(f"# {definition.description}")
                if definition.allowed_values:
                    template_lines.append(f"# One of: {', '.join(definition.allowed_values)}")
                template_lines.append(f"{ENV_PREFIX}{definition.env_var}={definition.default_value}")
                template_lines.append("")

        return "\n".join(template_lines)

    def export_config(self) -> Dict[str, Any]:
        """Export current configuration."""
        return {
            "settings": {key: self.get(key) for key in self._definitions},
            "metadata": {
                "total_settings": len(self._definitions),
                "categories": sorted({d.category.value for d in self._definitions.values()}),
            }
        }


# Global settings manager instance
_settings_manager: Optional[SettingsManager] = None


def get_settings_manager() -> SettingsManager:
    """Get global settings manager instance."""
    global _settings_manager
    if _settings_manager is None:
        _settings_manager = SettingsManager()
    return _settings_manager


def reset_settings_manager(manager: Optional[SettingsManager] = None) -> None:
    """Replace (or drop) the global instance so the next access reloads the environment."""
    global _settings_manager
    _settings_manager = manager


def validate_configuration() -> Dict[str, Any]:
    """Validate entire configuration and return summary."""
    results = get_settings_manager().validate_all()
    valid_count = sum(1 for r in results if r["valid"])

    return {
        "valid": valid_count == len(results),
        "summary": {
            "total_settings": len(results),
            "valid_settings": valid_count,
            "invalid_settings": len(results) - valid_count,
        },
        "results": results,
    }


def dump_configuration() -> str:
    return json.dumps(get_settings_manager().export_config(), indent=2)
