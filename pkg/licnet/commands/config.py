"""config: inspect the runtime settings (template, validate, export)."""

import json
import logging
from typing import Tuple

from licnet.core.settings_manager import dump_configuration, get_settings_manager, validate_configuration

logger = logging.getLogger(__name__)

ACTIONS = ("template", "validate", "export")


def run_config(action: str) -> Tuple[str, int]:
    """Text to print and the exit code."""
    manager = get_settings_manager()
    if action == "template":
        return manager.get_environment_template(), 0
    if action == "validate":
        result = validate_configuration()
        if not result["valid"]:
            logger.warning(f"Configuration has invalid settings: {result['summary']}")
        return json.dumps(result, indent=2, sort_keys=True, default=str), 0 if result["valid"] else 1
    if action == "export":
        return dump_configuration(), 0
    raise ValueError(f"Unknown config action: {action}")
