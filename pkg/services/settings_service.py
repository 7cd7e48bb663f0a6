# Ratunif Services - Settings Management
# v1.0.0: Engine defaults from settings.json, overridable per environment

import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .config import (
    BASE,
    DEFAULT_BASE_TYPE,
    DEFAULT_CHECK_DEPTH,
    DEFAULT_MAX_STEPS,
    VERSION,
    env_int,
    logger,
)
from .contract_service import validate_against_schema

# ========= Settings File =========
SETTINGS_FILE = BASE / "settings.json"


def get_default_settings() -> Dict[str, Any]:
    """
    Get default settings.

    Returns:
        Dictionary with default settings
    """
    return {
        "check_depth": DEFAULT_CHECK_DEPTH,  # None = skip the unifier check
        "max_steps": DEFAULT_MAX_STEPS,
        "early_stop_on_contra": True,
        "schedule": "fifo",
        "check_measure": False,
        "default_base_type": DEFAULT_BASE_TYPE,  # None = unconstrained types are errors
        "resolution_policy": "earliest",
        "flatten_abstraction": "free",  # "scope" abstracts new rec-consts over every bound variable
        "version": VERSION
    }


def validate_settings(settings: Dict[str, Any]) -> Tuple[bool, Optional[str]]:
    return validate_against_schema(settings, "settings")


def apply_env_overrides(settings: Dict[str, Any]) -> Dict[str, Any]:
    settings = dict(settings)
    depth = env_int("RATUNIF_CHECK_DEPTH")
    if depth is not None:
        settings["check_depth"] = depth if depth > 0 else None
    steps = env_int("RATUNIF_MAX_STEPS")
    if steps is not None and steps > 0:
        settings["max_steps"] = steps
    return settings


def load_settings(path: Optional[Path] = None) -> Dict[str, Any]:
    """
    Load user settings from disk, on top of the defaults.
    Falls back to defaults if the file is missing or invalid.
    """
    path = path or SETTINGS_FILE
    settings = get_default_settings()
    if path.exists():
        try:
            with open(path, "r", encoding="utf-8") as f:
                loaded = json.load(f)
            ok, err = validate_settings(loaded)
            if ok:
                settings.update(loaded)
                logger.debug(f"Loaded settings from {path}")
            else:
                logger.warning(f"{err}, using defaults")
        except Exception as e:
            logger.warning(f"Failed to load settings: {e}, using defaults")
    return apply_env_overrides(settings)


def save_settings(settings: Dict[str, Any], path: Optional[Path] = None) -> bool:
    """
    Save user settings to disk.

    Returns:
        True if successful, False otherwise
    """
    path = path or SETTINGS_FILE
    ok, err = validate_settings(settings)
    if not ok:
        logger.error(err)
        return False
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(settings, f, indent=2, ensure_ascii=False)
        logger.info(f"Saved settings to {path}")
        return True
    except Exception as e:
        logger.error(f"Failed to save settings: {e}")
        return False


def update_setting(key: str, value: Any, path: Optional[Path] = None) -> bool:
    settings = load_settings(path)
    settings[key] = value
    return save_settings(settings, path)
