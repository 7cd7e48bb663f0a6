# Ratunif Services - Configuration & Shared State
# v1.0.0: Paths, env overrides, logger and engine constants

import os
import sys
import logging
from pathlib import Path
from typing import Optional

# ========= Version =========
VERSION = "1.0.0"

# ========= Storage Paths =========
BASE = Path(__file__).resolve().parent.parent
CONTRACTS_DIR = BASE / "Contracts"
FIXTURES_DIR = BASE / "fixtures"

# ========= Engine Constants =========
# Generated identifiers start with this character; surface identifiers cannot.
GEN_PREFIX = "_"
DEFAULT_CHECK_DEPTH = 25
DEFAULT_MAX_STEPS = 200_000
DEFAULT_BASE_TYPE = "*"

# Exit codes of the command-line driver
EXIT_UNIFIER = 0
EXIT_NO_UNIFIER = 1
EXIT_INPUT_ERROR = 2
EXIT_INTERNAL_ERROR = 3


# ========= Helper Functions =========
def safe_int(x, default: Optional[int] = None) -> Optional[int]:
    """Safe int conversion."""
    try:
        return int(x)
    except Exception:
        return default


def env_int(name: str) -> Optional[int]:
    """Read an integer override from the environment, None if unset or bad."""
    raw = os.environ.get(name, "").strip()
    if not raw:
        return None
    value = safe_int(raw)
    if value is None:
        logger.warning(f"Ignoring non-integer {name}={raw!r}")
    return value


# ========= Env Overrides =========
LOG_LEVEL = os.environ.get("RATUNIF_LOG_LEVEL", "WARNING").strip().upper() or "WARNING"


# ========= Logging =========
def _build_logger() -> logging.Logger:
    log = logging.getLogger("ratunif")
    if not log.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("[%(levelname)s] %(message)s"))
        log.addHandler(handler)
        log.propagate = False
    log.setLevel(getattr(logging, LOG_LEVEL, logging.WARNING))
    return log


logger = _build_logger()


def set_log_level(level: str) -> None:
    """Change the package log level at runtime (CLI --verbose)."""
    logger.setLevel(getattr(logging, level.upper(), logging.WARNING))
