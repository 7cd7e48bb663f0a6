# Ratunif Services - Contract Validation
# v1.0.0: JSON schemas under Contracts/ guard settings, run configs and results

import json
from typing import Any, Dict, List, Optional, Tuple

from jsonschema import Draft7Validator
from jsonschema.exceptions import best_match

from .config import CONTRACTS_DIR, logger
from .errors import InputError

_VALIDATORS: Dict[str, Draft7Validator] = {}


def _load_validators() -> None:
    """Compile every Contracts/*.schema.json once."""
    if _VALIDATORS:
        return
    for schema_file in sorted(CONTRACTS_DIR.glob("*.schema.json")):
        name = schema_file.name[: -len(".schema.json")]
        try:
            schema = json.loads(schema_file.read_text(encoding="utf-8"))
            Draft7Validator.check_schema(schema)
        except Exception as e:
            logger.warning(f"Skipping contract {schema_file.name}: {e}")
            continue
        _VALIDATORS[name] = Draft7Validator(schema)


def schema_names() -> List[str]:
    _load_validators()
    return sorted(_VALIDATORS)


def validate_against_schema(
    data: Any,
    schema_name: str,
    raise_on_error: bool = False
) -> Tuple[bool, Optional[str]]:
    """
    Check data against a named contract.
    Returns (is_valid, error_message); unknown contract names always pass.
    """
    _load_validators()
    validator = _VALIDATORS.get(schema_name)
    if validator is None:
        logger.debug(f"No contract named {schema_name}, skipping validation")
        return (True, None)
    error = best_match(validator.iter_errors(data))
    if error is None:
        return (True, None)
    where = "/".join(str(p) for p in error.absolute_path) or "<root>"
    message = f"Contract {schema_name} violated at {where}: {error.message}"
    if raise_on_error:
        raise InputError(message)
    return (False, message)
