# Ratunif Services - Error Types
# v1.0.0: One hierarchy, each class knows its CLI exit code

from typing import Optional

from .config import EXIT_INPUT_ERROR, EXIT_INTERNAL_ERROR, EXIT_NO_UNIFIER


class RatunifError(Exception):
    """Base class for every error raised by the package."""
    exit_code = EXIT_INTERNAL_ERROR


# ========= Input Errors =========
class InputError(RatunifError):
    exit_code = EXIT_INPUT_ERROR


class ParseError(InputError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class NameResolutionError(InputError):
    pass


class TypeInferenceError(InputError):
    pass


class PatternError(InputError):
    pass


# ========= Internal Errors =========
class InternalError(RatunifError):
    exit_code = EXIT_INTERNAL_ERROR


class SubstitutionError(InternalError):
    """Width or arity mismatch while renaming or substituting."""


class SaturationBudgetExceeded(InternalError):
    pass


class MissingRepresentativeError(InternalError):
    pass


# ========= Unifier Errors =========
class MediationError(RatunifError):
    """The given substitution is not an instance of the most general unifier."""
    exit_code = EXIT_NO_UNIFIER
