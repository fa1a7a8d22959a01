# mm/core/errors.py
"""Exception hierarchy. Every error knows the CLI exit code it maps to."""
from pathlib import Path
from typing import Optional, Sequence, TYPE_CHECKING

from .constants import (
    EXIT_FAILURE, EXIT_PARSE_ERROR, EXIT_VALIDATION_ERROR, EXIT_IO_ERROR, EXIT_USAGE_ERROR,
)

if TYPE_CHECKING:
    from .facts_model import Violation


class ModMetricsError(Exception):
    exit_code: int = EXIT_FAILURE


class FactsParseError(ModMetricsError):
    """The facts file is not JSON, or not shaped like a facts document."""
    exit_code = EXIT_PARSE_ERROR

    def __init__(self, message: str, path: Optional[Path] = None,
                 line: Optional[int] = None, column: Optional[int] = None, offset: Optional[int] = None):
        self.path = path
        self.line = line
        self.column = column
        self.offset = offset
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}:{column or 0}"
            elif offset is not None:
                where += f"@{offset}"
            where += ": "
        super().__init__(f"{where}{message}")


class FactsValidationError(ModMetricsError):
    """Raised with every violation found, never just the first."""
    exit_code = EXIT_VALIDATION_ERROR

    def __init__(self, violations: Sequence["Violation"], path: Optional[Path] = None):
        self.violations = tuple(violations)
        self.path = path
        head = "; ".join(str(v) for v in self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        source = f"{path}: " if path is not None else ""
        super().__init__(f"{source}{len(self.violations)} validation error(s): {head}{more}")


class ModelIntegrityError(ModMetricsError):
    exit_code = EXIT_VALIDATION_ERROR


class FactsIOError(ModMetricsError):
    exit_code = EXIT_IO_ERROR


class UsageError(ModMetricsError):
    exit_code = EXIT_USAGE_ERROR


class ContractViolation(ModMetricsError, ValueError):
    """A caller broke an operation's precondition."""


class OwnershipError(ContractViolation):
    """what-if move asked for a method its origin class does not own."""
