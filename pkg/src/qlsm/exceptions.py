"""
Exception Types

Errors raised by the simulator. Each class also derives from the builtin
exception a caller would naturally catch for that kind of failure.
"""

from typing import Optional


class QLSMError(Exception):
    """Base class for all simulator errors."""


class SizeError(QLSMError, ValueError):
    """Qubit count, dimension or vector length outside what is supported."""


class QubitIndexError(QLSMError, IndexError):
    """Qubit, node or lag index out of range."""


class DomainError(QLSMError, ValueError):
    """
    Value outside its mathematical domain.

    Attributes:
        index: Position of the first offending sample, when applicable
    """

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class ConfigError(QLSMError, ValueError):
    """
    Invalid experiment or algorithm configuration.

    Attributes:
        field: Dotted name of the offending configuration field
    """

    def __init__(self, message: str, field: Optional[str] = None):
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class PreconditionError(QLSMError, ValueError):
    """Operation called with inputs violating its precondition."""


class SolverError(QLSMError, ArithmeticError):
    """Linear system could not be solved."""


class IngestionError(QLSMError, ValueError):
    """
    Malformed input file.

    Attributes:
        path: File being read
        line: 1-based line number, if known
    """

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        location = ""
        if path:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(location + message)
        self.path = path
        self.line = line


class InternalError(QLSMError, RuntimeError):
    """An internal contract was violated; indicates a bug."""
