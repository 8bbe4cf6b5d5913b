"""Exception types shared across the workbench."""


class AlterEvalError(Exception):
    """Base class for all workbench errors."""


class InputError(AlterEvalError, ValueError):
    """Invalid argument, precondition violation, or unusable input."""


class DegenerateInputError(InputError):
    """Input is syntactically fine but makes the requested value undefined."""


class ParseError(InputError):
    """Malformed input file; carries the offending location."""

    def __init__(self, message: str, path=None, line: int | None = None):
        where = str(path) if path is not None else "<input>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


class NotFoundError(AlterEvalError, LookupError):
    """Unknown item id, target, or category."""


class PoolExhaustionError(AlterEvalError):
    """A pooling source list ran out before its quota was filled."""


class UndefinedResultError(AlterEvalError):
    """The requested statistic is undefined for the given input."""
