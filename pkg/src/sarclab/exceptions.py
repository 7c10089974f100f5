"""Exception and warning classes shared across sarclab."""


class SarclabError(Exception):
    """Base class for all errors raised by sarclab."""


class ValidationError(SarclabError, ValueError):
    """Input violates a documented contract (shape, range, label set)."""


class DomainError(SarclabError, ValueError):
    """Input is outside the mathematical domain of an operation."""


class CorpusFormatError(SarclabError, ValueError):
    """A corpus record could not be parsed.

    ``line`` holds the 1-based line (or CSV row) number when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConvergenceError(SarclabError, ArithmeticError):
    """An iterative solver hit its iteration cap without converging."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class ModelFileError(SarclabError):
    """A model file is corrupted or has an unsupported version."""

    def __init__(self, message, section=None):
        self.section = section
        if section is not None:
            message = f"section '{section}': {message}"
        super().__init__(message)


class RankClampWarning(UserWarning):
    """Requested LSA rank exceeds the usable rank and was reduced."""


class SolverWarning(UserWarning):
    """A solver stopped on a precision limit rather than its tolerance."""


class RankError(ValidationError):
    """Requested truncation rank lies outside ``[1, k]``."""
