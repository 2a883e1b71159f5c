"""Exception hierarchy shared across the toolkit."""


class FairmonError(Exception):
    """Base class for all toolkit errors."""


class SpecSyntaxError(FairmonError):
    """Raised on malformed specification text; carries source position."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}" + (f", col {column}" if column is not None else "") + f": {message}"
        super().__init__(message)


class SpecValidationError(FairmonError):
    """Well-formed but semantically invalid specification (unknown atom, arity, mode)."""


class ModelError(FairmonError):
    """Invalid or unsuitable observation model (not stochastic, reducible, periodic)."""


class EvaluationError(FairmonError):
    """Semantic evaluation failure (zero denominator, window cap exceeded)."""


class ConfigError(FairmonError):
    """Invalid monitoring session configuration."""
