"""Exception hierarchy shared by every psrolab module."""


class PsroLabError(Exception):
    """Base class for all library errors."""


class DomainError(PsroLabError, ValueError):
    """Bad shapes, invalid mixtures, out-of-range strategy indices."""


class GameFileError(PsroLabError, OSError):
    """A game file could not be read or parsed."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SolverError(PsroLabError, RuntimeError):
    """The LP engine failed; carries pivot diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SpecError(PsroLabError, ValueError):
    """A meta-solver description is invalid or cannot produce a mixture."""


class ForgeError(PsroLabError, RuntimeError):
    """An adversarial construction could not be completed."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(PsroLabError, ValueError):
    """Malformed experiment configuration."""
