"""Exception types shared across the package."""


class FileFormatError(ValueError):
    """A file failed validation on read (bad magic, truncation, malformed row)."""


class NumericalDivergenceError(RuntimeError):
    """An iterative routine produced a non-finite value; carries a diagnostic."""

    def __init__(self, message: str, diagnostic: dict | None = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}
