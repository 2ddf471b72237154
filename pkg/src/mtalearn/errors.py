"""Exception types shared across the package."""


class FieldMismatch(TypeError):
    """Raised when scalars or matrices from different fields are combined."""


class ShapeError(ValueError):
    """Raised on incompatible matrix dimensions."""


class LinAlgError(ArithmeticError):
    """Raised when a linear system has no solution in the expected space."""


class FormatError(ValueError):
    """Malformed text input; carries the 1-based line and column."""

    def __init__(self, message, line=None, col=None, source=None):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        super().__init__(str(self))

    def __str__(self):
        where = self.source or "<input>"
        if self.line is not None:
            where += f":{self.line}"
            if self.col is not None:
                where += f":{self.col}"
        return f"{where}: {self.message}"
