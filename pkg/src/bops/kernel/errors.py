from __future__ import annotations


class KernelError(Exception):
    """Base class for kernel-language errors.  ``line``/``col`` are 1-based."""

    kind = "error"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self) -> str:
        if self.line:
            return f"{self.line}:{self.col}: {self.kind}: {self.message}"
        return f"{self.kind}: {self.message}"

    def located(self, filename: str) -> str:
        return f"{filename}:{self}"


class KernelParseError(KernelError):
    kind = "parse error"


class KernelSyntaxError(KernelParseError):
    kind = "syntax error"


class UndeclaredIdentifierError(KernelParseError):
    kind = "undeclared identifier"


class DimensionMismatchError(KernelParseError):
    kind = "dimension mismatch"


class UnsupportedConstructError(KernelParseError):
    kind = "unsupported construct"


class KernelTypeError(KernelParseError):
    kind = "type error"


class RedeclarationError(KernelParseError):
    kind = "redeclaration"


class KernelRuntimeError(KernelError):
    kind = "runtime error"


class DivisionByZeroError(KernelRuntimeError):
    kind = "division by zero"


class StepBudgetExceededError(KernelRuntimeError):
    kind = "step budget exceeded"


class UndefinedValueError(KernelRuntimeError):
    kind = "undefined value"
