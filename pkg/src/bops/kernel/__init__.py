"""Mini kernel language: parser, static BOPs counter and counting interpreter."""

from .ast import KernelProgram
from .errors import (
    DimensionMismatchError,
    DivisionByZeroError,
    KernelError,
    KernelParseError,
    KernelRuntimeError,
    KernelSyntaxError,
    KernelTypeError,
    RedeclarationError,
    StepBudgetExceededError,
    UndeclaredIdentifierError,
    UndefinedValueError,
    UnsupportedConstructError,
)
from .interp import Execution, interpret
from .parser import parse
from .static import StaticCount, count_static

__all__ = [
    "DimensionMismatchError",
    "DivisionByZeroError",
    "Execution",
    "KernelError",
    "KernelParseError",
    "KernelProgram",
    "KernelRuntimeError",
    "KernelSyntaxError",
    "KernelTypeError",
    "RedeclarationError",
    "StaticCount",
    "StepBudgetExceededError",
    "UndeclaredIdentifierError",
    "UndefinedValueError",
    "UnsupportedConstructError",
    "count_static",
    "interpret",
    "parse",
]
