"""64-bit value semantics shared by the interpreter and constant folding.

Integers are two's-complement int64 (wrapping); division truncates toward
zero and ``%`` takes the sign of the dividend, as in C.  Mixed int/float
operations promote to float64.  ``&&`` and ``||`` evaluate both operands.
"""

from __future__ import annotations

import math

from .errors import DivisionByZeroError, KernelRuntimeError

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1


def wrap(x: int) -> int:
    return ((x - INT_MIN) & 0xFFFF_FFFF_FFFF_FFFF) + INT_MIN


def to_type(value, type_: str):
    """Convert ``value`` for storage in a variable of ``type_``."""
    if type_ == "float":
        return float(value)
    if isinstance(value, float):
        if not math.isfinite(value) or not INT_MIN <= math.trunc(value) <= INT_MAX:
            raise KernelRuntimeError(f"float {value!r} does not fit an int64")
        return math.trunc(value)
    return value


def binary(op: str, a, b):
    if op in ("<", "<=", ">", ">=", "==", "!="):
        if isinstance(a, float) or isinstance(b, float):
            a, b = float(a), float(b)
        return int(
            a < b if op == "<" else
            a <= b if op == "<=" else
            a > b if op == ">" else
            a >= b if op == ">=" else
            a == b if op == "==" else
            a != b
        )
    if op == "&&":
        return int(bool(a) and bool(b))
    if op == "||":
        return int(bool(a) or bool(b))
    if isinstance(a, float) or isinstance(b, float):
        a, b = float(a), float(b)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0.0:
                raise DivisionByZeroError("float division by zero")
            return a / b
        raise KernelRuntimeError(f"operator {op!r} is not defined on floats")
    if op == "+":
        return wrap(a + b)
    if op == "-":
        return wrap(a - b)
    if op == "*":
        return wrap(a * b)
    if op in ("/", "%"):
        if b == 0:
            raise DivisionByZeroError("integer division by zero")
        q = abs(a) // abs(b)
        if (a < 0) != (b < 0):
            q = -q
        return wrap(q) if op == "/" else wrap(a - b * q)
    if op == "&":
        return a & b
    if op == "|":
        return a | b
    if op == "^":
        return a ^ b
    if op in ("<<", ">>"):
        if not 0 <= b <= 63:
            raise KernelRuntimeError(f"shift count {b} outside [0, 63]")
        return wrap(a << b) if op == "<<" else a >> b
    raise KernelRuntimeError(f"unknown operator {op!r}")


def unary(op: str, a):
    if op == "-":
        return -a if isinstance(a, float) else wrap(-a)
    if op == "!":
        return int(not a)
    if op == "~":
        return ~a
    raise KernelRuntimeError(f"unknown operator {op!r}")
