"""Counting interpreter: runs a kernel program and tallies every evaluated BOP.

Counting rules match the static counter: each arithmetic, bitwise or logic
operator is 1 arithmetic BOP, each comparison 1 comparing BOP, and each
access to an N-dimensional array element N addressing BOPs.  Scalar reads,
writes and literals are free.  A loop iteration adds its bound check and
its step; the failing exit check is not counted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from ..core import BopsTally
from . import values
from .ast import Assign, BinOp, For, Index, KernelProgram, Num, UnaryOp, Var
from .errors import KernelRuntimeError, StepBudgetExceededError, UndefinedValueError

DEFAULT_MAX_OPS = 10**9


class _Array:
    __slots__ = ("dims", "type", "cells")

    def __init__(self, dims: tuple[int, ...], type_: str):
        self.dims = dims
        self.type = type_
        size = 1
        for d in dims:
            size *= d
        self.cells = [0.0 if type_ == "float" else 0] * size

    def offset(self, idx: list[int], node) -> int:
        off = 0
        for i, (k, d) in enumerate(zip(idx, self.dims)):
            if not 0 <= k < d:
                raise KernelRuntimeError(
                    f"index {k} out of range for dimension {i} of {node.name!r} (size {d})", node.line, node.col
                )
            off = off * d + k
        return off

    def tolist(self):
        def build(level: int, start: int):
            if level == len(self.dims) - 1:
                return self.cells[start:start + self.dims[level]]
            stride = 1
            for d in self.dims[level + 1:]:
                stride *= d
            return [build(level + 1, start + i * stride) for i in range(self.dims[level])]

        return build(0, 0)

    def load(self, data, name: str) -> None:
        flat: list = []

        def walk(level: int, node) -> None:
            if level == len(self.dims):
                flat.append(values.to_type(node, self.type))
                return
            if not isinstance(node, (list, tuple)) or len(node) != self.dims[level]:
                raise KernelRuntimeError(f"input for {name!r} does not match shape {self.dims}")
            for item in node:
                walk(level + 1, item)

        walk(0, data)
        self.cells = flat


@dataclass(frozen=True)
class Execution:
    tally: BopsTally
    state: dict[str, Any]


class Interpreter:
    def __init__(self, program: KernelProgram, inputs: Mapping[str, Any] | None = None,
                 max_ops: int = DEFAULT_MAX_OPS):
        self.program = program
        self.max_ops = max_ops
        self.arith = self.cmp = self.addr = 0
        self.scalars: dict[str, Any] = {}
        self.arrays: dict[str, _Array] = {}
        self.types: dict[str, str] = {}
        for decl in program.declarations:
            self.types[decl.name] = decl.type
            if decl.is_array:
                self.arrays[decl.name] = _Array(decl.dims, decl.type)
        for name, value in (inputs or {}).items():
            if name not in self.types:
                raise KernelRuntimeError(f"input {name!r} is not declared in the program")
            if name in self.arrays:
                self.arrays[name].load(value, name)
            else:
                self.scalars[name] = values.to_type(value, self.types[name])

    def run(self) -> Execution:
        self.block(self.program.statements)
        state: dict[str, Any] = dict(self.scalars)
        for name, arr in self.arrays.items():
            state[name] = arr.tolist()
        return Execution(BopsTally(self.arith, self.cmp, self.addr), state)

    def check_budget(self, node) -> None:
        if self.arith + self.cmp + self.addr > self.max_ops:
            raise StepBudgetExceededError(
                f"more than {self.max_ops} operations evaluated; program may not terminate", node.line, node.col
            )

    # statements

    def block(self, stmts) -> None:
        for stmt in stmts:
            if isinstance(stmt, Assign):
                self.assign(stmt)
            elif isinstance(stmt, For):
                self.loop(stmt)
            else:
                cond = self.eval(stmt.cond)
                self.block(stmt.then if cond else stmt.orelse)
            self.check_budget(stmt)

    def assign(self, stmt: Assign) -> None:
        value = self.eval(stmt.value)
        target = stmt.target
        if isinstance(target, Var):
            self.scalars[target.name] = values.to_type(value, target.type)
        else:
            arr = self.arrays[target.name]
            off = arr.offset([self.eval(i) for i in target.indices], target)
            self.addr += len(target.indices)
            arr.cells[off] = values.to_type(value, arr.type)

    def loop(self, stmt: For) -> None:
        var = stmt.var
        self.scalars[var] = values.to_type(self.eval(stmt.init), "int")
        while True:
            saved = (self.arith, self.cmp, self.addr)
            bound = self.eval(stmt.bound)
            if not values.binary(stmt.rel, self.scalars[var], bound):
                self.arith, self.cmp, self.addr = saved
                return
            self.cmp += 1
            self.block(stmt.body)
            step = self.eval(stmt.step)
            self.arith += 1
            self.scalars[var] = values.to_type(values.binary(stmt.step_op, self.scalars[var], step), "int")
            self.check_budget(stmt)

    # expressions

    def eval(self, node):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            try:
                return self.scalars[node.name]
            except KeyError:
                raise UndefinedValueError(
                    f"{node.name!r} is read before assignment and no input binds it", node.line, node.col
                ) from None
        if isinstance(node, BinOp):
            left = self.eval(node.left)
            right = self.eval(node.right)
            if node.op in ("<", "<=", ">", ">=", "==", "!="):
                self.cmp += 1
            else:
                self.arith += 1
            try:
                return values.binary(node.op, left, right)
            except KernelRuntimeError as exc:
                exc.line, exc.col = node.line, node.col
                raise
        if isinstance(node, Index):
            arr = self.arrays[node.name]
            off = arr.offset([self.eval(i) for i in node.indices], node)
            self.addr += len(node.indices)
            return arr.cells[off]
        if isinstance(node, UnaryOp):
            operand = self.eval(node.operand)
            self.arith += 1
            return values.unary(node.op, operand)
        raise TypeError(f"unexpected node {node!r}")


def interpret(program: KernelProgram, inputs: Mapping[str, Any] | None = None,
              max_ops: int = DEFAULT_MAX_OPS) -> Execution:
    """Execute ``program`` and return its dynamic BOPs tally and final state.

    ``inputs`` binds scalars (and optionally whole arrays, as nested lists)
    before execution.  Array cells not bound start at zero.  ``max_ops``
    caps the number of counted operations to stop runaway loops.
    """
    return Interpreter(program, inputs, max_ops).run()
