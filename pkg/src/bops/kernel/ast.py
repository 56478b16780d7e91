"""Syntax tree for kernel programs.

Every expression node carries its static type, ``"int"`` (int64) or
``"float"`` (float64), fixed by the parser.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

ARITHMETIC_OPS = frozenset({"+", "-", "*", "/", "%", "&", "|", "^", "<<", ">>", "&&", "||"})
COMPARISON_OPS = frozenset({"<", "<=", ">", ">=", "==", "!="})
INT_ONLY_OPS = frozenset({"%", "&", "|", "^", "<<", ">>"})
LOGIC_OPS = frozenset({"&&", "||"})


@dataclass(frozen=True)
class Num:
    value: int | float
    type: str
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Var:
    name: str
    type: str
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Index:
    name: str
    indices: tuple["Expr", ...]
    type: str
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    type: str
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class UnaryOp:
    op: str  # "-", "!" or "~"
    operand: "Expr"
    type: str
    line: int = 0
    col: int = 0


Expr = Union[Num, Var, Index, BinOp, UnaryOp]


@dataclass(frozen=True)
class Assign:
    target: Union[Var, Index]
    value: Expr
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class For:
    """``for (var = init; var rel bound; var = var step_op step)``."""

    var: str
    init: Expr
    rel: str
    bound: Expr
    step_op: str  # "+" or "-"
    step: Expr
    body: tuple["Stmt", ...]
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] = ()
    line: int = 0
    col: int = 0


Stmt = Union[Assign, For, If]


@dataclass(frozen=True)
class Declaration:
    name: str
    type: str
    dims: tuple[int, ...] = ()
    line: int = 0
    col: int = 0

    @property
    def is_array(self) -> bool:
        return bool(self.dims)


@dataclass(frozen=True)
class KernelProgram:
    declarations: tuple[Declaration, ...]
    statements: tuple[Stmt, ...]

    def declaration(self, name: str) -> Declaration:
        for decl in self.declarations:
            if decl.name == name:
                return decl
        raise KeyError(name)


def assigned_scalars(stmts: tuple[Stmt, ...]) -> set[str]:
    """Names of scalars written anywhere in ``stmts``, loop variables included."""
    out: set[str] = set()
    for stmt in stmts:
        if isinstance(stmt, Assign):
            if isinstance(stmt.target, Var):
                out.add(stmt.target.name)
        elif isinstance(stmt, For):
            out.add(stmt.var)
            out |= assigned_scalars(stmt.body)
        else:
            out |= assigned_scalars(stmt.then) | assigned_scalars(stmt.orelse)
    return out
