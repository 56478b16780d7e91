"""Recursive-descent parser for the kernel language (grammar in docs/kernel-lang.md)."""

from __future__ import annotations

import re
from typing import NamedTuple

from .ast import (
    COMPARISON_OPS,
    INT_ONLY_OPS,
    LOGIC_OPS,
    Assign,
    BinOp,
    Declaration,
    Expr,
    For,
    If,
    Index,
    KernelProgram,
    Num,
    Stmt,
    UnaryOp,
    Var,
)
from .errors import (
    DimensionMismatchError,
    KernelSyntaxError,
    KernelTypeError,
    RedeclarationError,
    UndeclaredIdentifierError,
    UnsupportedConstructError,
)

TYPE_NAMES = {"long": "int", "int": "int", "double": "float", "float": "float"}
KEYWORDS = {"for", "if", "else"} | set(TYPE_NAMES)
UNSUPPORTED_KEYWORDS = {
    "while", "do", "return", "break", "continue", "goto", "switch", "case", "default",
    "char", "void", "short", "unsigned", "signed", "struct", "union", "const", "static",
    "sizeof", "typedef", "enum",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<float>(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_]\w*)
  | (?P<op><<=|>>=|\+\+|--|&&|\|\||<<|>>|<=|>=|==|!=|\+=|-=|\*=|/=|%=|&=|\|=|\^=|[-+*/%&|^!~<>=;,(){}\[\]])
    """,
    re.VERBOSE | re.DOTALL,
)

# binary precedence levels, loosest first
_LEVELS = (
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "%"),
)
_COMPOUND = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%", "&=": "&", "|=": "|", "^=": "^",
             "<<=": "<<", ">>=": ">>"}


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            if source.startswith("/*", pos):
                raise KernelSyntaxError("unterminated comment", line, pos - line_start + 1)
            raise KernelSyntaxError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind, text = m.lastgroup, m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind == "comment":
            newlines = text.count("\n")
            if newlines:
                line += newlines
                line_start = pos + text.rindex("\n") + 1
        elif kind != "ws":
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _is_var(node: Expr, name: str) -> bool:
    return isinstance(node, Var) and node.name == name


def _result_type(op: str, left: Expr, right: Expr) -> str:
    if op in COMPARISON_OPS or op in LOGIC_OPS:
        return "int"
    if left.type == "float" or right.type == "float":
        return "float"
    return "int"


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0
        self.decls: dict[str, Declaration] = {}

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise KernelSyntaxError(f"expected {text!r}, found {found!r}", self.tok.line, self.tok.col)
        return self.advance()

    def error(self, message: str, tok: Token | None = None) -> KernelSyntaxError:
        tok = tok or self.tok
        return KernelSyntaxError(message, tok.line, tok.col)

    def check_keyword(self, tok: Token) -> None:
        if tok.kind == "ident" and tok.text in UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstructError(f"'{tok.text}' is not part of the kernel language", tok.line, tok.col)

    # program structure

    def parse_program(self) -> KernelProgram:
        statements: list[Stmt] = []
        while self.tok.kind != "eof":
            if self.tok.kind == "ident" and self.tok.text in TYPE_NAMES:
                self.parse_declaration()
            else:
                stmt = self.parse_statement()
                if stmt is not None:
                    statements.append(stmt)
        return KernelProgram(tuple(self.decls.values()), tuple(statements))

    def parse_declaration(self) -> None:
        type_ = TYPE_NAMES[self.advance().text]
        while True:
            tok = self.tok
            if tok.kind != "ident" or tok.text in KEYWORDS:
                self.check_keyword(tok)
                raise self.error("expected identifier in declaration")
            self.advance()
            dims = []
            while self.at("["):
                self.advance()
                size = self.tok
                if size.kind != "int":
                    raise self.error("array dimensions must be positive integer literals")
                self.advance()
                if int(size.text) < 1:
                    raise self.error("array dimensions must be positive integer literals", size)
                dims.append(int(size.text))
                self.expect("]")
            if tok.text in self.decls:
                raise RedeclarationError(f"{tok.text!r} is already declared", tok.line, tok.col)
            self.decls[tok.text] = Declaration(tok.text, type_, tuple(dims), tok.line, tok.col)
            if self.at(","):
                self.advance()
                continue
            self.expect(";")
            return

    def parse_block_or_statement(self) -> tuple[Stmt, ...]:
        if self.at("{"):
            self.advance()
            body = []
            while not self.at("}"):
                if self.tok.kind == "eof":
                    raise self.error("expected '}' before end of input")
                if self.tok.kind == "ident" and self.tok.text in TYPE_NAMES:
                    raise UnsupportedConstructError(
                        "declarations must appear at top level", self.tok.line, self.tok.col
                    )
                stmt = self.parse_statement()
                if stmt is not None:
                    body.append(stmt)
            self.advance()
            return tuple(body)
        if self.tok.kind == "ident" and self.tok.text in TYPE_NAMES:
            raise UnsupportedConstructError("declarations must appear at top level", self.tok.line, self.tok.col)
        stmt = self.parse_statement()
        return () if stmt is None else (stmt,)

    def parse_statement(self) -> Stmt | None:
        tok = self.tok
        self.check_keyword(tok)
        if self.at(";"):
            self.advance()
            return None
        if self.at("{"):
            raise UnsupportedConstructError("bare blocks are not supported; use them as loop or branch bodies",
                                            tok.line, tok.col)
        if self.at("for"):
            return self.parse_for()
        if self.at("if"):
            return self.parse_if()
        if self.at("else"):
            raise self.error("'else' without matching 'if'")
        stmt = self.parse_simple_assignment()
        self.expect(";")
        return stmt

    def parse_simple_assignment(self) -> Assign:
        tok = self.tok
        if tok.kind == "op" and tok.text in ("++", "--"):
            self.advance()
            target = self.parse_lvalue()
            return self._increment(target, "+" if tok.text == "++" else "-", tok)
        target = self.parse_lvalue()
        op = self.tok
        if op.kind == "op" and op.text in ("++", "--"):
            self.advance()
            return self._increment(target, "+" if op.text == "++" else "-", op)
        if op.kind == "op" and op.text in _COMPOUND:
            self.advance()
            rhs = self.parse_expr()
            bin_op = _COMPOUND[op.text]
            self._check_operands(bin_op, target, rhs, op)
            value = BinOp(bin_op, target, rhs, _result_type(bin_op, target, rhs), op.line, op.col)
            return Assign(target, value, tok.line, tok.col)
        self.expect("=")
        return Assign(target, self.parse_expr(), tok.line, tok.col)

    def _increment(self, target, op: str, tok: Token) -> Assign:
        one = Num(1, "int", tok.line, tok.col)
        return Assign(target, BinOp(op, target, one, target.type, tok.line, tok.col), target.line, target.col)

    def parse_lvalue(self) -> Var | Index:
        tok = self.tok
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise self.error(f"expected assignment target, found {tok.text or 'end of input'!r}")
        node = self.parse_primary()
        if not isinstance(node, (Var, Index)):
            raise self.error("expected assignment target", tok)
        return node

    def parse_for(self) -> For:
        for_tok = self.expect("for")
        self.expect("(")
        var_tok = self.tok
        if var_tok.kind != "ident":
            raise self.error("for-loop must start with 'var = init'")
        var = self.parse_lvalue()
        if not isinstance(var, Var) or var.type != "int":
            raise UnsupportedConstructError("loop variable must be an integer scalar", var_tok.line, var_tok.col)
        self.expect("=")
        init = self.parse_expr()
        self.expect(";")

        cond_tok = self.tok
        cond = self.parse_expr()
        if not (isinstance(cond, BinOp) and cond.op in COMPARISON_OPS
                and isinstance(cond.left, Var) and cond.left.name == var.name):
            raise UnsupportedConstructError(
                f"loop condition must compare '{var.name}' against a bound, e.g. '{var.name} < n'",
                cond_tok.line, cond_tok.col,
            )
        self.expect(";")

        step_op, step = self.parse_step(var)
        self.expect(")")
        body = self.parse_block_or_statement()
        return For(var.name, init, cond.op, cond.right, step_op, step, body, for_tok.line, for_tok.col)

    def parse_step(self, var: Var) -> tuple[str, Expr]:
        tok = self.tok
        bad = UnsupportedConstructError(
            f"loop step must add to or subtract from '{var.name}' (e.g. {var.name}++, {var.name} += k)",
            tok.line, tok.col,
        )
        stmt = self.parse_simple_assignment()
        if not _is_var(stmt.target, var.name) or not isinstance(stmt.value, BinOp) or stmt.value.op not in "+-":
            raise bad
        value = stmt.value
        if _is_var(value.left, var.name):
            return value.op, value.right
        if value.op == "+" and _is_var(value.right, var.name):
            return "+", value.left
        raise bad

    def parse_if(self) -> If:
        if_tok = self.expect("if")
        self.expect("(")
        cond_tok = self.tok
        cond = self.parse_expr()
        if not ((isinstance(cond, BinOp) and (cond.op in COMPARISON_OPS or cond.op in LOGIC_OPS))
                or (isinstance(cond, UnaryOp) and cond.op == "!")):
            raise KernelTypeError("if-condition must be a comparison or logic expression",
                                  cond_tok.line, cond_tok.col)
        self.expect(")")
        then = self.parse_block_or_statement()
        orelse: tuple[Stmt, ...] = ()
        if self.at("else"):
            self.advance()
            orelse = self.parse_block_or_statement()
        return If(cond, then, orelse, if_tok.line, if_tok.col)

    # expressions

    def parse_expr(self, level: int = 0) -> Expr:
        if level == len(_LEVELS):
            return self.parse_unary()
        left = self.parse_expr(level + 1)
        ops = _LEVELS[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.advance()
            right = self.parse_expr(level + 1)
            self._check_operands(op.text, left, right, op)
            left = BinOp(op.text, left, right, _result_type(op.text, left, right), op.line, op.col)
        return left

    def _check_operands(self, op: str, left: Expr, right: Expr, tok: Token) -> None:
        if op in INT_ONLY_OPS and (left.type != "int" or right.type != "int"):
            raise KernelTypeError(f"operator '{op}' needs integer operands", tok.line, tok.col)

    def parse_unary(self) -> Expr:
        tok = self.tok
        if tok.kind == "op" and tok.text in ("-", "+", "!", "~"):
            self.advance()
            operand = self.parse_unary()
            if tok.text == "+":
                return operand
            if tok.text == "-" and isinstance(operand, Num):
                return Num(-operand.value, operand.type, tok.line, tok.col)
            if tok.text == "~" and operand.type != "int":
                raise KernelTypeError("operator '~' needs an integer operand", tok.line, tok.col)
            type_ = "int" if tok.text == "!" else operand.type
            return UnaryOp(tok.text, operand, type_, tok.line, tok.col)
        if tok.kind == "op" and tok.text in ("++", "--"):
            raise UnsupportedConstructError("increment inside an expression is not supported", tok.line, tok.col)
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            value = int(tok.text)
            negated = self.pos >= 2 and self.tokens[self.pos - 2].text == "-"
            if value > 2**63 - 1 and not (negated and value == 2**63):
                raise KernelSyntaxError("integer literal out of 64-bit range", tok.line, tok.col)
            return Num(value, "int", tok.line, tok.col)
        if tok.kind == "float":
            self.advance()
            return Num(float(tok.text), "float", tok.line, tok.col)
        if self.at("("):
            self.advance()
            expr = self.parse_expr()
            self.expect(")")
            return expr
        if tok.kind == "ident":
            self.check_keyword(tok)
            if tok.text in KEYWORDS:
                raise self.error(f"unexpected keyword {tok.text!r}")
            self.advance()
            if self.at("("):
                raise UnsupportedConstructError(f"function calls are not supported ('{tok.text}(...)')",
                                                tok.line, tok.col)
            decl = self.decls.get(tok.text)
            if decl is None:
                raise UndeclaredIdentifierError(f"{tok.text!r} is not declared", tok.line, tok.col)
            indices = []
            while self.at("["):
                self.advance()
                idx_tok = self.tok
                idx = self.parse_expr()
                if idx.type != "int":
                    raise KernelTypeError("array index must be an integer expression", idx_tok.line, idx_tok.col)
                indices.append(idx)
                self.expect("]")
            if len(indices) != len(decl.dims):
                raise DimensionMismatchError(
                    f"{tok.text!r} has {len(decl.dims)} dimension(s), accessed with {len(indices)} index(es)",
                    tok.line, tok.col,
                )
            if indices:
                return Index(tok.text, tuple(indices), decl.type, tok.line, tok.col)
            return Var(tok.text, decl.type, tok.line, tok.col)
        if tok.kind == "eof":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected token {tok.text!r}")


def parse(source_text: str) -> KernelProgram:
    """Parse kernel source into a :class:`KernelProgram`.

    Raises a :class:`~bops.kernel.errors.KernelParseError` subclass carrying
    the 1-based line and column of the offending token.
    """
    return Parser(source_text).parse_program()
