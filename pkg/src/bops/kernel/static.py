"""Static BOPs counting with loop trip-count analysis.

Scalars holding compile-time constants are tracked through straight-line
code so loop bounds like ``n = 100; for (j = 0; j < n; j++)`` resolve.
Loops whose bounds cannot be resolved, and branches whose condition cannot
be resolved and whose arms differ, make the count inexact; the body of an
unresolved loop is then counted once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..core import BopsTally
from . import values
from .ast import COMPARISON_OPS, Assign, BinOp, Expr, For, If, Index, KernelProgram, Num, UnaryOp, Var, \
    assigned_scalars
from .errors import KernelRuntimeError

# loops whose body analysis depends on the loop variable are unrolled up to this many iterations
ENUMERATION_LIMIT = 100_000
_EXACT_FLOAT_RANGE = 2**53


@dataclass(frozen=True)
class StaticCount:
    tally: BopsTally
    exact: bool


def expr_cost(node: Expr) -> BopsTally:
    """BOPs for one evaluation of ``node``."""
    if isinstance(node, (Num, Var)):
        return BopsTally()
    if isinstance(node, Index):
        cost = BopsTally(addressing=len(node.indices))
        for idx in node.indices:
            cost = cost + expr_cost(idx)
        return cost
    if isinstance(node, BinOp):
        own = BopsTally(comparing=1) if node.op in COMPARISON_OPS else BopsTally(arithmetic=1)
        return own + expr_cost(node.left) + expr_cost(node.right)
    if isinstance(node, UnaryOp):
        return BopsTally(arithmetic=1) + expr_cost(node.operand)
    raise TypeError(f"unexpected node {node!r}")


def const_value(node: Expr, env: dict):
    """Value of ``node`` if it is determined by literals and ``env``, else None."""
    try:
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            return env.get(node.name)
        if isinstance(node, BinOp):
            left = const_value(node.left, env)
            right = const_value(node.right, env)
            if left is None or right is None:
                return None
            return values.binary(node.op, left, right)
        if isinstance(node, UnaryOp):
            operand = const_value(node.operand, env)
            return None if operand is None else values.unary(node.op, operand)
    except KernelRuntimeError:
        return None
    return None


def trip_count(start: int, rel: str, bound, step_op: str, step) -> int | None:
    """Iterations of ``for (v = start; v rel bound; v = v step_op step)``.

    Returns None when the loop would not terminate or the closed form is not
    trustworthy (non-integer step, magnitudes beyond exact float range).
    """
    if isinstance(step, float) or isinstance(start, float):
        return None
    if isinstance(bound, float):
        if not math.isfinite(bound) or abs(bound) >= _EXACT_FLOAT_RANGE or abs(start) >= _EXACT_FLOAT_RANGE:
            return None
    s = step if step_op == "+" else -step
    a, b = Fraction(start), Fraction(bound)

    def holds(v) -> bool:
        return {"<": v < b, "<=": v <= b, ">": v > b, ">=": v >= b, "==": v == b, "!=": v != b}[rel]

    if not holds(a):
        return 0
    if s == 0:
        return None
    if rel == "==":
        return 1
    if rel == "!=":
        q, r = divmod(b - a, s)
        return int(q) if r == 0 and q > 0 else None
    if (rel in ("<", "<=")) != (s > 0):
        return None
    span = (b - a) / s
    if rel in ("<", ">"):
        k = math.ceil(span)
    else:
        k = math.floor(span) + 1
    final = start + k * s
    if not values.INT_MIN <= final <= values.INT_MAX:
        return None
    return k


class _Analyzer:
    def block(self, stmts, env: dict) -> tuple[BopsTally, bool]:
        total, exact = BopsTally(), True
        for stmt in stmts:
            if isinstance(stmt, Assign):
                cost = self.assign(stmt, env)
                ok = True
            elif isinstance(stmt, For):
                cost, ok = self.loop(stmt, env)
            else:
                cost, ok = self.branch(stmt, env)
            total = total + cost
            exact = exact and ok
        return total, exact

    def assign(self, stmt: Assign, env: dict) -> BopsTally:
        cost = expr_cost(stmt.value)
        target = stmt.target
        if isinstance(target, Index):
            return cost + expr_cost(target)
        value = const_value(stmt.value, env)
        if value is None:
            env.pop(target.name, None)
        else:
            try:
                env[target.name] = values.to_type(value, target.type)
            except KernelRuntimeError:
                env.pop(target.name, None)
        return cost

    def branch(self, stmt: If, env: dict) -> tuple[BopsTally, bool]:
        cost = expr_cost(stmt.cond)
        cond = const_value(stmt.cond, env)
        if cond is not None:
            taken, ok = self.block(stmt.then if cond else stmt.orelse, env)
            return cost + taken, ok
        then_env, else_env = dict(env), dict(env)
        then_cost, then_ok = self.block(stmt.then, then_env)
        else_cost, else_ok = self.block(stmt.orelse, else_env)
        for name in assigned_scalars(stmt.then) | assigned_scalars(stmt.orelse):
            if name in then_env and name in else_env and then_env[name] == else_env[name]:
                env[name] = then_env[name]
            else:
                env.pop(name, None)
        exact = then_ok and else_ok and then_cost == else_cost
        larger = then_cost if then_cost.total() >= else_cost.total() else else_cost
        return cost + larger, exact

    def loop(self, stmt: For, env: dict) -> tuple[BopsTally, bool]:
        init_cost = expr_cost(stmt.init)
        control = expr_cost(stmt.bound) + expr_cost(stmt.step) + BopsTally(arithmetic=1, comparing=1)
        start = const_value(stmt.init, env)
        if start is not None:
            try:
                start = values.to_type(start, "int")
            except KernelRuntimeError:
                start = None

        varying = assigned_scalars(stmt.body)
        body_env = {k: v for k, v in env.items() if k not in varying and k != stmt.var}
        for name in varying | {stmt.var}:
            env.pop(name, None)

        trips = None
        if start is not None and stmt.var not in varying:
            bound = const_value(stmt.bound, body_env)
            step = const_value(stmt.step, body_env)
            if bound is not None and step is not None:
                trips = trip_count(start, stmt.rel, bound, stmt.step_op, step)

        if trips is None:
            body_cost, _ = self.block(stmt.body, dict(body_env))
            return init_cost + control + body_cost, False

        body_cost, body_ok = self.block(stmt.body, dict(body_env))
        if body_ok:
            total = init_cost + (control + body_cost).scaled(trips)
        elif trips <= ENUMERATION_LIMIT:
            # body depends on the loop variable: unroll
            total, body_ok = init_cost, True
            delta = step if stmt.step_op == "+" else -step
            for k in range(trips):
                iter_env = dict(body_env)
                iter_env[stmt.var] = start + k * delta
                cost, ok = self.block(stmt.body, iter_env)
                total = total + control + cost
                body_ok = body_ok and ok
        else:
            total = init_cost + (control + body_cost).scaled(trips)
        if stmt.var not in varying:
            env[stmt.var] = start + trips * (step if stmt.step_op == "+" else -step)
        return total, body_ok


def count_static(program: KernelProgram) -> StaticCount:
    """Count BOPs without running the program.

    Declarations are free.  Each loop iteration costs one comparing BOP for
    the bound check plus one arithmetic BOP for the step (plus whatever the
    bound and step expressions themselves evaluate); the loop-exit check is
    not counted.
    """
    tally, exact = _Analyzer().block(program.statements, {})
    return StaticCount(tally, exact)
