"""Validation, interpretation and closure compilation of expression trees.

``evaluate`` walks the tree; ``compile_expr`` turns it into nested closures
that perform the same floating-point operations in the same order, so both
give bit-identical results.
"""

import math
import re

import numpy as np

from dsl.nodes import BinOp, Call, Neg, Num, Var, variables
from dsl.parser import parse
from utils.errors import EvalDomainError, UnboundVariableError

_INDEXED = re.compile(r"^([xe])([1-9][0-9]*)$")


def allowed_names(dim_state, mark_dim=0, params=()):
    names = {"t"}
    names.update(f"x{i}" for i in range(1, dim_state + 1))
    names.update(f"e{i}" for i in range(1, mark_dim + 1))
    names.update(params)
    return names


def validate(expr, dim_state, mark_dim=0, params=()):
    """Every variable must be t, x1..xm, e1..el or a declared parameter."""
    names = allowed_names(dim_state, mark_dim, params)
    for name, offset in variables(expr):
        if name not in names:
            raise UnboundVariableError(f"unknown variable {name!r}", offset)
    return expr


def _checked(value, offset, what):
    if not math.isfinite(value):
        raise EvalDomainError(f"{what} produced a non-finite value", offset)
    return value


def _div(a, b, offset):
    if b == 0.0:
        raise EvalDomainError("division by zero", offset)
    return _checked(a / b, offset, "division")


def _pow(a, b, offset):
    try:
        value = a**b
    except (OverflowError, ZeroDivisionError) as err:
        raise EvalDomainError(f"power {a}^{b}: {err}", offset) from err
    if isinstance(value, complex):
        raise EvalDomainError(f"power {a}^{b} is not real", offset)
    return _checked(value, offset, "power")


def _sqrt(a, offset):
    if a < 0.0:
        raise EvalDomainError(f"sqrt of negative value {a}", offset)
    return math.sqrt(a)


def _exp(a, offset):
    try:
        return math.exp(a)
    except OverflowError as err:
        raise EvalDomainError(f"exp({a}) overflows", offset) from err


def _trig(fn):
    def apply(a, offset):
        try:
            return fn(a)
        except ValueError as err:
            raise EvalDomainError(f"{fn.__name__}({a}) is undefined", offset) from err

    return apply


UNARY = {
    "sin": _trig(math.sin),
    "cos": _trig(math.cos),
    "exp": _exp,
    "sqrt": _sqrt,
    "abs": lambda a, offset: abs(a),
}


def _binary(op, a, b, offset):
    if op == "+":
        return _checked(a + b, offset, "addition")
    if op == "-":
        return _checked(a - b, offset, "subtraction")
    if op == "*":
        return _checked(a * b, offset, "multiplication")
    if op == "/":
        return _div(a, b, offset)
    return _pow(a, b, offset)


def evaluate(expr, bindings):
    """Value of ``expr`` with variables taken from ``bindings``."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        try:
            return float(bindings[expr.name])
        except KeyError:
            raise UnboundVariableError(f"unbound variable {expr.name!r}", expr.offset)
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, bindings)
    if isinstance(expr, BinOp):
        return _binary(expr.op, evaluate(expr.left, bindings), evaluate(expr.right, bindings),
                       expr.offset)
    return UNARY[expr.func](evaluate(expr.args[0], bindings), expr.offset)


def compile_expr(expr, params=None):
    """Closure ``f(t, x, e) -> float``; parameters are folded in as constants."""
    params = params or {}
    if isinstance(expr, Num):
        value = expr.value
        return lambda t, x, e: value
    if isinstance(expr, Var):
        name = expr.name
        if name == "t":
            return lambda t, x, e: float(t)
        match = _INDEXED.match(name)
        if match and name not in params:
            i = int(match.group(2)) - 1
            if match.group(1) == "x":
                return lambda t, x, e: float(x[i])
            return lambda t, x, e: float(e[i])
        if name not in params:
            raise UnboundVariableError(f"unbound variable {name!r}", expr.offset)
        value = float(params[name])
        return lambda t, x, e: value
    if isinstance(expr, Neg):
        inner = compile_expr(expr.operand, params)
        return lambda t, x, e: -inner(t, x, e)
    if isinstance(expr, BinOp):
        left, right = compile_expr(expr.left, params), compile_expr(expr.right, params)
        op, offset = expr.op, expr.offset
        if op == "+":
            return lambda t, x, e: _checked(left(t, x, e) + right(t, x, e), offset, "addition")
        if op == "-":
            return lambda t, x, e: _checked(left(t, x, e) - right(t, x, e), offset, "subtraction")
        if op == "*":
            return lambda t, x, e: _checked(left(t, x, e) * right(t, x, e), offset, "multiplication")
        if op == "/":
            return lambda t, x, e: _div(left(t, x, e), right(t, x, e), offset)
        return lambda t, x, e: _pow(left(t, x, e), right(t, x, e), offset)
    arg = compile_expr(expr.args[0], params)
    fn, offset = UNARY[expr.func], expr.offset
    return lambda t, x, e: fn(arg(t, x, e), offset)


def _as_exprs(exprs):
    return [parse(e) if isinstance(e, str) else e for e in exprs]


def compile_field(exprs, dim_state, mark_dim=0, params=None, with_mark=False):
    """Vector field from ``dim_state`` component expressions.

    Returns ``f(t, x)`` or, with ``with_mark``, ``f(t, x, e)`` (jump fields).
    """
    params = params or {}
    exprs = _as_exprs(exprs)
    if len(exprs) != dim_state:
        raise ValueError(f"field needs {dim_state} components, got {len(exprs)}")
    for expr in exprs:
        validate(expr, dim_state, mark_dim if with_mark else 0, params)
    components = [compile_expr(expr, params) for expr in exprs]

    if with_mark:
        def jump_field(t, x, e):
            return np.array([c(t, x, e) for c in components])

        return jump_field

    def field(t, x):
        return np.array([c(t, x, None) for c in components])

    return field


def compile_scalars(exprs, dim_state, params=None):
    """Vector-valued ``F(x)`` from constraint expressions (no t, no marks)."""
    params = params or {}
    exprs = _as_exprs(exprs)
    for expr in exprs:
        validate(expr, dim_state, 0, params)
        for name, offset in variables(expr):
            if name == "t":
                raise UnboundVariableError("constraints cannot depend on t", offset)
    components = [compile_expr(expr, params) for expr in exprs]

    def constraint(x):
        return np.array([c(0.0, x, None) for c in components])

    return constraint
