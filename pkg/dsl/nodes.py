"""Expression tree of the coefficient language. Nodes are immutable and
compare structurally; ``offset`` is excluded from equality."""

from dataclasses import dataclass, field

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs")


@dataclass(frozen=True)
class Num:
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: object
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple
    offset: int = field(default=0, compare=False)


def variables(expr):
    """Every (name, offset) referenced in ``expr``."""
    if isinstance(expr, Var):
        return [(expr.name, expr.offset)]
    if isinstance(expr, Num):
        return []
    if isinstance(expr, Neg):
        return variables(expr.operand)
    if isinstance(expr, BinOp):
        return variables(expr.left) + variables(expr.right)
    return [v for a in expr.args for v in variables(a)]


def depth(expr):
    if isinstance(expr, (Num, Var)):
        return 1
    if isinstance(expr, Neg):
        return 1 + depth(expr.operand)
    if isinstance(expr, BinOp):
        return 1 + max(depth(expr.left), depth(expr.right))
    return 1 + max(depth(a) for a in expr.args)
