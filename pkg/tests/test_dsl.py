import math
import re

import numpy as np
import pytest

from dsl.evaluate import compile_expr, compile_field, compile_scalars, evaluate, validate
from dsl.lexer import tokenize
from dsl.nodes import BinOp, Call, Neg, Num, Var, depth
from dsl.parser import parse
from dsl.printer import to_source
from sde.examples import example_coefficients
from utils.errors import (
    ArityError,
    DSLError,
    EvalDomainError,
    LexError,
    ParseError,
    UnboundVariableError,
)

# ---------------------------------------------------------------------------
# reference recursive-descent parser, one function per precedence level
# ---------------------------------------------------------------------------
_TOKEN_RE = re.compile(r"\d+\.?\d*(?:[eE][+-]?\d+)?|[A-Za-z_]\w*|[-+*/^(),]")


class _Reference:
    def __init__(self, source):
        self.tokens = _TOKEN_RE.findall(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise SyntaxError(f"expected {expected}, got {tok}")
        self.pos += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek() == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        tok = self.take()
        if tok == "(":
            node = self.expr()
            self.take(")")
            return node
        if tok[0].isdigit():
            return Num(float(tok))
        if self.peek() == "(":
            self.take("(")
            arg = self.expr()
            self.take(")")
            return Call(tok, (arg,))
        return Var(tok)


def reference_parse(source):
    p = _Reference(source)
    node = p.expr()
    assert p.peek() is None
    return node


_NUMBERS = (0.5, 1.0, 2.0, 3.25, 10.0, 0.001)
_NAMES = ("x1", "x2", "x3", "t", "beta")
_FUNCS = ("sin", "cos", "exp", "sqrt", "abs")


def random_tree(rng, max_depth):
    if max_depth <= 1 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return Num(float(rng.choice(_NUMBERS)))
        return Var(str(rng.choice(_NAMES)))
    kind = rng.integers(0, 4)
    if kind == 0:
        return Neg(random_tree(rng, max_depth - 1))
    if kind == 1:
        return Call(str(rng.choice(_FUNCS)), (random_tree(rng, max_depth - 1),))
    op = str(rng.choice(list("+-*/^")))
    return BinOp(op, random_tree(rng, max_depth - 1), random_tree(rng, max_depth - 1))


def render(expr, rng, keep=1.0):
    """Fully parenthesized text with each optional pair kept with probability ``keep``."""

    def wrap(text):
        return f"({text})" if rng.random() < keep else text

    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        return wrap("-" + render(expr.operand, rng, keep))
    if isinstance(expr, Call):
        return f"{expr.func}({render(expr.args[0], rng, keep)})"
    space = " " if rng.random() < 0.5 else ""
    return wrap(
        render(expr.left, rng, keep) + space + expr.op + space + render(expr.right, rng, keep)
    )


def _outcome(fn, *args):
    try:
        return fn(*args)
    except DSLError as err:
        return type(err)


def test_examples_from_the_language_reference():
    expr = parse("-x3")
    assert expr == Neg(Var("x3"))
    assert evaluate(expr, {"x3": 2.0}) == -2.0
    assert evaluate(parse("sin(beta)*cos(t)"), {"beta": math.pi / 2, "t": 0.0}) == 1.0
    expr = parse("2*x1 + x2^2^2")
    assert expr.right == BinOp("^", Var("x2"), BinOp("^", Num(2.0), Num(2.0)))
    assert evaluate(expr, {"x1": 1.0, "x2": 2.0}) == 18.0
    assert evaluate(parse("3.5"), {}) == 3.5


def test_precedence_and_associativity():
    assert parse("-x1^2") == Neg(BinOp("^", Var("x1"), Num(2.0)))
    assert parse("-x1*x2") == BinOp("*", Neg(Var("x1")), Var("x2"))
    assert parse("x1-x2-x3") == BinOp("-", BinOp("-", Var("x1"), Var("x2")), Var("x3"))
    assert parse("x1/x2/x3") == BinOp("/", BinOp("/", Var("x1"), Var("x2")), Var("x3"))
    assert parse("x1^-x2") == BinOp("^", Var("x1"), Neg(Var("x2")))
    assert parse("1 + 2 * 3") == BinOp("+", Num(1.0), BinOp("*", Num(2.0), Num(3.0)))


def test_errors_carry_offsets():
    with pytest.raises(LexError) as err:
        parse("x1 $ 2")
    assert err.value.offset == 3
    with pytest.raises(ParseError) as err:
        parse("(x1 + 2")
    assert err.value.offset == 7
    with pytest.raises(ParseError) as err:
        parse("x1 x2")
    assert err.value.offset == 3
    with pytest.raises(ParseError):
        parse("foo(x1)")
    with pytest.raises(ParseError):
        parse("")
    with pytest.raises(LexError):
        parse("x1 · 2")


def test_literals_must_be_finite():
    with pytest.raises(ParseError) as err:
        parse("1e400")
    assert err.value.offset == 0
    with pytest.raises(ParseError) as err:
        parse("x1 + 2.5e999 * x2")
    assert err.value.offset == 5
    big = parse("1.5e308")
    assert big == Num(1.5e308)
    assert parse(to_source(big)) == big


def test_arity_errors():
    with pytest.raises(ArityError):
        parse("sin(x1, x2)")
    with pytest.raises(ArityError):
        parse("sqrt()")
    with pytest.raises(ArityError):
        parse("cos + 1")


def test_tokenizer_offsets():
    tokens = tokenize("2.5e-3*x10")
    assert [(t.kind, t.text, t.offset) for t in tokens[:3]] == [
        ("number", "2.5e-3", 0),
        ("op", "*", 6),
        ("ident", "x10", 7),
    ]


def test_domain_errors():
    with pytest.raises(EvalDomainError):
        evaluate(parse("1/x1"), {"x1": 0.0})
    with pytest.raises(EvalDomainError):
        evaluate(parse("sqrt(x1)"), {"x1": -1.0})
    with pytest.raises(EvalDomainError):
        evaluate(parse("exp(x1)"), {"x1": 1000.0})
    with pytest.raises(EvalDomainError):
        compile_expr(parse("1/x1"))(0.0, np.zeros(1), None)


def test_validation_rejects_unknown_variables():
    with pytest.raises(UnboundVariableError):
        validate(parse("x4 + 1"), 3)
    with pytest.raises(UnboundVariableError):
        validate(parse("e1"), 3, mark_dim=0)
    with pytest.raises(UnboundVariableError):
        validate(parse("lam*x1"), 3)
    validate(parse("lam*x1 + e1 + t"), 3, mark_dim=1, params={"lam": 1.0})
    with pytest.raises(UnboundVariableError):
        compile_scalars(["x1 + t"], 3)


def test_pratt_parser_matches_reference_parser():
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        tree = random_tree(rng, int(rng.integers(1, 7)))
        assert depth(tree) <= 6
        full = render(tree, rng, keep=1.0)
        assert parse(full) == tree == reference_parse(full)
        partial = render(tree, rng, keep=0.3)
        assert parse(partial) == reference_parse(partial), partial


def test_printer_fixpoint():
    rng = np.random.default_rng(7)
    for _ in range(2000):
        tree = random_tree(rng, 6)
        text = to_source(tree)
        assert parse(text) == tree
        assert to_source(parse(text)) == text


def test_compiled_closures_match_interpreter_bitwise():
    rng = np.random.default_rng(99)
    params = {"beta": 0.7}
    for _ in range(2000):
        tree = random_tree(rng, 5)
        x = rng.normal(size=3)
        t = float(rng.random())
        bindings = {"x1": x[0], "x2": x[1], "x3": x[2], "t": t, "beta": 0.7}
        interpreted = _outcome(evaluate, tree, bindings)
        compiled = _outcome(compile_expr(tree, params), t, x, None)
        if isinstance(interpreted, float):
            assert isinstance(compiled, float)
            assert interpreted == compiled or (math.isnan(interpreted) and math.isnan(compiled))
        else:
            assert compiled is interpreted


def test_compile_field_matches_component_eval():
    exprs = ["x1*x2 - t", "sin(x3)", "-x1^2"]
    f = compile_field(exprs, 3)
    x = np.array([0.3, -1.2, 2.0])
    expected = [evaluate(parse(e), {"x1": x[0], "x2": x[1], "x3": x[2], "t": 0.5}) for e in exprs]
    np.testing.assert_array_equal(f(0.5, x), expected)
    with pytest.raises(ValueError):
        compile_field(exprs, 2)


def test_builtin_examples_in_the_language_are_bitwise_equal():
    rng = np.random.default_rng(3)
    lam = 1.7
    drift33 = compile_field(["0", "-0.5*x2", "-0.5*x3"], 3)
    drift35 = compile_field(["0", "-(0.5 + 2*lam)*x2", "-(0.5 + 2*lam)*x3"], 3,
                            params={"lam": lam})
    sigma = compile_field(["0", "-x3", "x2"], 3)
    jump = compile_field(["0", "-2*x2", "-2*x3"], 3, mark_dim=1, with_mark=True)
    ex33, _ = example_coefficients("ex33")
    ex35, _ = example_coefficients("ex35", lam)
    for x in rng.normal(size=(1000, 3)):
        t = float(rng.random())
        assert np.array_equal(drift33(t, x), ex33.b(t, x))
        assert np.array_equal(drift35(t, x), ex35.b(t, x))
        assert np.array_equal(sigma(t, x), ex33.sigma_column(0, t, x))
        assert np.array_equal(jump(t, x, np.array([1.0])), ex35.gamma(t, x, np.array([1.0])))
