"""Pratt parser for the coefficient language.

Binding powers, loosest first: ``+ -`` < ``* /`` < unary ``-`` < ``^``.
``^`` is right-associative, everything else left-associative, so
``-x^2`` is ``-(x^2)`` and ``2^3^2`` is ``2^(3^2)``.
"""

import math

from dsl import lexer
from dsl.nodes import FUNCTIONS, BinOp, Call, Neg, Num, Var
from utils.errors import ArityError, ParseError

# op -> (left binding power, right binding power)
INFIX = {
    "+": (10, 11),
    "-": (10, 11),
    "*": (20, 21),
    "/": (20, 21),
    "^": (40, 39),
}
PREFIX_MINUS = 30
ARITY = {name: 1 for name in FUNCTIONS}


class _Stream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        if tok.kind != lexer.EOF_KIND:
            self.pos += 1
        return tok

    def expect(self, kind, what):
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {what}, found {_describe(tok)}", tok.offset)
        return tok


def _describe(tok):
    return "end of input" if tok.kind == lexer.EOF_KIND else repr(tok.text)


def _prefix(stream):
    tok = stream.next()
    if tok.kind == lexer.NUMBER:
        value = float(tok.text)
        if not math.isfinite(value):
            raise ParseError(f"number {tok.text!r} overflows", tok.offset)
        return Num(value, tok.offset)
    if tok.kind == lexer.OP and tok.text == "-":
        return Neg(_expression(stream, PREFIX_MINUS), tok.offset)
    if tok.kind == lexer.LPAREN:
        inner = _expression(stream, 0)
        stream.expect(lexer.RPAREN, "')'")
        return inner
    if tok.kind == lexer.IDENT:
        if stream.peek().kind == lexer.LPAREN:
            return _call(stream, tok)
        if tok.text in FUNCTIONS:
            raise ArityError(f"function {tok.text!r} used without arguments", tok.offset)
        return Var(tok.text, tok.offset)
    raise ParseError(f"unexpected {_describe(tok)}", tok.offset)


def _call(stream, name_tok):
    if name_tok.text not in FUNCTIONS:
        raise ParseError(f"unknown function {name_tok.text!r}", name_tok.offset)
    stream.expect(lexer.LPAREN, "'('")
    args = []
    if stream.peek().kind != lexer.RPAREN:
        args.append(_expression(stream, 0))
        while stream.peek().kind == lexer.COMMA:
            stream.next()
            args.append(_expression(stream, 0))
    stream.expect(lexer.RPAREN, "')'")
    expected = ARITY[name_tok.text]
    if len(args) != expected:
        raise ArityError(
            f"{name_tok.text} takes {expected} argument(s), got {len(args)}", name_tok.offset
        )
    return Call(name_tok.text, tuple(args), name_tok.offset)


def _expression(stream, min_bp):
    lhs = _prefix(stream)
    while True:
        tok = stream.peek()
        if tok.kind != lexer.OP:
            return lhs
        left_bp, right_bp = INFIX[tok.text]
        if left_bp < min_bp:
            return lhs
        stream.next()
        rhs = _expression(stream, right_bp)
        lhs = BinOp(tok.text, lhs, rhs, tok.offset)


def parse(source):
    """Parse one expression; raises LexError, ParseError or ArityError."""
    stream = _Stream(lexer.tokenize(source))
    expr = _expression(stream, 0)
    tok = stream.peek()
    if tok.kind != lexer.EOF_KIND:
        raise ParseError(f"unexpected {_describe(tok)} after expression", tok.offset)
    return expr
