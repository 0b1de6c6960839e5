import re
from dataclasses import dataclass

from utils.errors import LexError

NUMBER = "number"
IDENT = "ident"
OP = "op"
LPAREN = "("
RPAREN = ")"
COMMA = ","
EOF_KIND = "eof"

OPERATORS = "+-*/^"

_NUMBER_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def tokenize(source):
    """Split ``source`` into tokens; offsets are byte offsets (input is ASCII)."""
    if not source.isascii():
        bad = next(i for i, c in enumerate(source) if not c.isascii())
        raise LexError(f"non-ASCII character {source[bad]!r}", len(source[:bad].encode()))
    tokens = []
    idx = 0
    while idx < len(source):
        c = source[idx]
        if c.isspace():
            idx += 1
            continue
        if c.isdigit() or (c == "." and idx + 1 < len(source) and source[idx + 1].isdigit()):
            match = _NUMBER_RE.match(source, idx)
            tokens.append(Token(NUMBER, match.group(), idx))
            idx = match.end()
            continue
        if c.isalpha() or c == "_":
            match = _IDENT_RE.match(source, idx)
            tokens.append(Token(IDENT, match.group(), idx))
            idx = match.end()
            continue
        if c in OPERATORS:
            tokens.append(Token(OP, c, idx))
        elif c in "(),":
            tokens.append(Token(c, c, idx))
        else:
            raise LexError(f"unexpected character {c!r}", idx)
        idx += 1
    tokens.append(Token(EOF_KIND, "", len(source)))
    return tokens
