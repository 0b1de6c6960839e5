from dsl.evaluate import compile_expr, compile_field, compile_scalars, evaluate, validate
from dsl.lexer import tokenize
from dsl.parser import parse
from dsl.printer import to_source
