"""Surface syntax: AST, lexer, parser and pretty printer."""
from .ast import *  # noqa: F401,F403
from .lexer import SyntaxError_, tokenize
from .parser import parse_program, parse_scheme, parse_term, parse_type
from .printer import pretty_print

__all__ = ["SyntaxError_", "tokenize", "parse_program", "parse_scheme", "parse_term",
           "parse_type", "pretty_print"]
