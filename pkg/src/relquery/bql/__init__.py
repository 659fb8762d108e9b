"""BQL subset: lexer, parser, AST, pretty-printer, and evaluator."""

from .lexer import tokenize
from .nodes import *  # noqa: F401,F403
from .parser import parse, parse_script
from .printer import to_bql
from .evaluate import execute, ResultTable
from .format import format_result

__all__ = [
    "tokenize", "parse", "parse_script", "to_bql",
    "execute", "ResultTable", "format_result",
]
