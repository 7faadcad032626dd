"""OSQL dialect: lexer, parser, AST, builtins and the evaluator."""

from . import ast, builtins
from .lexer import tokenize
from .parser import parse_script, parse_statement

__all__ = ["ast", "builtins", "tokenize", "parse_script", "parse_statement"]
