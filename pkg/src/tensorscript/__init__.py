"""Tensor computer algebra with a TeX-like notation.

The usual entry points are :class:`Session` for running statements and the
``tensorscript`` command line tool.
"""
from .errors import EngineError
from .expr import Expr, Index
from .notation import parse_expression, parse_statement
from .printing import print_latex, print_plain
from .properties import Property, PropertyRegistry
from .session import Session, run_script

__all__ = ["EngineError", "Expr", "Index", "Property", "PropertyRegistry", "Session",
           "parse_expression", "parse_statement", "print_latex", "print_plain", "run_script"]
__version__ = "0.1.0"
