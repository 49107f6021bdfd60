"""Function DSL: parse and evaluate nonnegative closed-form test functions."""
from .ast import FunctionAST
from .evaluator import evaluate, evaluate_many
from .parser import parse, pretty

__all__ = [
    "FunctionAST",
    "parse",
    "pretty",
    "evaluate",
    "evaluate_many",
]
