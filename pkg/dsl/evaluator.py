"""Double-precision evaluation of DSL functions with the R+ codomain guard."""
from typing import List, Sequence

import numpy as np

from dsl.ast import BinaryOp, Call, FunctionAST, Negate, Node, Number, Power, Variable
from utils.errors import DomainError, NegativeValue

_UNARY_FUNCS = {
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
}


def _first_bad(mask: np.ndarray) -> int:
    return int(np.flatnonzero(mask)[0])


def _eval(node: Node, columns: List[np.ndarray], points: np.ndarray) -> np.ndarray:
    if isinstance(node, Number):
        return np.full(points.shape[0], float(node.value))
    if isinstance(node, Variable):
        return columns[node.index - 1]
    if isinstance(node, Negate):
        return -_eval(node.operand, columns, points)
    if isinstance(node, Power):
        base = _eval(node.base, columns, points)
        if node.exponent < 0 and np.any(base == 0):
            raise DomainError("zero raised to a negative power", points[_first_bad(base == 0)])
        return np.power(base, float(node.exponent))
    if isinstance(node, BinaryOp):
        left = _eval(node.left, columns, points)
        right = _eval(node.right, columns, points)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if np.any(right == 0):
            raise DomainError("division by zero", points[_first_bad(right == 0)])
        return left / right
    if isinstance(node, Call):
        args = [_eval(a, columns, points) for a in node.args]
        if node.name == "min":
            return np.minimum.reduce(args)
        if node.name == "max":
            return np.maximum.reduce(args)
        if node.name == "sqrt":
            if np.any(args[0] < 0):
                raise DomainError("square root of a negative number", points[_first_bad(args[0] < 0)])
            return np.sqrt(args[0])
        return _UNARY_FUNCS[node.name](args[0])
    raise TypeError(f"unknown node {node!r}")


def evaluate_many(ast: FunctionAST, points: np.ndarray) -> np.ndarray:
    """
    Evaluate f at many points at once.

    Args:
        ast: Parsed function
        points: Array of shape (M, dim)

    Returns:
        Array of shape (M,) with f-values (float64)

    Raises:
        DomainError: division by zero, sqrt of a negative, non-finite result
        NegativeValue: f < 0 at some point (first offending point reported)
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != ast.dim:
        raise ValueError(f"expected points of shape (M, {ast.dim}), got {points.shape}")

    columns = [points[:, k] for k in range(ast.dim)]
    with np.errstate(all="ignore"):
        values = np.asarray(_eval(ast.root, columns, points), dtype=np.float64)

    finite = np.isfinite(values)
    if not finite.all():
        raise DomainError("non-finite function value", points[_first_bad(~finite)])
    negative = values < 0
    if negative.any():
        idx = _first_bad(negative)
        raise NegativeValue(points[idx], values[idx])
    # -0.0 and 0.0 must not differ downstream
    return values + 0.0


def evaluate(ast: FunctionAST, point: Sequence[float]) -> float:
    """
    Evaluate f at one point.

    Args:
        ast: Parsed function
        point: Coordinates (length must equal ast.dim)

    Returns:
        f(point) >= 0
    """
    coords = np.asarray(point, dtype=np.float64).reshape(1, -1)
    if coords.shape[1] != ast.dim:
        raise ValueError(f"point has dimension {coords.shape[1]}, function expects {ast.dim}")
    return float(evaluate_many(ast, coords)[0])
