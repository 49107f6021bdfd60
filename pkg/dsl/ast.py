"""Expression tree of the function DSL."""
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple, Union


@dataclass(frozen=True)
class Number:
    value: Fraction


@dataclass(frozen=True)
class Variable:
    index: int


@dataclass(frozen=True)
class Negate:
    operand: "Node"


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Power:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple["Node", ...]


Node = Union[Number, Variable, Negate, BinaryOp, Power, Call]

# name -> (min arity, max arity or None for variadic)
FUNCTIONS = {
    "abs": (1, 1),
    "min": (2, None),
    "max": (2, None),
    "sin": (1, 1),
    "cos": (1, 1),
    "exp": (1, 1),
    "sqrt": (1, 1),
}


@dataclass(frozen=True)
class FunctionAST:
    """A parsed function f: R^dim -> R+, with the text it came from."""
    root: Node
    dim: int
    source: str = ""

    def __eq__(self, other) -> bool:
        # the source text does not take part in identity
        if not isinstance(other, FunctionAST):
            return NotImplemented
        return self.root == other.root and self.dim == other.dim

    def __hash__(self) -> int:
        return hash((self.root, self.dim))
