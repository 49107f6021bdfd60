"""
Recursive-descent parser and pretty-printer for the function DSL.

Grammar (precedence low to high):

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' ['-'] INTEGER)?
    atom     := NUMBER | VARIABLE | NAME '(' expr (',' expr)* ')' | '(' expr ')'
"""
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

from dsl.ast import FUNCTIONS, BinaryOp, Call, FunctionAST, Negate, Node, Number, Power, Variable
from utils.errors import ArityMismatch, DimensionExceeded, ExpressionSyntaxError, UnknownIdentifier

_TOKEN_PATTERN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)
_VARIABLE_PATTERN = re.compile(r"^x([1-9][0-9]*)$")

_ATOM_START = ("number", "variable", "function", "(", "-")
_OPERATORS = ("+", "-", "*", "/", "^", ")", ",", "end of input")


@dataclass(frozen=True)
class Token:
    kind: str  # number, name, op, end
    text: str
    offset: int


def tokenize(expr: str) -> List[Token]:
    """Split an ASCII expression into tokens; offsets are byte offsets."""
    for i, ch in enumerate(expr):
        if ord(ch) > 127:
            raise ExpressionSyntaxError(len(expr[:i].encode()), ["ASCII character"], ch)

    tokens: List[Token] = []
    pos = 0
    while pos < len(expr):
        if expr[pos:].strip() == "":
            break
        match = _TOKEN_PATTERN.match(expr, pos)
        if match is None or match.lastgroup is None:
            start = len(expr) - len(expr[pos:].lstrip())
            raise ExpressionSyntaxError(start, _ATOM_START + _OPERATORS[:-1], expr[start])
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(Token("end", "", len(expr)))
    return tokens


class _Parser:
    """Single-use parser over a token list."""

    def __init__(self, tokens: List[Token], dim: int):
        self.tokens = tokens
        self.pos = 0
        self.dim = dim

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _at_op(self, *ops: str) -> bool:
        return self.current.kind == "op" and self.current.text in ops

    def _expect_op(self, op: str, expected: Optional[List[str]] = None) -> Token:
        if not self._at_op(op):
            raise ExpressionSyntaxError(self.current.offset, expected or [op], self.current.text)
        return self._advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != "end":
            raise ExpressionSyntaxError(self.current.offset, _OPERATORS, self.current.text)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self._at_op("+", "-"):
            op = self._advance().text
            node = BinaryOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self._at_op("*", "/"):
            op = self._advance().text
            node = BinaryOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self._at_op("-"):
            self._advance()
            return Negate(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self._at_op("^"):
            self._advance()
            sign = 1
            if self._at_op("-"):
                self._advance()
                sign = -1
            token = self.current
            if token.kind != "number" or not token.text.isdigit():
                raise ExpressionSyntaxError(token.offset, ["integer exponent"], token.text)
            self._advance()
            return Power(base, sign * int(token.text))
        return base

    def atom(self) -> Node:
        token = self.current
        if token.kind == "number":
            self._advance()
            return Number(Fraction(token.text))

        if token.kind == "name":
            self._advance()
            variable = _VARIABLE_PATTERN.match(token.text)
            if variable:
                index = int(variable.group(1))
                if index > self.dim:
                    raise DimensionExceeded(index, self.dim, token.offset)
                return Variable(index)
            if token.text not in FUNCTIONS:
                raise UnknownIdentifier(token.text, token.offset)
            return self._call(token)

        if self._at_op("("):
            self._advance()
            node = self.expr()
            self._expect_op(")", [")", "+", "-", "*", "/", "^"])
            return node

        raise ExpressionSyntaxError(token.offset, _ATOM_START, token.text)

    def _call(self, name: Token) -> Node:
        self._expect_op("(", ["("])
        args = [self.expr()]
        while self._at_op(","):
            self._advance()
            args.append(self.expr())
        self._expect_op(")", [")", ","])

        low, high = FUNCTIONS[name.text]
        if len(args) < low or (high is not None and len(args) > high):
            expected = str(low) if high == low else f"at least {low}"
            raise ArityMismatch(name.text, expected, len(args), name.offset)
        return Call(name.text, tuple(args))


def parse(expr: str, dim: int) -> FunctionAST:
    """
    Parse an expression over variables x1..x{dim}.

    Args:
        expr: ASCII expression text, e.g. "min(x1, 1.2)"
        dim: Declared dimension d >= 1

    Returns:
        FunctionAST

    Raises:
        ExpressionSyntaxError: malformed text (with byte offset and expected set)
        UnknownIdentifier: unknown name
        ArityMismatch: wrong number of function arguments
        DimensionExceeded: variable index above dim
    """
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    tokens = tokenize(expr)
    root = _Parser(tokens, dim).parse()
    return FunctionAST(root=root, dim=dim, source=expr)


# precedence used by the pretty-printer
_ADD, _MUL, _UNARY, _POWER, _ATOM = 1, 2, 3, 4, 5


def _precedence(node: Node) -> int:
    if isinstance(node, BinaryOp):
        return _ADD if node.op in "+-" else _MUL
    if isinstance(node, Negate):
        return _UNARY
    if isinstance(node, Power):
        return _POWER
    return _ATOM


def _format_number(value: Fraction) -> str:
    """Exact decimal text of a literal (literals always have terminating expansions)."""
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        raise ValueError(f"literal {value} has no terminating decimal form")
    digits = max(twos, fives)
    scaled = value.numerator * 10 ** digits // value.denominator
    text = str(scaled).rjust(digits + 1, "0")
    return f"{text[:-digits]}.{text[-digits:]}"


def _wrap(node: Node, needs_parens: bool) -> str:
    text = pretty_node(node)
    return f"({text})" if needs_parens else text


def pretty_node(node: Node) -> str:
    if isinstance(node, Number):
        return _format_number(node.value)
    if isinstance(node, Variable):
        return f"x{node.index}"
    if isinstance(node, Negate):
        return "-" + _wrap(node.operand, _precedence(node.operand) < _UNARY)
    if isinstance(node, Power):
        return f"{_wrap(node.base, _precedence(node.base) < _ATOM)}^{node.exponent}"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(pretty_node(a) for a in node.args)})"
    level = _precedence(node)
    left = _wrap(node.left, _precedence(node.left) < level)
    right = _wrap(node.right, _precedence(node.right) <= level)
    return f"{left} {node.op} {right}"


def pretty(ast: FunctionAST) -> str:
    """Canonical text of an AST; parse(pretty(ast), ast.dim) == ast."""
    return pretty_node(ast.root)
