"""Arithmetic expression language for vector-field components.

Grammar (whitespace insensitive, numbers are decimal literals):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' number)? | '-' factor
    atom   := number | 'x'index | function '(' expr ')' | '(' expr ')'

Variables are x1..xn.  The only built-in function is sqrt; more can be
added through register_function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable


class ExpressionError(ValueError):
    """Base for parse errors; carries the byte offset into the source."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class ExpressionSyntaxError(ExpressionError):
    pass


class UnknownIdentifierError(ExpressionError):
    pass


class EvaluationDomainError(ArithmeticError):
    """Evaluation left the expression's real domain (sqrt of a negative
    number, division by zero)."""


# --- AST ---------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Bin:
    op: str  # '+', '-', '*', '/'
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: float  # grammar restricts exponents to numeric literals


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Num | Var | Neg | Bin | Pow | Call


def _sqrt(a: float) -> float:
    if a < 0.0:
        raise EvaluationDomainError(f"sqrt of negative value {a}")
    return math.sqrt(a)


_FUNCTIONS: dict[str, Callable[[float], float]] = {"sqrt": _sqrt}


def register_function(name: str, fn: Callable[[float], float]) -> None:
    """Add a unary function to the expression language."""
    if not name.isidentifier():
        raise ValueError(f"invalid function name {name!r}")
    _FUNCTIONS[name] = fn


# --- Tokenizer ---------------------------------------------------------

_OPERATORS = set("+-*/^")


@dataclass(frozen=True)
class _Token:
    kind: str  # 'number' | 'ident' | 'op' | '(' | ')' | 'end'
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPERATORS:
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        if c in "()":
            tokens.append(_Token(c, c, i))
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                float(text)
            except ValueError:
                raise ExpressionSyntaxError(f"bad number {text!r}", i) from None
            tokens.append(_Token("number", text, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], i))
            i = j
            continue
        raise ExpressionSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


# --- Parser ------------------------------------------------------------


class _Parser:
    def __init__(self, source: str, dimension: int, aliases: dict[str, int]):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.dimension = dimension
        self.aliases = aliases

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {tok.text!r}", tok.offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = Bin(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = Bin(op, node, self.factor())
        return node

    def factor(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.factor())
        node = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            num = self.peek()
            if num.kind != "number":
                raise ExpressionSyntaxError(
                    "exponent must be a numeric literal", num.offset
                )
            self.advance()
            node = Pow(node, float(num.text))
        return node

    def atom(self) -> Node:
        tok = self.advance()
        if tok.kind == "number":
            return Num(float(tok.text))
        if tok.kind == "(":
            node = self.expr()
            closing = self.advance()
            if closing.kind != ")":
                raise ExpressionSyntaxError("expected ')'", closing.offset)
            return node
        if tok.kind == "ident":
            if self.peek().kind == "(":
                if tok.text not in _FUNCTIONS:
                    raise UnknownIdentifierError(
                        f"unknown function {tok.text!r}", tok.offset
                    )
                self.advance()
                arg = self.expr()
                closing = self.advance()
                if closing.kind != ")":
                    raise ExpressionSyntaxError("expected ')'", closing.offset)
                return Call(tok.text, arg)
            return self.variable(tok)
        raise ExpressionSyntaxError(
            f"unexpected {tok.text!r}" if tok.text else "unexpected end of input",
            tok.offset,
        )

    def variable(self, tok: _Token) -> Var:
        if tok.text in self.aliases:
            return Var(self.aliases[tok.text])
        if tok.text.startswith("x") and tok.text[1:].isdigit():
            index = int(tok.text[1:])
            if not 1 <= index <= self.dimension:
                raise UnknownIdentifierError(
                    f"variable {tok.text} out of range for dimension"
                    f" {self.dimension}",
                    tok.offset,
                )
            return Var(index)
        raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.offset)


def parse_expression(
    source: str, dimension: int, aliases: dict[str, int] | None = None
) -> Node:
    """Parse one component expression over variables x1..x{dimension}.

    aliases maps extra identifiers to variable indices; the history blocks
    use it to admit 't' as the single time variable.
    """
    if dimension < 1:
        raise ValueError("dimension must be at least 1")
    return _Parser(source, dimension, aliases or {}).parse()


def parse_field(sources: list[str], dimension: int) -> tuple[Node, ...]:
    """Parse the n component expressions of an n-dimensional vector field."""
    if len(sources) != dimension:
        raise ValueError(
            f"expected {dimension} component expressions, got {len(sources)}"
        )
    return tuple(parse_expression(s, dimension) for s in sources)


# --- Printing ----------------------------------------------------------

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def _wrap(text: str, inner: int, outer: int) -> str:
    return f"({text})" if inner < outer else text


def format_expr(node: Node, _outer: int = 0) -> str:
    """Render an AST back to source that re-parses to the same tree."""
    if isinstance(node, Num):
        return _wrap(repr(node.value), 4, _outer)
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Neg):
        return _wrap(f"-{format_expr(node.operand, 3)}", 2, _outer)
    if isinstance(node, Bin):
        prec = _PRECEDENCE[node.op]
        left = format_expr(node.left, prec)
        # the grammar is left-associative, so the right operand needs one
        # more level to survive a round trip
        right = format_expr(node.right, prec + 1)
        return _wrap(f"{left} {node.op} {right}", prec, _outer)
    if isinstance(node, Pow):
        return _wrap(f"{format_expr(node.base, 4)}^{node.exponent!r}", 3, _outer)
    if isinstance(node, Call):
        return f"{node.name}({format_expr(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# --- Evaluation --------------------------------------------------------


def compile_expr(node: Node) -> Callable:
    """Compile an AST to a closure taking the state vector.

    The closure raises EvaluationDomainError when evaluation leaves the
    real domain.
    """
    if isinstance(node, Num):
        value = node.value
        return lambda x: value
    if isinstance(node, Var):
        i = node.index - 1
        return lambda x: x[i]
    if isinstance(node, Neg):
        inner = compile_expr(node.operand)
        return lambda x: -inner(x)
    if isinstance(node, Bin):
        left = compile_expr(node.left)
        right = compile_expr(node.right)
        if node.op == "+":
            return lambda x: left(x) + right(x)
        if node.op == "-":
            return lambda x: left(x) - right(x)
        if node.op == "*":
            return lambda x: left(x) * right(x)

        def divide(x):
            denom = right(x)
            if denom == 0.0:
                raise EvaluationDomainError("division by zero")
            return left(x) / denom

        return divide
    if isinstance(node, Pow):
        base = compile_expr(node.base)
        exponent = node.exponent

        def power(x):
            b = base(x)
            try:
                return math.pow(b, exponent)
            except (ValueError, ZeroDivisionError, OverflowError) as exc:
                raise EvaluationDomainError(
                    f"{b} ^ {exponent} is undefined"
                ) from exc

        return power
    if isinstance(node, Call):
        fn = _FUNCTIONS[node.name]
        arg = compile_expr(node.arg)
        return lambda x: fn(arg(x))
    raise TypeError(f"not an expression node: {node!r}")


def evaluate_expr(node: Node, x) -> float:
    return compile_expr(node)(x)
