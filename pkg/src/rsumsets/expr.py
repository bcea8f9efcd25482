"""A small expression language for the ``coeff`` and ``lemma21`` commands.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor ("*" factor)*
    factor := ["-"] atom ("^" INT)?
    atom   := INT | "x" INT | "sum" | "e2" | "p2" | "vdm(" INT "," INT ")" | "(" expr ")"

``sum`` is x1+...+xn, ``e2`` and ``p2`` the second elementary symmetric
polynomial and power sum, ``vdm(n, e)`` is prod_{i<j}(x_i - x_j)^e.

Powers of ``sum`` sitting directly in the top-level product are not
expanded; their exponents are handed to ``extract_with_power``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .polyring import (
    ZZ,
    Ring,
    SparsePoly,
    extract_with_power,
    poly_add,
    poly_pow,
    power_sum_poly,
    truncate,
    truncated_mul,
    vandermonde_power,
)

__all__ = ["ParseError", "parse", "to_poly", "coefficient"]

_TOKEN = re.compile(r"(\d+)|(x\d+)|(sum|e2|p2|vdm)|(\S)")


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass(frozen=True)
class Node:
    op: str
    args: tuple = ()
    value: object = None
    pos: int = 0


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        mt = _TOKEN.match(text, pos)
        start = pos
        num, var, word, sym = mt.groups()
        if num is not None:
            tokens.append(("int", int(num), start))
        elif var is not None:
            tokens.append(("var", int(var[1:]), start))
        elif word is not None:
            tokens.append((word, word, start))
        else:
            if sym not in "+-*^(),":
                raise ParseError(f"unexpected character {sym!r}", start)
            tokens.append((sym, sym, start))
        pos = mt.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()
            rhs = self.term()
            if op[0] == "-":
                rhs = Node("neg", (rhs,), pos=op[2])
            node = Node("add", (node, rhs), pos=op[2])
        return node

    def term(self):
        factors = [self.factor()]
        while self.peek()[0] == "*":
            self.take()
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Node("mul", tuple(factors), pos=factors[0].pos)

    def factor(self):
        if self.peek()[0] == "-":
            tok = self.take()
            return Node("neg", (self.factor(),), pos=tok[2])
        node = self.atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.take("int")
            node = Node("pow", (node,), value=tok[1], pos=node.pos)
        return node

    def atom(self):
        kind, value, pos = self.take()
        if kind == "int":
            return Node("const", value=value, pos=pos)
        if kind == "var":
            return Node("var", value=value, pos=pos)
        if kind in ("sum", "e2", "p2"):
            return Node(kind, pos=pos)
        if kind == "vdm":
            self.take("(")
            n = self.take("int")[1]
            self.take(",")
            e = self.take("int")[1]
            self.take(")")
            return Node("vdm", value=(n, e), pos=pos)
        if kind == "(":
            node = self.expr()
            self.take(")")
            return node
        raise ParseError(f"unexpected {value!r}", pos)


def parse(text: str) -> Node:
    parser = _Parser(text)
    node = parser.expr()
    tok = parser.peek()
    if tok[0] != "end":
        raise ParseError(f"trailing input {tok[1]!r}", tok[2])
    return node


def to_poly(node: Node, n: int, ring: Ring = ZZ, cap=None) -> SparsePoly:
    """Expand ``node`` in n variables, truncated to ``cap``."""
    op = node.op
    if op == "const":
        return truncate(SparsePoly.constant(n, node.value, ring), cap)
    if op == "var":
        if not 1 <= node.value <= n:
            raise ParseError(f"x{node.value} is outside x1..x{n}", node.pos)
        return truncate(SparsePoly.variable(n, node.value, ring), cap)
    if op == "sum":
        return truncate(power_sum_poly(n, 1, ring), cap)
    if op == "p2":
        return truncate(power_sum_poly(n, 2, ring), cap)
    if op == "e2":
        terms = {}
        for i in range(n):
            for j in range(i + 1, n):
                exps = [0] * n
                exps[i] = exps[j] = 1
                terms[tuple(exps)] = 1
        return truncate(SparsePoly(n, terms, ring), cap)
    if op == "vdm":
        size, e = node.value
        if size != n:
            raise ParseError(f"vdm({size}, {e}) used with {n} variables", node.pos)
        return vandermonde_power(n, e, ring, cap)
    if op == "neg":
        return -to_poly(node.args[0], n, ring, cap)
    if op == "add":
        return poly_add(to_poly(node.args[0], n, ring, cap), to_poly(node.args[1], n, ring, cap))
    if op == "mul":
        out = truncate(SparsePoly.constant(n, 1, ring), cap)
        for arg in node.args:
            out = truncated_mul(out, to_poly(arg, n, ring, cap), cap)
        return out
    if op == "pow":
        return poly_pow(to_poly(node.args[0], n, ring, cap), node.value, cap)
    raise ParseError(f"unknown node {op}", node.pos)


def coefficient(text: str, n: int, target, ring: Ring = ZZ):
    """Coefficient of x^target in the expression, extracting powers of ``sum``
    from the top-level product without expanding them."""
    target = tuple(target)
    if len(target) != n:
        raise ValueError(f"target {target} does not have {n} entries")
    node = parse(text)
    factors = node.args if node.op == "mul" else (node,)
    power = 0
    rest = []
    for f in factors:
        if f.op == "sum":
            power += 1
        elif f.op == "pow" and f.args[0].op == "sum":
            power += f.value
        else:
            rest.append(f)
    body = to_poly(Node("mul", tuple(rest)), n, ring, target)
    return extract_with_power(body, power, target)
