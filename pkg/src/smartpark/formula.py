"""PLTL formulas: AST, ASCII surface syntax, negation normal form.

Surface syntax (whitespace insignificant)::

    F ::= F '->' F | F '|' F | F '&' F | '~' F | 'F' F | 'G' F | atom | '(' F ')'

Unary operators bind tightest, then ``&``, ``|`` and finally ``->``
(right-associative). ``F``, ``G`` and ``X`` are reserved words; ``X``
(next) exists only inside the tableau and is rejected by the parser.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class Formula:
    """Base class of all formula nodes. Nodes are immutable and hashable."""

    __slots__ = ()

    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __invert__(self) -> Formula:
        return Not(self)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __post_init__(self):
        if not ATOM_RE.fullmatch(self.name) or self.name in RESERVED:
            raise ValueError(f"invalid atom name: {self.name!r}")


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True)
class Always(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


ATOM_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*")
RESERVED = frozenset({"F", "G", "X"})

UNARY = (Not, Next, Eventually, Always)
BINARY = (And, Or, Implies)

_UNARY_SYMBOL = {Not: "~", Next: "X", Eventually: "F", Always: "G"}
_BINARY_SYMBOL = {And: "&", Or: "|", Implies: "->"}


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN_RE = re.compile(r"\s*(?:(->)|([~&|()])|([a-zA-Z][a-zA-Z0-9_]*))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            while text[pos].isspace():
                pos += 1
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        tok = m.group(1) or m.group(2) or m.group(3)
        tokens.append((tok, m.start(m.lastindex)))
        pos = m.end()
    tokens.append(("<end>", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def pos(self) -> int:
        return self.tokens[self.i][1]

    def take(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str):
        if self.peek() != tok:
            raise ParseError(f"expected {tok!r}, found {self.peek()!r}", self.pos())
        self.take()

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok, pos = self.tokens[self.i]
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok == "F":
            self.take()
            return Eventually(self.unary())
        if tok == "G":
            self.take()
            return Always(self.unary())
        if tok == "X":
            raise ParseError("next operator 'X' is not part of the surface syntax", pos)
        if tok == "(":
            self.take()
            f = self.implication()
            self.expect(")")
            return f
        if ATOM_RE.fullmatch(tok) and tok != "<end>":
            self.take()
            return Atom(tok)
        raise ParseError(f"unexpected token {tok!r}", pos)


def parse(text: str) -> Formula:
    """Parse the ASCII surface syntax into a formula tree.

    Raises ParseError (a ValueError) carrying the character position.
    """
    if not text or not text.strip():
        raise ParseError("empty formula", 0)
    p = _Parser(text)
    f = p.implication()
    if p.peek() != "<end>":
        raise ParseError(f"unexpected token {p.peek()!r}", p.pos())
    return f


def render(f: Formula) -> str:
    """Render `f` so that ``parse(render(f)) == f`` (for X-free formulas).

    Binary subterms are parenthesised, unary operators are written prefix.
    """
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, UNARY):
        sym = _UNARY_SYMBOL[type(f)]
        sep = "" if sym == "~" else " "
        return f"{sym}{sep}{_operand(f.operand)}"
    if isinstance(f, BINARY):
        return f"{_operand(f.left)} {_BINARY_SYMBOL[type(f)]} {_operand(f.right)}"
    raise TypeError(f"not a formula: {f!r}")


def _operand(f: Formula) -> str:
    text = render(f)
    return f"({text})" if isinstance(f, BINARY) else text


def nnf(f: Formula) -> Formula:
    """Push negations down to atoms. Implications are kept as connectives."""
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not):
        return _negate(f.operand)
    if isinstance(f, UNARY):
        return type(f)(nnf(f.operand))
    return type(f)(nnf(f.left), nnf(f.right))


def _negate(g: Formula) -> Formula:
    # nnf(~g)
    if isinstance(g, Atom):
        return Not(g)
    if isinstance(g, Not):
        return nnf(g.operand)
    if isinstance(g, And):
        return Or(_negate(g.left), _negate(g.right))
    if isinstance(g, Or):
        return And(_negate(g.left), _negate(g.right))
    if isinstance(g, Implies):
        return And(nnf(g.left), _negate(g.right))
    if isinstance(g, Eventually):
        return Always(_negate(g.operand))
    if isinstance(g, Always):
        return Eventually(_negate(g.operand))
    if isinstance(g, Next):
        return Next(_negate(g.operand))
    raise TypeError(f"not a formula: {g!r}")


def atoms(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return {f.name}
    if isinstance(f, UNARY):
        return atoms(f.operand)
    return atoms(f.left) | atoms(f.right)


def subformulas(f: Formula) -> list[Formula]:
    """Distinct subformulas of `f`, children before parents."""
    out: dict[Formula, None] = {}

    def walk(g):
        if isinstance(g, UNARY):
            walk(g.operand)
        elif isinstance(g, BINARY):
            walk(g.left)
            walk(g.right)
        out.setdefault(g)

    walk(f)
    return list(out)


def size(f: Formula) -> int:
    """Number of nodes in the syntax tree."""
    if isinstance(f, Atom):
        return 1
    if isinstance(f, UNARY):
        return 1 + size(f.operand)
    return 1 + size(f.left) + size(f.right)


def is_literal(f: Formula) -> bool:
    return isinstance(f, Atom) or (isinstance(f, Not) and isinstance(f.operand, Atom))


def rename(f: Formula, mapping: dict[str, str]) -> Formula:
    if isinstance(f, Atom):
        return Atom(mapping.get(f.name, f.name))
    if isinstance(f, UNARY):
        return type(f)(rename(f.operand, mapping))
    return type(f)(rename(f.left, mapping), rename(f.right, mapping))
