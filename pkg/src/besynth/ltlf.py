"""LTLf formulas: AST, parser, printer, desugaring and finite-trace semantics.

Formula nodes are hash-consed: building the same tree twice yields the same
object, so equality is identity and ``size`` / progression caches are cheap.
"""

from __future__ import annotations

import re
import weakref
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import ParseError, UndeclaredAtomError

__all__ = [
    "Fluent", "FluentSet", "Formula",
    "TrueF", "FalseF", "Atom", "Not", "And", "Or", "Implies",
    "Next", "WeakNext", "Until", "Eventually", "Always",
    "TRUE", "FALSE",
    "parse", "desugar", "evaluate", "size", "atoms", "subformulas",
]


@dataclass(frozen=True)
class Fluent:
    name: str
    index: int


class FluentSet:
    """Ordered, duplicate-free set of fluent names.

    Assignments (subsets of the fluents) are encoded as int bitmasks where
    bit ``i`` stands for the fluent with index ``i``.
    """

    _NAME = re.compile(r"[A-Za-z0-9_]+\Z")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        for name in names:
            if not isinstance(name, str) or not self._NAME.match(name):
                raise ValueError(f"invalid fluent name {name!r}")
        if len(set(names)) != len(names):
            raise ValueError("duplicate fluent names")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[Fluent]:
        return (Fluent(n, i) for i, n in enumerate(self.names))

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FluentSet) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"FluentSet({list(self.names)!r})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown fluent {name!r}") from None

    def mask(self, names: Iterable[str]) -> int:
        m = 0
        for n in names:
            m |= 1 << self.index(n)
        return m

    def names_of(self, mask: int) -> frozenset[str]:
        return frozenset(n for i, n in enumerate(self.names) if mask >> i & 1)

    def assignments(self) -> Iterator[frozenset[str]]:
        for m in range(1 << len(self.names)):
            yield self.names_of(m)


# ---------------------------------------------------------------------------
# AST

_TABLE: "weakref.WeakValueDictionary[tuple, Formula]" = weakref.WeakValueDictionary()


class Formula:
    """Base class of all formula nodes. Instances are interned."""

    __slots__ = ("args", "_hash", "__weakref__")
    arity = 0

    def __new__(cls, *args):
        if len(args) != cls.arity:
            raise TypeError(f"{cls.__name__} takes {cls.arity} argument(s)")
        if cls is Atom:
            if not isinstance(args[0], str):
                raise TypeError("Atom expects a fluent name")
        else:
            for a in args:
                if not isinstance(a, Formula):
                    raise TypeError(f"{cls.__name__} expects Formula operands, got {a!r}")
        key = (cls, args)
        node = _TABLE.get(key)
        if node is None:
            node = object.__new__(cls)
            node.args = args
            node._hash = hash(key)
            _TABLE[key] = node
        return node

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return self is other

    def __reduce__(self):
        return (type(self), self.args)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({', '.join(map(repr, self.args))})"

    def __str__(self) -> str:
        return to_text(self)

    @property
    def children(self) -> tuple["Formula", ...]:
        return () if isinstance(self, Atom) else self.args


class TrueF(Formula):
    __slots__ = ()


class FalseF(Formula):
    __slots__ = ()


class Atom(Formula):
    __slots__ = ()
    arity = 1

    @property
    def name(self) -> str:
        return self.args[0]


class _Unary(Formula):
    __slots__ = ()
    arity = 1

    @property
    def operand(self) -> Formula:
        return self.args[0]


class _Binary(Formula):
    __slots__ = ()
    arity = 2

    @property
    def left(self) -> Formula:
        return self.args[0]

    @property
    def right(self) -> Formula:
        return self.args[1]


class Not(_Unary):
    __slots__ = ()


class Next(_Unary):
    __slots__ = ()


class WeakNext(_Unary):
    __slots__ = ()


class Eventually(_Unary):
    __slots__ = ()


class Always(_Unary):
    __slots__ = ()


class And(_Binary):
    __slots__ = ()


class Or(_Binary):
    __slots__ = ()


class Implies(_Binary):
    __slots__ = ()


class Until(_Binary):
    __slots__ = ()


TRUE = TrueF()
FALSE = FalseF()


def subformulas(f: Formula) -> set[Formula]:
    seen: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g not in seen:
            seen.add(g)
            stack.extend(g.children)
    return seen


def size(f: Formula) -> int:
    """Number of distinct subformulas of ``f``."""
    return len(subformulas(f))


def atoms(f: Formula) -> set[str]:
    return {g.name for g in subformulas(f) if isinstance(g, Atom)}


# ---------------------------------------------------------------------------
# Printing

_UNARY_TEXT = {Not: "!", Next: "X ", WeakNext: "WX ", Eventually: "F ", Always: "G "}
_BINARY_TEXT = {And: "&", Or: "|", Implies: "->", Until: "U"}


def to_text(f: Formula) -> str:
    """Fully parenthesized canonical text; ``parse`` reads it back unchanged."""
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Atom):
        return f.name
    op = type(f)
    if op in _UNARY_TEXT:
        return _UNARY_TEXT[op] + to_text(f.operand)
    return f"({to_text(f.left)} {_BINARY_TEXT[op]} {to_text(f.right)})"


# ---------------------------------------------------------------------------
# Parsing
#
#   impl  := or ('->' impl)?
#   or    := and ('|' and)*
#   and   := until ('&' until)*
#   until := unary ('U' until)?
#   unary := ('!' | 'X' | 'WX' | 'F' | 'G') unary | primary
#   primary := 'true' | 'false' | IDENT | '(' impl ')'

_TOKEN = re.compile(r"\s*(?:(->)|([!&|()])|([A-Za-z0-9_]+))")
_KEYWORDS = {"X", "WX", "F", "G", "U", "true", "false"}
_PREFIX = {"!": Not, "X": Next, "WX": WeakNext, "F": Eventually, "G": Always}


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = len(text) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        tok = m.group(m.lastindex)
        tokens.append((tok, m.start(m.lastindex)))
        pos = m.end()
    tokens.append(("", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, fluents: FluentSet | Iterable[str] | None):
        self.tokens = _tokenize(text)
        self.pos = 0
        if fluents is not None and not isinstance(fluents, FluentSet):
            fluents = FluentSet(fluents)
        self.fluents = fluents

    def peek(self) -> str:
        return self.tokens[self.pos][0]

    def take(self) -> tuple[str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, tok: str) -> None:
        got, at = self.take()
        if got != tok:
            raise ParseError(f"expected {tok!r}, found {got or 'end of input'!r}", at)

    def parse(self) -> Formula:
        f = self.impl()
        tok, at = self.tokens[self.pos]
        if tok:
            raise ParseError(f"unexpected token {tok!r}", at)
        return f

    def impl(self) -> Formula:
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.impl())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.until()
        while self.peek() == "&":
            self.take()
            f = And(f, self.until())
        return f

    def until(self) -> Formula:
        left = self.unary()
        if self.peek() == "U":
            self.take()
            return Until(left, self.until())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok in _PREFIX:
            self.take()
            return _PREFIX[tok](self.unary())
        return self.primary()

    def primary(self) -> Formula:
        tok, at = self.take()
        if tok == "(":
            f = self.impl()
            self.expect(")")
            return f
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        if tok and tok not in _KEYWORDS and tok not in ("->", "!", "&", "|", ")"):
            if self.fluents is not None and tok not in self.fluents:
                raise UndeclaredAtomError(tok, at)
            return Atom(tok)
        raise ParseError(f"unexpected {tok or 'end of input'!r}", at)


def parse(text: str, fluents: FluentSet | Iterable[str] | None = None) -> Formula:
    """Parse concrete LTLf syntax.

    Operators: ``! & | -> X WX U F G true false``. ``U`` and ``->`` are
    right-associative; prefix operators bind tightest, then ``U``, ``&``,
    ``|`` and ``->``. When ``fluents`` is given, every atom must be declared.
    """
    return _Parser(text, fluents).parse()


# ---------------------------------------------------------------------------
# Desugaring and semantics

def desugar(f: Formula) -> Formula:
    """Rewrite into the core {true, false, atom, !, &, X, U}."""
    if isinstance(f, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, Not):
        return Not(desugar(f.operand))
    if isinstance(f, Next):
        return Next(desugar(f.operand))
    if isinstance(f, WeakNext):
        return Not(Next(Not(desugar(f.operand))))
    if isinstance(f, Eventually):
        return Until(TRUE, desugar(f.operand))
    if isinstance(f, Always):
        return Not(Until(TRUE, Not(desugar(f.operand))))
    left, right = desugar(f.left), desugar(f.right)
    if isinstance(f, And):
        return And(left, right)
    if isinstance(f, Until):
        return Until(left, right)
    if isinstance(f, Or):
        return Not(And(Not(left), Not(right)))
    if isinstance(f, Implies):
        return Not(And(left, Not(right)))
    raise TypeError(f"unknown formula node {f!r}")


def evaluate(f: Formula, trace: Sequence[Iterable[str]], i: int = 0) -> bool:
    """Truth of ``f`` at instant ``i`` of a nonempty finite trace.

    Each trace element is the set of fluent names true at that instant.
    """
    if not trace:
        raise ValueError("LTLf traces are nonempty")
    last = len(trace) - 1
    if not 0 <= i <= last:
        raise IndexError(f"instant {i} outside 0..{last}")
    steps = [s if isinstance(s, (set, frozenset)) else frozenset(s) for s in trace]
    memo: dict[tuple[Formula, int], bool] = {}

    def ev(g: Formula, k: int) -> bool:
        key = (g, k)
        if key in memo:
            return memo[key]
        if isinstance(g, TrueF):
            r = True
        elif isinstance(g, FalseF):
            r = False
        elif isinstance(g, Atom):
            r = g.name in steps[k]
        elif isinstance(g, Not):
            r = not ev(g.operand, k)
        elif isinstance(g, And):
            r = ev(g.left, k) and ev(g.right, k)
        elif isinstance(g, Or):
            r = ev(g.left, k) or ev(g.right, k)
        elif isinstance(g, Implies):
            r = (not ev(g.left, k)) or ev(g.right, k)
        elif isinstance(g, Next):
            r = k < last and ev(g.operand, k + 1)
        elif isinstance(g, WeakNext):
            r = k == last or ev(g.operand, k + 1)
        elif isinstance(g, Until):
            r = False
            for j in range(k, last + 1):
                if ev(g.right, j):
                    r = True
                    break
                if not ev(g.left, j):
                    break
        elif isinstance(g, Eventually):
            r = any(ev(g.operand, j) for j in range(k, last + 1))
        elif isinstance(g, Always):
            r = all(ev(g.operand, j) for j in range(k, last + 1))
        else:
            raise TypeError(f"unknown formula node {g!r}")
        memo[key] = r
        return r

    return ev(f, i)
