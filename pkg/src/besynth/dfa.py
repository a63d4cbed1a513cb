"""Compile LTLf formulas into minimal, total DFAs over fluent assignments.

Construction is by formula progression. A DFA state is a positive boolean
combination of *obligations* on the rest of the trace, each either strong
(``X psi``: the trace must continue and satisfy ``psi``) or weak (``WX psi``:
if the trace continues it must satisfy ``psi``). Negation is pushed onto
obligations by swapping strong and weak, so states are monotone and their
minimal DNF (a set of clauses with subsumed clauses removed) is canonical.
A state is final iff some clause consists only of weak obligations.

The transition table is indexed by *letters*: assignments projected onto
the fluents the formula mentions (its support). Guards for export and
inspection are derived from the table.
"""

from __future__ import annotations

import itertools
import json
import os
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from . import ltlf
from .errors import DfaError, StateBudgetExceeded
from .ltlf import (Always, And, Atom, Eventually, FalseF, FluentSet, Formula,
                   Implies, Next, Not, Or, TrueF, Until, WeakNext)

DEFAULT_STATE_CAP = 200_000


def state_cap(cap: int | None = None) -> int:
    if cap is not None:
        return cap
    env = os.environ.get("BESYNTH_STATE_CAP")
    return int(env) if env else DEFAULT_STATE_CAP


# ---------------------------------------------------------------------------
# Progression over monotone DNF states

Term = tuple[bool, Formula]          # (strong, formula)
Clause = frozenset                   # frozenset[Term]
State = frozenset                    # frozenset[Clause]

TOP: State = frozenset({frozenset()})
BOTTOM: State = frozenset()


def _reduce(clauses: Iterable[Clause]) -> State:
    clauses = sorted(set(clauses), key=len)
    kept: list[Clause] = []
    for c in clauses:
        if not any(k <= c for k in kept):
            kept.append(c)
    return frozenset(kept)


def _or(a: State, b: State) -> State:
    if a == TOP or b == TOP:
        return TOP
    return _reduce(a | b)


def _and(a: State, b: State) -> State:
    if not a or not b:
        return BOTTOM
    if a == TOP:
        return b
    if b == TOP:
        return a
    return _reduce(x | y for x in a for y in b)


def _term(strong: bool, f: Formula) -> State:
    # X true must still be recorded (the trace has to go on); so must WX false.
    if isinstance(f, TrueF) and not strong:
        return TOP
    if isinstance(f, FalseF) and strong:
        return BOTTOM
    return frozenset({frozenset({(strong, f)})})


def _negate_formula(f: Formula) -> Formula:
    if isinstance(f, Not):
        return f.operand
    if isinstance(f, TrueF):
        return ltlf.FALSE
    if isinstance(f, FalseF):
        return ltlf.TRUE
    return Not(f)


def _negate(s: State) -> State:
    # not(OR_i AND_j t_ij) = AND_i OR_j not(t_ij); not(X f) = WX not f.
    result = TOP
    for clause in s:
        disj = BOTTOM
        for strong, f in clause:
            disj = _or(disj, _term(not strong, _negate_formula(f)))
        result = _and(result, disj)
        if not result:
            break
    return result


@lru_cache(maxsize=None)
def _now_atoms(f: Formula) -> frozenset[str]:
    """Atoms read at the current instant (not guarded by a next operator)."""
    if isinstance(f, Atom):
        return frozenset({f.name})
    if isinstance(f, (Next, WeakNext)):
        return frozenset()
    out: frozenset[str] = frozenset()
    for c in f.children:
        out |= _now_atoms(c)
    return out


@lru_cache(maxsize=None)
def _prog(f: Formula, letter: frozenset[str]) -> State:
    """Obligations left for the remaining trace after reading ``letter``.

    ``letter`` must be restricted to ``_now_atoms(f)`` for cache efficiency.
    """
    if isinstance(f, TrueF):
        return TOP
    if isinstance(f, FalseF):
        return BOTTOM
    if isinstance(f, Atom):
        return TOP if f.name in letter else BOTTOM
    if isinstance(f, Next):
        return _term(True, f.operand)
    if isinstance(f, WeakNext):
        return _term(False, f.operand)

    def sub(g: Formula) -> State:
        return _prog(g, letter & _now_atoms(g))

    if isinstance(f, Not):
        return _negate(sub(f.operand))
    if isinstance(f, And):
        return _and(sub(f.left), sub(f.right))
    if isinstance(f, Or):
        return _or(sub(f.left), sub(f.right))
    if isinstance(f, Implies):
        return _or(_negate(sub(f.left)), sub(f.right))
    if isinstance(f, Until):
        return _or(sub(f.right), _and(sub(f.left), _term(True, f)))
    if isinstance(f, Eventually):
        return _or(sub(f.operand), _term(True, f))
    if isinstance(f, Always):
        return _and(sub(f.operand), _term(False, f))
    raise TypeError(f"unknown formula node {f!r}")


def _progress(state: State, letter: frozenset[str]) -> State:
    result = BOTTOM
    for clause in state:
        conj = TOP
        for _, f in clause:
            conj = _and(conj, _prog(f, letter & _now_atoms(f)))
            if not conj:
                break
        result = _or(result, conj)
        if result == TOP:
            break
    return result


def _is_final(state: State) -> bool:
    return any(all(not strong for strong, _ in clause) for clause in state)


def _state_atoms(state: State) -> frozenset[str]:
    out: frozenset[str] = frozenset()
    for clause in state:
        for _, f in clause:
            out |= _now_atoms(f)
    return out


# ---------------------------------------------------------------------------
# Guards

@dataclass(frozen=True)
class Guard:
    """Propositional condition over a DFA's support fluents.

    ``letters`` holds the satisfying assignments projected onto ``support``
    (bit ``j`` of a letter is fluent ``support[j]``).
    """

    fluents: FluentSet
    support: tuple[int, ...]
    letters: frozenset[int]

    def holds(self, assignment: int | Iterable[str]) -> bool:
        if not isinstance(assignment, int):
            assignment = self.fluents.mask(assignment)
        return _project(assignment, self.support) in self.letters

    def __str__(self) -> str:
        names = [self.fluents.names[i] for i in self.support]
        return _sop_text(self.letters, names)


def _project(mask: int, support: Sequence[int]) -> int:
    letter = 0
    for j, idx in enumerate(support):
        if mask >> idx & 1:
            letter |= 1 << j
    return letter


def _sop_text(minterms: frozenset[int], names: list[str]) -> str:
    k = len(names)
    if len(minterms) == 1 << k:
        return "true"
    if not minterms:
        return "false"
    full = (1 << k) - 1
    # Quine-McCluskey: implicants are (value, care) pairs.
    level = {(m, full) for m in minterms}
    primes: set[tuple[int, int]] = set()
    while level:
        merged: set[tuple[int, int]] = set()
        used: set[tuple[int, int]] = set()
        for (v1, c1), (v2, c2) in itertools.combinations(sorted(level), 2):
            diff = v1 ^ v2
            if c1 == c2 and diff and diff & (diff - 1) == 0:
                merged.add((v1 & ~diff, c1 & ~diff))
                used.update({(v1, c1), (v2, c2)})
        primes |= level - used
        level = merged

    def covers(p, m):
        return m & p[1] == p[0]

    uncovered = set(minterms)
    cover = []
    while uncovered:
        best = max(sorted(primes), key=lambda p: (sum(covers(p, m) for m in uncovered),
                                                 -bin(p[1]).count("1")))
        cover.append(best)
        uncovered = {m for m in uncovered if not covers(best, m)}

    cubes = []
    for value, care in sorted(cover, key=lambda p: (-(p[1]), p[0])):
        lits = [(n if value >> j & 1 else "!" + n)
                for j, n in enumerate(names) if care >> j & 1]
        cubes.append(lits[0] if len(lits) == 1 else "(" + " & ".join(lits) + ")")
    return " | ".join(cubes)


# ---------------------------------------------------------------------------
# DFA

class Dfa:
    """Total deterministic automaton over assignments of ``fluents``.

    Only fluents in ``support`` influence transitions. ``table[q][letter]``
    is the successor of state ``q``; states are numbered breadth-first from
    ``initial`` (which is always 0 for compiled and minimized DFAs).
    """

    def __init__(self, fluents: FluentSet, support: Sequence[int],
                 table: Sequence[Sequence[int]], initial: int, finals: Iterable[int]):
        self.fluents = fluents
        self.support = tuple(support)
        self.table = tuple(tuple(row) for row in table)
        self.initial = initial
        self.finals = frozenset(finals)
        n = len(self.table)
        width = 1 << len(self.support)
        if not 0 <= initial < n:
            raise DfaError("initial state out of range")
        for q, row in enumerate(self.table):
            if len(row) != width:
                raise DfaError(f"state {q} has {len(row)} transitions, expected {width}")
            if any(not 0 <= t < n for t in row):
                raise DfaError(f"state {q} has a successor out of range")
        if any(not 0 <= q < n for q in self.finals):
            raise DfaError("final state out of range")
        self._letters: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.table)

    @property
    def num_states(self) -> int:
        return len(self.table)

    @property
    def states(self) -> range:
        return range(len(self.table))

    def letter(self, assignment: int) -> int:
        letter = self._letters.get(assignment)
        if letter is None:
            letter = self._letters[assignment] = _project(assignment, self.support)
        return letter

    def step(self, q: int, assignment: int | Iterable[str]) -> int:
        if not isinstance(assignment, int):
            assignment = self.fluents.mask(assignment)
        return self.table[q][self.letter(assignment)]

    def run(self, trace: Iterable[int | Iterable[str]]) -> list[int]:
        q = self.initial
        out = [q]
        for a in trace:
            q = self.step(q, a)
            out.append(q)
        return out

    def accepts(self, trace: Sequence[int | Iterable[str]]) -> bool:
        """Whether the run on ``trace`` ends in a final state."""
        if not trace:
            raise ValueError("LTLf traces are nonempty")
        for a in trace:
            if not isinstance(a, int) and not set(a) <= set(self.fluents.names):
                raise ValueError(f"assignment {sorted(a)} uses fluents outside the DFA's")
        return self.run(trace)[-1] in self.finals

    def guards(self, q: int) -> list[tuple[Guard, int]]:
        """Guard list of state ``q``, ordered by successor."""
        by_succ: dict[int, set[int]] = {}
        for letter, t in enumerate(self.table[q]):
            by_succ.setdefault(t, set()).add(letter)
        return [(Guard(self.fluents, self.support, frozenset(ls)), t)
                for t, ls in sorted(by_succ.items())]

    @property
    def transitions(self) -> list[list[tuple[Guard, int]]]:
        return [self.guards(q) for q in self.states]

    # -- export ------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "fluents": list(self.fluents.names),
            "states": list(self.states),
            "initial": self.initial,
            "finals": sorted(self.finals),
            "transitions": [{"from": q, "guard": str(g), "to": t}
                            for q in self.states for g, t in self.guards(q)],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data: dict) -> "Dfa":
        fluents = FluentSet(data["fluents"])
        edges = [(e["from"], ltlf.parse(e["guard"], fluents), e["to"])
                 for e in data["transitions"]]
        for _, g, _ in edges:
            if any(not isinstance(s, (Atom, Not, And, Or, Implies, TrueF, FalseF))
                   for s in ltlf.subformulas(g)):
                raise DfaError(f"guard {g} is not propositional")
        used = set()
        for _, g, _ in edges:
            used |= ltlf.atoms(g)
        support = tuple(sorted(fluents.index(n) for n in used))
        n = max([data["initial"], *data.get("finals", []), *(q for q, _, t in edges),
                 *(t for _, _, t in edges), len(data.get("states", [])) - 1]) + 1
        table = []
        for q in range(n):
            row = []
            for letter in range(1 << len(support)):
                names = {fluents.names[idx] for j, idx in enumerate(support) if letter >> j & 1}
                hits = [t for src, g, t in edges if src == q and ltlf.evaluate(g, [names])]
                if len(hits) != 1:
                    raise DfaError(f"state {q}: {len(hits)} guards match {sorted(names)}")
                row.append(hits[0])
            table.append(row)
        return cls(fluents, support, table, data["initial"], data["finals"])

    def to_dot(self) -> str:
        lines = ["digraph dfa {", "  rankdir=LR;", '  init [shape=point];']
        for q in self.states:
            shape = "doublecircle" if q in self.finals else "circle"
            lines.append(f'  q{q} [shape={shape}, label="{q}"];')
        lines.append(f"  init -> q{self.initial};")
        for q in self.states:
            for g, t in self.guards(q):
                lines.append(f'  q{q} -> q{t} [label="{g}"];')
        lines.append("}")
        return "\n".join(lines)


def _bfs_renumber(table, initial, finals, fluents, support) -> Dfa:
    order = {initial: 0}
    queue = deque([initial])
    while queue:
        q = queue.popleft()
        for t in table[q]:
            if t not in order:
                order[t] = len(order)
                queue.append(t)
    new_table = [None] * len(order)
    for q, i in order.items():
        new_table[i] = [order[t] for t in table[q]]
    return Dfa(fluents, support, new_table, 0, [order[q] for q in finals if q in order])


def minimize(d: Dfa) -> Dfa:
    """Language-equivalent DFA with no two equivalent states (Moore refinement)."""
    n = d.num_states
    block = [1 if q in d.finals else 0 for q in range(n)]
    count = len(set(block))
    while True:
        sigs: dict[tuple, int] = {}
        new_block = []
        for q in range(n):
            sig = (block[q], tuple(block[t] for t in d.table[q]))
            new_block.append(sigs.setdefault(sig, len(sigs)))
        block = new_block
        if len(sigs) == count:
            break
        count = len(sigs)
    reps: dict[int, int] = {}
    for q in range(n):
        reps.setdefault(block[q], q)
    table = {b: [block[t] for t in d.table[q]] for b, q in reps.items()}
    finals = {block[q] for q in d.finals}
    return _bfs_renumber(table, block[d.initial], finals, d.fluents, d.support)


def compile(f: Formula, fluents: FluentSet | Iterable[str], *,
            minimized: bool = True, cap: int | None = None) -> Dfa:
    """DFA accepting exactly the nonempty traces over ``fluents`` satisfying ``f``."""
    if not isinstance(fluents, FluentSet):
        fluents = FluentSet(fluents)
    undeclared = ltlf.atoms(f) - set(fluents.names)
    if undeclared:
        raise ValueError(f"formula uses undeclared fluents {sorted(undeclared)}")
    cap = state_cap(cap)
    support = tuple(sorted(fluents.index(n) for n in ltlf.atoms(f)))
    support_names = [fluents.names[i] for i in support]
    width = 1 << len(support)

    start: State = _term(True, f)
    ids = {start: 0}
    states = [start]
    table: list[list[int]] = []
    i = 0
    while i < len(states):
        state = states[i]
        i += 1
        local = sorted(_state_atoms(state), key=support_names.index)
        positions = [support_names.index(a) for a in local]
        succ_by_local = []
        for bits in range(1 << len(local)):
            letter = frozenset(a for j, a in enumerate(local) if bits >> j & 1)
            nxt = _progress(state, letter)
            if nxt not in ids:
                if len(states) >= cap:
                    raise StateBudgetExceeded("DFA construction", cap)
                ids[nxt] = len(states)
                states.append(nxt)
            succ_by_local.append(ids[nxt])
        row = []
        for letter in range(width):
            bits = 0
            for j, p in enumerate(positions):
                if letter >> p & 1:
                    bits |= 1 << j
            row.append(succ_by_local[bits])
        table.append(row)
    finals = [q for q, s in enumerate(states) if _is_final(s)]
    d = Dfa(fluents, support, table, 0, finals)
    if not minimized:
        return d
    best = minimize(d)
    if all(0 not in row for row in table):
        # Only the empty trace ends in an unreentered initial state, so its
        # finality is free; take whichever choice minimizes further.
        alt = minimize(Dfa(fluents, support, table, 0, {0, *finals}))
        if alt.num_states < best.num_states:
            best = alt
    return best


def accepts(d: Dfa, trace: Sequence[Iterable[str]]) -> bool:
    return d.accepts(trace)


def step(d: Dfa, q: int, assignment: int | Iterable[str]) -> int:
    return d.step(q, assignment)
