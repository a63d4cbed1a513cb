"""Game arenas: the synchronized product of a completed domain and a goal DFA."""

from __future__ import annotations

from typing import Iterable, Sequence

from .dfa import Dfa, state_cap
from .domain import AG_ERR, ENV_ERR, ERROR_STATES, CompletedDomain, state_label
from .errors import StateBudgetExceeded


class Arena:
    """Deterministic transition system over ``Act x React``.

    States are dense ids ``0..n-1``; ``succ[t][a * R + r]`` is the successor
    of ``t`` under action ``a`` and reaction ``r``. ``enabled[t]`` lists the
    actions the agent may legally take at ``t``; positional strategies
    default to the smallest of them. Composed arenas also carry the domain
    and DFA parts of every state and the marked sets used by the games.
    """

    def __init__(self, succ: Sequence[Sequence[int]], n_actions: int, n_reactions: int, *,
                 initial: int = 0, enabled: Sequence[Sequence[int]] | None = None,
                 actions: Sequence[str] | None = None, reactions: Sequence[str] | None = None,
                 r_prime: Iterable[int] = (), s_ag_err: Iterable[int] = (),
                 s_env_err: Iterable[int] = (), pairs: Sequence[tuple[int, int]] | None = None,
                 domain=None, dfa: Dfa | None = None):
        self.succ = [tuple(row) for row in succ]
        self.n_actions = n_actions
        self.n_reactions = n_reactions
        self.initial = initial
        width = n_actions * n_reactions
        n = len(self.succ)
        for t, row in enumerate(self.succ):
            if len(row) != width or any(not 0 <= u < n for u in row):
                raise ValueError(f"arena state {t} has a malformed transition row")
        all_actions = tuple(range(n_actions))
        self.enabled = ([tuple(e) or all_actions for e in enabled] if enabled is not None
                        else [all_actions] * n)
        self.actions = tuple(actions) if actions else tuple(f"a{i}" for i in all_actions)
        self.reactions = (tuple(reactions) if reactions
                          else tuple(f"r{i}" for i in range(n_reactions)))
        self.r_prime = frozenset(r_prime)
        self.s_ag_err = frozenset(s_ag_err)
        self.s_env_err = frozenset(s_env_err)
        self.pairs = list(pairs) if pairs is not None else None
        self.index = {p: i for i, p in enumerate(self.pairs)} if self.pairs else None
        self.domain = domain
        self.dfa = dfa
        self._preds = None

    @classmethod
    def from_table(cls, table: Sequence[Sequence[Sequence[int]]], **kw) -> "Arena":
        """Arena from ``table[t][a][r]``; convenient for hand-written games."""
        n_actions = len(table[0])
        n_reactions = len(table[0][0])
        succ = [[table[t][a][r] for a in range(n_actions) for r in range(n_reactions)]
                for t in range(len(table))]
        return cls(succ, n_actions, n_reactions, **kw)

    def __len__(self) -> int:
        return len(self.succ)

    @property
    def num_states(self) -> int:
        return len(self.succ)

    @property
    def states(self) -> range:
        return range(len(self.succ))

    def successor(self, t: int, a: int, r: int) -> int:
        return self.succ[t][a * self.n_reactions + r]

    def successors(self, t: int, a: int) -> tuple[int, ...]:
        R = self.n_reactions
        return self.succ[t][a * R:(a + 1) * R]

    def predecessors(self) -> list[list[tuple[int, int]]]:
        """``preds[u]``: the ``(t, a)`` pairs with some reaction leading to ``u``.

        Each pair appears once per distinct successor.
        """
        if self._preds is None:
            preds: list[list[tuple[int, int]]] = [[] for _ in self.succ]
            for t in self.states:
                for a in range(self.n_actions):
                    for u in set(self.successors(t, a)):
                        preds[u].append((t, a))
            self._preds = preds
        return self._preds

    # -- Algorithm-1 objectives ---------------------------------------------

    @property
    def errors(self) -> frozenset[int]:
        return self.s_ag_err | self.s_env_err

    def adversarial_target(self) -> frozenset[int]:
        """``not S_ag_err and (S_env_err or R')``."""
        return (self.s_env_err | self.r_prime) - self.s_ag_err

    def cooperative_target(self) -> frozenset[int]:
        """``not S_ag_err and not S_env_err and R'``."""
        return self.r_prime - self.s_ag_err - self.s_env_err

    # -- presentation -------------------------------------------------------

    def label(self, t: int) -> str:
        if self.pairs is None:
            return str(t)
        s, q = self.pairs[t]
        return f"({state_label(self.domain, s)}, q{q})" if self.domain else f"({s}, q{q})"

    def to_dot(self, *, hide_errors: bool = False) -> str:
        lines = ["digraph arena {", '  init [shape=point];']
        shown = [t for t in self.states if not (hide_errors and t in self.errors)]
        for t in shown:
            attrs = ["shape=box"]
            if t in self.s_ag_err:
                attrs.append('color=red')
            elif t in self.s_env_err:
                attrs.append('color=orange')
            if t in self.r_prime:
                attrs.append('peripheries=2')
            lines.append(f'  t{t} [label="{self.label(t)}", {", ".join(attrs)}];')
        lines.append(f"  init -> t{self.initial};")
        keep = set(shown)
        for t in shown:
            edges: dict[int, list[str]] = {}
            for a in range(self.n_actions):
                for r, u in enumerate(self.successors(t, a)):
                    if u in keep and not (u == t and t in self.errors):
                        edges.setdefault(u, []).append(f"{self.actions[a]}/{self.reactions[r]}")
            for u, labels in edges.items():
                lines.append(f'  t{t} -> t{u} [label="{", ".join(labels)}"];')
        lines.append("}")
        return "\n".join(lines)


def compose(completed: CompletedDomain, dfa: Dfa, *, cap: int | None = None) -> Arena:
    """Reachable part of ``D+ o T_phi`` from ``(s0, step(q0, s0))``."""
    domain = completed.domain
    if dfa.fluents != domain.fluents:
        raise ValueError("DFA and domain are over different fluent sets")
    cap = state_cap(cap)
    A, R = len(domain.actions), len(domain.reactions)
    start = (domain.initial, dfa.step(dfa.initial, domain.initial))
    pairs = [start]
    index = {start: 0}
    succ: list[list[int]] = []
    enabled: list[tuple[int, ...]] = []

    def intern(p: tuple[int, int]) -> int:
        i = index.get(p)
        if i is None:
            if len(pairs) >= cap:
                raise StateBudgetExceeded("arena construction", cap)
            i = index[p] = len(pairs)
            pairs.append(p)
        return i

    i = 0
    while i < len(pairs):
        s, q = pairs[i]
        enabled.append(completed.enabled(s))
        if s in ERROR_STATES:
            succ.append([i] * (A * R))
            i += 1
            continue
        row = []
        ok_actions = set(domain.enabled(s))
        for a in range(A):
            if a not in ok_actions:
                row.extend([intern((AG_ERR, q))] * R)
                continue
            allowed = set(domain.allowed(s, a))
            for r in range(R):
                if r not in allowed:
                    row.append(intern((ENV_ERR, q)))
                else:
                    s2 = completed.step(s, a, r)
                    row.append(intern((s2, dfa.step(q, s2))))
        succ.append(row)
        i += 1

    finals = dfa.finals
    return Arena(succ, A, R, initial=0, enabled=enabled,
                 actions=domain.actions, reactions=domain.reactions,
                 r_prime=[t for t, (_, q) in enumerate(pairs) if q in finals],
                 s_ag_err=[t for t, (s, _) in enumerate(pairs) if s == AG_ERR],
                 s_env_err=[t for t, (s, _) in enumerate(pairs) if s == ENV_ERR],
                 pairs=pairs, domain=domain, dfa=dfa)


def project_to_domain_trace(arena: Arena, run: Sequence[int]) -> list[frozenset[str]]:
    """Domain parts of an error-free arena run starting at the initial state."""
    if not run or run[0] != arena.initial:
        raise ValueError("run must start at the arena's initial state")
    out = []
    for t in run:
        s, _ = arena.pairs[t]
        if s in ERROR_STATES:
            raise ValueError(f"run passes through error state {arena.label(t)}")
        out.append(arena.domain.names(s))
    return out
