"""Reachability and safety-reachability games on arenas.

The solvers run backward induction over precomputed predecessor lists,
one layer per fixpoint iteration, so each state's rank is the iteration at
which it joined the region and its strategy entry is a witnessing action of
that iteration (the smallest in declared order).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .arena import Arena


@dataclass(frozen=True)
class GameResult:
    region: frozenset[int]
    strategy: Mapping[int, int] = field(default_factory=dict)
    rank: Mapping[int, int] = field(default_factory=dict)

    def __contains__(self, t: int) -> bool:
        return t in self.region


def _solve(arena: Arena, target: Iterable[int], universal: bool,
           safe: frozenset[int] | None = None) -> GameResult:
    target = frozenset(target)
    if safe is not None:
        target &= safe
    preds = arena.predecessors()
    A = arena.n_actions
    rank: dict[int, int] = {t: 0 for t in target}
    strategy: dict[int, int] = {t: min(arena.enabled[t]) for t in target}
    if universal:
        pending = [[len(set(arena.successors(t, a))) for a in range(A)] for t in arena.states]
    frontier = sorted(target)
    level = 0
    while frontier:
        level += 1
        witnesses: dict[int, set[int]] = {}
        for u in frontier:
            for t, a in preds[u]:
                if t in rank or (safe is not None and t not in safe):
                    continue
                if universal:
                    pending[t][a] -= 1
                    if pending[t][a] == 0:
                        witnesses.setdefault(t, set()).add(a)
                else:
                    witnesses.setdefault(t, set()).add(a)
        frontier = sorted(witnesses)
        for t in frontier:
            rank[t] = level
            strategy[t] = min(witnesses[t])
    return GameResult(frozenset(rank), strategy, rank)


def solve_adversarial_reach(arena: Arena, target: Iterable[int]) -> GameResult:
    """States from which the agent forces a visit to ``target`` against every reaction."""
    return _solve(arena, target, universal=True)


def solve_cooperative_reach(arena: Arena, target: Iterable[int]) -> GameResult:
    """States from which some reaction sequence reaches ``target`` under the agent's choice."""
    return _solve(arena, target, universal=False)


def solve_adversarial_safe_reach(arena: Arena, safe: Iterable[int],
                                 target: Iterable[int]) -> frozenset[int]:
    """Force reaching ``target`` while only ``safe`` states are visited up to and including it."""
    return _solve(arena, target, universal=True, safe=frozenset(safe)).region


def solve_cooperative_safe_reach(arena: Arena, safe: Iterable[int],
                                 target: Iterable[int]) -> frozenset[int]:
    return _solve(arena, target, universal=False, safe=frozenset(safe)).region


def check_safe_reach_lemma(arena: Arena) -> list[str]:
    """Compare safety-reachability regions with the reduced reachability ones.

    On composed arenas (absorbing error states) both pairs coincide; the
    returned list describes any difference and is empty otherwise.
    """
    states = frozenset(arena.states)
    not_ag = states - arena.s_ag_err
    problems = []
    adv_safe = solve_adversarial_safe_reach(arena, not_ag, arena.s_env_err | arena.r_prime)
    adv = solve_adversarial_reach(arena, arena.adversarial_target()).region
    if adv_safe != adv:
        problems.append(f"adversarial: SafeReach-only {sorted(adv_safe - adv)}, "
                        f"Reach-only {sorted(adv - adv_safe)}")
    coop_safe = solve_cooperative_safe_reach(arena, not_ag - arena.s_env_err, arena.r_prime)
    coop = solve_cooperative_reach(arena, arena.cooperative_target()).region
    if coop_safe != coop:
        problems.append(f"cooperative: SafeReach-only {sorted(coop_safe - coop)}, "
                        f"Reach-only {sorted(coop - coop_safe)}")
    return problems


def attractor_under(arena: Arena, kappa: Sequence[int] | Mapping[int, int],
                    target: Iterable[int], *, universal: bool = True,
                    allowed: Callable[[int, int], Iterable[int]] | None = None) -> frozenset[int]:
    """Least fixpoint of ``target`` under the fixed positional strategy ``kappa``.

    With ``universal`` a state joins when every reaction (restricted to
    ``allowed(t, action)`` if given) leads into the set; otherwise when some
    reaction does.
    """
    inside = set(target)
    rows: list[frozenset[int]] = []
    rev: list[list[int]] = [[] for _ in arena.states]
    for t in arena.states:
        a = kappa[t]
        rs = range(arena.n_reactions) if allowed is None else allowed(t, a)
        row = frozenset(arena.successor(t, a, r) for r in rs)
        rows.append(row)
        for u in row:
            rev[u].append(t)
    missing = [len(row) for row in rows]
    queue = list(inside)
    while queue:
        u = queue.pop()
        for t in rev[u]:
            if t in inside:
                continue
            missing[t] -= 1
            if not universal or missing[t] == 0:
                inside.add(t)
                queue.append(t)
    return frozenset(inside)
