"""Independent reference computations used to cross-check the engine.

None of these share code with the solvers they check: game regions come
from enumerating every positional strategy, domain-level values from a
bounded search over histories evaluated with the direct trace semantics.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from besynth import ltlf


def brute_force_regions(arena, target, *, chunk=4096):
    """Adversarial and cooperative reachability regions by strategy enumeration.

    For every positional strategy the set of states from which all (resp.
    some) reaction sequences reach ``target`` is computed by iterating
    ``n`` times; the region is the union over strategies.
    """
    n, A, R = arena.num_states, arena.n_actions, arena.n_reactions
    succ = np.array([[list(arena.successors(t, a)) for a in range(A)] for t in range(n)],
                    dtype=np.int64)                                  # (n, A, R)
    goal = np.zeros(n, dtype=bool)
    goal[list(target)] = True
    adv = np.zeros(n, dtype=bool)
    coop = np.zeros(n, dtype=bool)
    rows = np.arange(n)
    strategies = itertools.product(range(A), repeat=n)
    while True:
        block = np.array(list(itertools.islice(strategies, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        nxt = succ[rows[None, :], block]                             # (S, n, R)
        S = block.shape[0]
        idx = np.arange(S)[:, None, None]
        w_all = np.broadcast_to(goal, (S, n)).copy()
        w_any = w_all.copy()
        for _ in range(n):
            w_all = w_all | w_all[idx, nxt].all(axis=2)
            w_any = w_any | w_any[idx, nxt].any(axis=2)
        adv |= w_all.any(axis=0)
        coop |= w_any.any(axis=0)
    return (frozenset(np.flatnonzero(adv).tolist()),
            frozenset(np.flatnonzero(coop).tolist()))


def forces_target(arena, strategy, start, target, horizon=None):
    """Every reaction sequence under ``strategy`` from ``start`` hits ``target`` within ``horizon``."""
    horizon = arena.num_states if horizon is None else horizon

    def go(t, k):
        if t in target:
            return True
        if k == 0:
            return False
        return all(go(u, k - 1) for u in set(arena.successors(t, strategy[t])))
    return go(start, horizon)


def some_play_hits(arena, strategy, start, target):
    """Breadth-first search over reactions under ``strategy``."""
    seen, frontier = {start}, [start]
    while frontier:
        if any(t in target for t in frontier):
            return True
        nxt = []
        for t in frontier:
            for u in arena.successors(t, strategy[t]):
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        frontier = nxt
    return False


class HistoryGame:
    """Goal values of domain histories by bounded search with direct evaluation.

    ``forced(h, k)``: the agent can make some prefix satisfy the goal within
    ``k`` more steps whatever legal reactions occur. ``possible(h, k)``:
    some legal continuation of length at most ``k`` does. Both are exact
    once ``k`` reaches the number of arena states, because positional
    arena strategies reach their targets within that many steps.
    """

    def __init__(self, domain, goal):
        self.d = domain
        self.goal = goal

    def _sat(self, trace):
        return ltlf.evaluate(self.goal, [self.d.names(s) for s in trace], 0)

    def _moves(self, s):
        d = self.d
        for a in d.enabled(s):
            yield a, [d.successor(s, a, r) for r in d.allowed(s, a)]

    def forced(self, history, k):
        @lru_cache(maxsize=None)
        def go(h, k):
            if any(self._sat(h[:i + 1]) for i in range(len(h))):
                return True
            if k == 0:
                return False
            return any(all(go(h + (t,), k - 1) for t in outs) for _, outs in self._moves(h[-1]))
        return go(tuple(history), k)

    def possible(self, history, k):
        @lru_cache(maxsize=None)
        def go(h, k):
            if any(self._sat(h[:i + 1]) for i in range(len(h))):
                return True
            if k == 0:
                return False
            return any(go(h + (t,), k - 1) for _, outs in self._moves(h[-1]) for t in outs)
        return go(tuple(history), k)

    def classify(self, k):
        h = (self.d.initial,)
        if self.forced(h, k):
            return "winning"
        if self.possible(h, k):
            return "pending"
        return "losing"
