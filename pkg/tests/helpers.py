"""Random instance generators shared by the test modules."""

from __future__ import annotations

import itertools
import random

from hypothesis import strategies as st

from besynth import ltlf
from besynth.arena import Arena
from besynth.domain import Domain
from besynth.ltlf import (FALSE, TRUE, Always, And, Atom, Eventually, Implies, Next, Not, Or,
                          Until, WeakNext)

UNARY = (Not, Next, WeakNext, Eventually, Always)
BINARY = (And, Or, Implies, Until)


def all_traces(fluents, max_len=4, min_len=1):
    """Every trace over ``fluents`` with length in ``[min_len, max_len]``."""
    letters = [frozenset(c) for k in range(len(fluents) + 1)
               for c in itertools.combinations(fluents, k)]
    for n in range(min_len, max_len + 1):
        yield from itertools.product(letters, repeat=n)


def random_formula(rng: random.Random, fluents, max_size=6, depth=4):
    """A formula with at most ``max_size`` distinct subformulas."""
    while True:
        f = _grow(rng, list(fluents), depth)
        if ltlf.size(f) <= max_size:
            return f


def _grow(rng, fluents, depth):
    roll = rng.random()
    if depth == 0 or roll < 0.3:
        pick = rng.random()
        if pick < 0.08:
            return TRUE
        if pick < 0.14:
            return FALSE
        return Atom(rng.choice(fluents))
    if roll < 0.65:
        return rng.choice(UNARY)(_grow(rng, fluents, depth - 1))
    return rng.choice(BINARY)(_grow(rng, fluents, depth - 1), _grow(rng, fluents, depth - 1))


def formulas(fluents=("p", "q", "r"), max_depth=4):
    """Hypothesis strategy for formulas over ``fluents``."""
    leaves = st.sampled_from([TRUE, FALSE]) | st.sampled_from(fluents).map(Atom)

    def extend(children):
        return (st.tuples(st.sampled_from(UNARY), children).map(lambda t: t[0](t[1]))
                | st.tuples(st.sampled_from(BINARY), children, children)
                .map(lambda t: t[0](t[1], t[2])))

    return st.recursive(leaves, extend, max_leaves=2 ** max_depth)


def random_domain(rng: random.Random, n_fluents=None, n_actions=None, n_reactions=None,
                  max_actions=3, max_reactions=3) -> Domain:
    """A domain satisfying the three rules on every state of ``2^F``.

    Each (state, action) pair gets between one and ``|React|`` allowed
    reactions whose successors are pairwise distinct.
    """
    n = n_fluents or rng.randint(1, 3)
    A = n_actions or rng.randint(1, max_actions)
    R = n_reactions or rng.randint(1, max_reactions)
    fluents = [f"f{i}" for i in range(n)]
    states = range(1 << n)
    alpha, beta, delta = {}, {}, {}
    for s in states:
        acts = rng.sample(range(A), rng.randint(1, A))
        alpha[s] = acts
        for a in acts:
            k = rng.randint(1, min(R, 1 << n))
            reas = rng.sample(range(R), k)
            targets = rng.sample(list(states), k)
            beta[(s, a)] = reas
            for r, t in zip(reas, targets):
                delta[(s, a, r)] = t
    return Domain(fluents, rng.choice(list(states)), [f"a{i}" for i in range(A)],
                  [f"r{i}" for i in range(R)], alpha, beta, delta)


def single_reaction_domain(rng: random.Random, n_fluents=None, n_actions=None) -> Domain:
    return random_domain(rng, n_fluents, n_actions, n_reactions=1)


def random_arena(rng: random.Random, max_states=8, max_actions=3, max_reactions=3) -> Arena:
    n = rng.randint(1, max_states)
    A = rng.randint(1, max_actions)
    R = rng.randint(1, max_reactions)
    succ = [[rng.randrange(n) for _ in range(A * R)] for _ in range(n)]
    return Arena(succ, A, R)


def random_target(rng: random.Random, n: int) -> frozenset[int]:
    return frozenset(t for t in range(n) if rng.random() < 0.3)


def goal_for(domain: Domain, rng: random.Random, max_size=4):
    return random_formula(rng, domain.fluents.names, max_size=max_size, depth=3)


def state_goal(domain: Domain, state: int):
    """``F`` of the full conjunction describing ``state``."""
    parts = [n if n in domain.names(state) else f"!{n}" for n in domain.fluents.names]
    return ltlf.parse("F (" + " & ".join(parts) + ")", domain.fluents)


def mutation_instances(rng: random.Random, count: int):
    """Instances likely to have winning states several steps from the goal.

    Mixes random goals with reach-a-state goals on domains that have few
    reactions, where the adversarial region is usually large.
    """
    for i in range(count):
        d = random_domain(rng, n_fluents=rng.randint(2, 3), max_reactions=2)
        if i % 3 == 0:
            yield d, goal_for(d, rng)
        else:
            yield d, state_goal(d, rng.choice(d.reachable_states()))
