"""Executing plays of a synthesized strategy against environment policies."""

from __future__ import annotations

import random
import sys
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, TextIO

from . import ltlf
from .best_effort import BestEffortStrategy
from .domain import Domain, is_legal_trace
from .errors import ScriptError
from .games import attractor_under
from .ltlf import Formula

GOAL_REACHED = "goalReached"
MAX_STEPS = "maxSteps"
INTERACTIVE_QUIT = "interactiveQuit"


@dataclass(frozen=True)
class StepContext:
    """What an environment policy sees when choosing a reaction."""

    domain: Domain
    strategy: BestEffortStrategy
    step: int
    state: int           # domain state mask
    action: int          # action index just chosen by the agent
    arena_state: int

    @property
    def legal(self) -> tuple[int, ...]:
        return self.domain.allowed(self.state, self.action)

    @property
    def state_names(self) -> frozenset[str]:
        return self.domain.names(self.state)

    @property
    def action_name(self) -> str:
        return self.domain.actions[self.action]


class QuitSession(Exception):
    """Raised by an interactive policy when the user quits."""


class EnvPolicy:
    kind = "abstract"

    def reset(self, strategy: BestEffortStrategy) -> None:
        pass

    def choose(self, ctx: StepContext) -> int:
        raise NotImplementedError


class ScriptedPolicy(EnvPolicy):
    """Consumes reaction names in order; each must be legal where it is used."""

    kind = "scripted"

    def __init__(self, reactions: Sequence[str]):
        self.reactions = list(reactions)
        self.pos = 0

    def reset(self, strategy):
        self.pos = 0

    def choose(self, ctx):
        if self.pos >= len(self.reactions):
            raise ScriptError(f"script exhausted after {self.pos} reactions")
        name = self.reactions[self.pos]
        r = ctx.domain.reaction_index.get(name)
        if r is None or r not in ctx.legal:
            raise ScriptError(f"step {ctx.step}: reaction {name!r} not allowed for "
                              f"{ctx.action_name} in {sorted(ctx.state_names)}")
        self.pos += 1
        return r


class RandomPolicy(EnvPolicy):
    kind = "random"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.rng = random.Random(seed)

    def reset(self, strategy):
        self.rng = random.Random(self.seed)

    def choose(self, ctx):
        return self.rng.choice(ctx.legal)


class AdversarialOraclePolicy(EnvPolicy):
    """Keeps the play away from the goal whenever the fixed strategy allows it.

    The states from which every legal environment reply under kappa
    eventually hits the goal form a universal attractor; the policy picks
    the first legal reaction leading outside it, or the first legal one
    when there is no escape.
    """

    kind = "adversarial"

    def __init__(self):
        self._forced: frozenset[int] | None = None
        self._for = None

    def reset(self, strategy):
        arena, domain = strategy.arena, strategy.domain

        def legal(t, a):
            s, _ = arena.pairs[t]
            return domain.allowed(s, a) if t not in arena.errors else range(arena.n_reactions)

        self._forced = attractor_under(arena, strategy.kappa, arena.cooperative_target(),
                                       universal=True, allowed=legal)
        self._for = strategy

    def choose(self, ctx):
        if self._for is not ctx.strategy:
            self.reset(ctx.strategy)
        arena = ctx.strategy.arena
        for r in ctx.legal:
            if arena.successor(ctx.arena_state, ctx.action, r) not in self._forced:
                return r
        return ctx.legal[0]


class InteractivePolicy(EnvPolicy):
    """Line-oriented menu: the human types the number of a reaction, or ``q``."""

    kind = "interactive"

    def __init__(self, stdin: TextIO | None = None, stdout: TextIO | None = None):
        self.stdin = stdin
        self.stdout = stdout

    def _read(self) -> str:
        line = (self.stdin or sys.stdin).readline()
        if not line:
            raise QuitSession
        return line.strip()

    def choose(self, ctx):
        out = self.stdout or sys.stdout
        d = ctx.domain
        print(f"step {ctx.step}: state {{{', '.join(sorted(ctx.state_names))}}}", file=out)
        print(f"agent does {ctx.action_name}", file=out)
        for i, r in enumerate(ctx.legal, start=1):
            print(f"  {i}) {d.reactions[r]}", file=out)
        while True:
            print("reaction> ", end="", file=out, flush=True)
            text = self._read()
            if text.lower() in ("q", "quit"):
                raise QuitSession
            if text.isdigit() and 1 <= int(text) <= len(ctx.legal):
                return ctx.legal[int(text) - 1]
            print(f"enter a number between 1 and {len(ctx.legal)}, or q", file=out)


@dataclass
class PlayRecord:
    domain: Domain
    states: list[int] = field(default_factory=list)
    actions: list[str] = field(default_factory=list)
    reactions: list[str] = field(default_factory=list)
    arena_states: list[int] = field(default_factory=list)
    satisfied_at_step: int | None = None
    stop_reason: str = MAX_STEPS

    @property
    def trace(self) -> list[frozenset[str]]:
        return [self.domain.names(s) for s in self.states]

    def to_json(self) -> dict:
        f = self.domain.fluents
        return {
            "states": [sorted(n, key=f.index) for n in self.trace],
            "actions": list(self.actions),
            "reactions": list(self.reactions),
            "satisfiedAtStep": self.satisfied_at_step,
            "stopReason": self.stop_reason,
        }


def play(strategy: BestEffortStrategy, policy: EnvPolicy | Callable[[StepContext], int], *,
         max_steps: int | None = None, stop_at_goal: bool = True) -> PlayRecord:
    """Run the unique play of the induced strategy against ``policy``.

    ``satisfiedAtStep`` is the index of the first trace position whose
    prefix satisfies the goal, read off the DFA component of the arena.
    """
    arena, domain, kappa = strategy.arena, strategy.domain, strategy.kappa
    if max_steps is None:
        max_steps = 10 * arena.num_states
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    choose = policy.choose if isinstance(policy, EnvPolicy) else policy
    if isinstance(policy, EnvPolicy):
        policy.reset(strategy)
    targets = arena.cooperative_target()
    t = arena.initial
    s = domain.initial
    rec = PlayRecord(domain, states=[s], arena_states=[t])
    if t in targets:
        rec.satisfied_at_step = 0
        if stop_at_goal:
            rec.stop_reason = GOAL_REACHED
            return rec
    for k in range(max_steps):
        a = kappa[t]
        try:
            r = choose(StepContext(domain, strategy, k, s, a, t))
        except QuitSession:
            rec.stop_reason = INTERACTIVE_QUIT
            return rec
        if r not in domain.allowed(s, a):
            raise ScriptError(f"step {k}: policy emitted illegal reaction "
                              f"{domain.reactions[r]!r}")
        s = domain.successor(s, a, r)
        t = arena.successor(t, a, r)
        rec.actions.append(domain.actions[a])
        rec.reactions.append(domain.reactions[r])
        rec.states.append(s)
        rec.arena_states.append(t)
        if rec.satisfied_at_step is None and t in targets:
            rec.satisfied_at_step = len(rec.states) - 1
            if stop_at_goal:
                rec.stop_reason = GOAL_REACHED
                return rec
    rec.stop_reason = MAX_STEPS
    return rec


def satisfied_in_domain(trace: Sequence[Iterable[str]], formula: Formula) -> int | None:
    """Smallest ``k`` such that the prefix ``trace[0..k]`` satisfies ``formula``."""
    trace = [frozenset(s) for s in trace]
    for k in range(len(trace)):
        if ltlf.evaluate(formula, trace[:k + 1], 0):
            return k
    return None


def record_is_legal(rec: PlayRecord) -> bool:
    """Every prefix of the recorded trace is a legal domain trace."""
    trace = rec.trace
    return all(is_legal_trace(rec.domain, trace[:k]) for k in range(1, len(trace) + 1))


def interactive_session(strategy: BestEffortStrategy, *, max_steps: int | None = None,
                        stdin: TextIO | None = None, stdout: TextIO | None = None,
                        stop_at_goal: bool = True) -> PlayRecord:
    out = stdout or sys.stdout
    rec = play(strategy, InteractivePolicy(stdin, stdout), max_steps=max_steps,
               stop_at_goal=stop_at_goal)
    final = ", ".join(sorted(rec.trace[-1]))
    print(f"final state {{{final}}}; {rec.stop_reason}", file=out)
    if rec.satisfied_at_step is not None:
        print(f"goal satisfied at step {rec.satisfied_at_step}", file=out)
    return rec


def cooperate_punish_cooperate(strategy: BestEffortStrategy, *, cooperative: str | None = None,
                               limit: int | None = None) -> list[str]:
    """Reaction script that cooperates, interferes once just before success, then cooperates.

    The interference is the first legal non-cooperative reaction at the
    first step where cooperating would complete the goal. The script is
    built by dry-running the strategy, so it has exactly the length the
    play needs.
    """
    arena, domain, kappa = strategy.arena, strategy.domain, strategy.kappa
    coop = domain.reaction_index[cooperative] if cooperative else 0
    targets = arena.cooperative_target()
    limit = limit or 10 * arena.num_states
    script: list[str] = []
    punished = False
    t, s = arena.initial, domain.initial
    if t in targets:
        return script
    for _ in range(limit):
        a = kappa[t]
        legal = domain.allowed(s, a)
        r = coop if coop in legal else legal[0]
        if not punished and arena.successor(t, a, r) in targets:
            others = [x for x in legal if x != r]
            if others:
                r = others[0]
                punished = True
        script.append(domain.reactions[r])
        s = domain.successor(s, a, r)
        t = arena.successor(t, a, r)
        if t in targets:
            return script
    raise ScriptError("cooperating after the interference did not reach the goal")
