"""Best-effort synthesis: solve both reachability games and combine the strategies."""

from __future__ import annotations

import json
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from . import ltlf
from .arena import Arena, compose
from .dfa import Dfa, compile as compile_dfa
from .domain import AG_ERR, ENV_ERR, Domain, complete_domain, validate_domain
from .errors import HistoryError, ValidationFailed
from .games import GameResult, attractor_under, solve_adversarial_reach, solve_cooperative_reach
from .ltlf import Formula

MODES = ("bestEffort", "adversarialOnly", "cooperativeOnly")
STEPS = ("dfa", "arena", "adv", "coop", "combine")


@dataclass
class BestEffortStrategy:
    """Positional strategy ``kappa`` over the arena, plus the regions it was built from."""

    domain: Domain
    goal: Formula
    dfa: Dfa
    arena: Arena
    kappa: list[int]
    adv: GameResult | None
    coop: GameResult | None
    classification: str
    mode: str = "bestEffort"
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def w_adv(self) -> frozenset[int]:
        return self.adv.region if self.adv else frozenset()

    @property
    def w_coop(self) -> frozenset[int]:
        return self.coop.region if self.coop else frozenset()

    def region_of(self, t: int) -> str:
        if t in self.w_adv:
            return "adv"
        if t in self.w_coop:
            return "coop"
        return "none"

    def value(self, t: int) -> int:
        """+1 (winning), 0 (pending) or -1 (losing) for the histories ending at ``t``."""
        return {"adv": 1, "coop": 0, "none": -1}[self.region_of(t)]

    def action(self, t: int) -> str:
        return self.domain.actions[self.kappa[t]]

    def replay(self, history: Sequence[Iterable[str] | int]) -> int:
        """Arena state reached by following the strategy along ``history``."""
        d = self.domain
        masks = [h if isinstance(h, int) else d.state(h) for h in history]
        if not masks or masks[0] != d.initial:
            raise HistoryError("history must start at the initial state")
        t = self.arena.initial
        for i, nxt in enumerate(masks[1:], start=1):
            s, _ = self.arena.pairs[t]
            a = self.kappa[t]
            for r in d.allowed(s, a):
                if d.successor(s, a, r) == nxt:
                    t = self.arena.successor(t, a, r)
                    break
            else:
                raise HistoryError(f"step {i}: no legal reaction to {d.actions[a]} leads to "
                                   f"{sorted(d.names(nxt))}")
        return t

    def act(self, history: Sequence[Iterable[str] | int]) -> str:
        """The induced strategy: action prescribed after ``history``."""
        return self.action(self.replay(history))

    __call__ = act

    def tracker(self) -> "Tracker":
        return Tracker(self)

    def table(self) -> dict[tuple, str]:
        return {_key(self.arena, t): self.action(t) for t in self.arena.states}

    def to_json(self) -> dict:
        arena = self.arena
        return {
            "classification": self.classification,
            "mode": self.mode,
            "goal": str(self.goal),
            "fluents": list(self.domain.fluents.names),
            "actions": list(self.domain.actions),
            "initial": state_json(arena, arena.initial),
            "table": [dict(state_json(arena, t), action=self.action(t),
                           region=self.region_of(t)) for t in arena.states],
            "wAdv": [state_json(arena, t) for t in sorted(self.w_adv)],
            "wCoop": [state_json(arena, t) for t in sorted(self.w_coop)],
        }

    def export(self, path: str | Path, format: str = "json") -> None:
        if format != "json":
            raise ValueError(f"unknown export format {format!r}")
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")


class Tracker:
    """Incremental replay of the induced strategy during a play."""

    def __init__(self, strategy: BestEffortStrategy):
        self.strategy = strategy
        self.t = strategy.arena.initial

    @property
    def action(self) -> str:
        return self.strategy.action(self.t)

    def advance(self, reaction: str) -> int:
        s = self.strategy
        self.t = s.arena.successor(self.t, s.kappa[self.t], s.domain.reaction_index[reaction])
        return self.t


def state_json(arena: Arena, t: int) -> dict:
    s, q = arena.pairs[t]
    if s == AG_ERR:
        ds = "agErr"
    elif s == ENV_ERR:
        ds = "envErr"
    else:
        d = arena.domain
        ds = sorted(d.names(s), key=d.fluents.index)
    return {"domainState": ds, "dfaState": q}


def _key(arena: Arena, t: int) -> tuple:
    js = state_json(arena, t)
    ds = js["domainState"]
    return (ds if isinstance(ds, str) else frozenset(ds), js["dfaState"])


def load_strategy_table(path: str | Path) -> dict[tuple, str]:
    """Read an exported strategy back as ``{(domainState, dfaState): action}``."""
    data = json.loads(Path(path).read_text())
    out = {}
    for row in data["table"]:
        ds = row["domainState"]
        out[(ds if isinstance(ds, str) else frozenset(ds), row["dfaState"])] = row["action"]
    return out


def synthesize(domain: Domain, goal: Formula | str, *, mode: str = "bestEffort",
               validate: str | None = "reachable", cap: int | None = None) -> BestEffortStrategy:
    """Run the six synthesis steps and return the combined positional strategy.

    ``mode`` selects the full best-effort pipeline or one of the single-game
    baselines used for overhead measurements.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if isinstance(goal, str):
        goal = ltlf.parse(goal, domain.fluents)
    elif ltlf.atoms(goal) - set(domain.fluents.names):
        raise ValueError("goal mentions fluents outside the domain")
    if validate:
        report = validate_domain(domain, validate)
        if not report.ok:
            raise ValidationFailed(report)

    timings = {}
    clock = time.perf_counter()

    def lap(step):
        nonlocal clock
        now = time.perf_counter()
        timings[step] = (now - clock) * 1000.0
        clock = now

    dfa = compile_dfa(goal, domain.fluents, cap=cap)
    completed = complete_domain(domain)
    lap("dfa")
    arena = compose(completed, dfa, cap=cap)
    lap("arena")
    adv = coop = None
    if mode != "cooperativeOnly":
        adv = solve_adversarial_reach(arena, arena.adversarial_target())
    lap("adv")
    if mode != "adversarialOnly":
        coop = solve_cooperative_reach(arena, arena.cooperative_target())
    lap("coop")
    kappa = combine(arena, adv, coop)
    lap("combine")
    timings["total"] = sum(timings[s] for s in STEPS)

    t0 = arena.initial
    if mode == "bestEffort":
        cls = "winning" if t0 in adv else "pending" if t0 in coop else "losing"
    elif mode == "adversarialOnly":
        cls = "winning" if t0 in adv else "unrealizable"
    else:
        cls = "cooperative" if t0 in coop else "losing"
    return BestEffortStrategy(domain, goal, dfa, arena, kappa, adv, coop, cls, mode, timings)


def combine(arena: Arena, adv: GameResult | None, coop: GameResult | None) -> list[int]:
    """kappa_adv on W_adv, kappa_coop on W_coop minus W_adv, else the smallest legal action."""
    kappa = []
    for t in arena.states:
        if adv is not None and t in adv.region:
            kappa.append(adv.strategy[t])
        elif coop is not None and t in coop.region:
            kappa.append(coop.strategy[t])
        else:
            kappa.append(min(arena.enabled[t]))
    return kappa


# ---------------------------------------------------------------------------
# Verification

@dataclass
class VerificationReport:
    checked: int = 0
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"checked": self.checked, "violations": self.violations}


def kappa_reachable(strategy: BestEffortStrategy) -> list[int]:
    """Non-error arena states reachable from the initial state under kappa.

    These stand for the histories consistent with the induced strategy.
    """
    arena, kappa = strategy.arena, strategy.kappa
    seen = {arena.initial}
    order = [arena.initial]
    queue = deque(order)
    while queue:
        t = queue.popleft()
        for u in arena.successors(t, kappa[t]):
            if u not in seen and u not in arena.errors:
                seen.add(u)
                order.append(u)
                queue.append(u)
    return order


def verify_maximality(strategy: BestEffortStrategy) -> VerificationReport:
    """Check that every history consistent with kappa keeps its best value.

    Histories ending in W_adv must be won by all kappa-plays, those in
    W_coop minus W_adv by some kappa-play, and kappa must be legal
    everywhere along the way.
    """
    arena, kappa, domain = strategy.arena, strategy.kappa, strategy.domain
    report = VerificationReport()
    forced = attractor_under(arena, kappa, arena.adversarial_target(), universal=True)
    possible = attractor_under(arena, kappa, arena.cooperative_target(), universal=False)
    for t in kappa_reachable(strategy):
        report.checked += 1
        s, _ = arena.pairs[t]
        where = state_json(arena, t)
        a = kappa[t]
        if a not in domain.enabled(s):
            report.violations.append({"state": where, "kind": "illegal",
                                      "detail": f"{domain.actions[a]} not enabled"})
        if t in strategy.w_adv:
            if t not in forced:
                report.violations.append({
                    "state": where, "kind": "adversarial",
                    "detail": "winning history but some kappa-play misses the goal"})
        elif t in strategy.w_coop:
            if t not in possible:
                report.violations.append({
                    "state": where, "kind": "cooperative",
                    "detail": "pending history but no kappa-play reaches the goal"})
    return report


def check_case_split(strategy: BestEffortStrategy) -> list[int]:
    """Arena states where kappa departs from the three-way combination rule."""
    expected = combine(strategy.arena, strategy.adv, strategy.coop)
    return [t for t, (a, b) in enumerate(zip(strategy.kappa, expected)) if a != b]
