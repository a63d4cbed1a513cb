"""Nondeterministic planning domains and their error-completed transition systems.

States are fluent bitmasks internally; the public helpers accept and return
``frozenset`` s of fluent names. Actions and reactions are referred to by
name at the API boundary and by their declared index inside the engine.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DomainSchemaError
from .ltlf import FluentSet

AG_ERR = -1
ENV_ERR = -2
ERROR_STATES = (AG_ERR, ENV_ERR)

_FIELDS = ("fluents", "initial", "actions", "reactions", "alpha", "beta", "delta")


class Domain:
    """``D = (2^F, s0, Act, React, alpha, beta, delta)`` with a partial ``delta``.

    ``alpha`` maps a state mask to the tuple of enabled action indices,
    ``beta`` maps ``(state, action)`` to the tuple of allowed reaction indices
    and ``delta`` maps ``(state, action, reaction)`` to the successor mask.
    Missing keys mean empty sets / undefined transitions.
    """

    def __init__(self, fluents: FluentSet | Iterable[str], initial: int,
                 actions: Sequence[str], reactions: Sequence[str],
                 alpha: Mapping[int, Iterable[int]],
                 beta: Mapping[tuple[int, int], Iterable[int]],
                 delta: Mapping[tuple[int, int, int], int]):
        self.fluents = fluents if isinstance(fluents, FluentSet) else FluentSet(fluents)
        self.initial = initial
        self.actions = tuple(actions)
        self.reactions = tuple(reactions)
        if len(set(self.actions)) != len(self.actions):
            raise DomainSchemaError("duplicate action names")
        if len(set(self.reactions)) != len(self.reactions):
            raise DomainSchemaError("duplicate reaction names")
        self._alpha = {s: tuple(sorted(set(a))) for s, a in alpha.items()}
        self._beta = {k: tuple(sorted(set(r))) for k, r in beta.items()}
        self._delta = dict(delta)
        self.action_index = {a: i for i, a in enumerate(self.actions)}
        self.reaction_index = {r: i for i, r in enumerate(self.reactions)}

    def __repr__(self) -> str:
        return (f"Domain(|F|={len(self.fluents)}, |Act|={len(self.actions)}, "
                f"|React|={len(self.reactions)})")

    # -- engine-level accessors (masks and indices) ------------------------

    def enabled(self, s: int) -> tuple[int, ...]:
        return self._alpha.get(s, ())

    def allowed(self, s: int, a: int) -> tuple[int, ...]:
        return self._beta.get((s, a), ())

    def successor(self, s: int, a: int, r: int) -> int | None:
        return self._delta.get((s, a, r))

    def listed_states(self) -> set[int]:
        """Every state mentioned in alpha, beta or delta."""
        out = {self.initial, *self._alpha}
        out.update(s for s, _ in self._beta)
        for (s, _, _), t in self._delta.items():
            out.update((s, t))
        return out

    def reachable_states(self) -> list[int]:
        """States reachable from ``s0`` through defined transitions, BFS order."""
        seen = {self.initial: None}
        queue = deque([self.initial])
        while queue:
            s = queue.popleft()
            for a in self.enabled(s):
                for r in self.allowed(s, a):
                    t = self.successor(s, a, r)
                    if t is not None and t not in seen:
                        seen[t] = None
                        queue.append(t)
        return list(seen)

    # -- name-level helpers ------------------------------------------------

    def state(self, names: Iterable[str]) -> int:
        return self.fluents.mask(names)

    def names(self, s: int) -> frozenset[str]:
        return self.fluents.names_of(s)

    def alpha(self, state: Iterable[str]) -> tuple[str, ...]:
        return tuple(self.actions[a] for a in self.enabled(self.state(state)))

    def beta(self, state: Iterable[str], action: str) -> tuple[str, ...]:
        a = self.action_index[action]
        return tuple(self.reactions[r] for r in self.allowed(self.state(state), a))

    def delta(self, state: Iterable[str], action: str, reaction: str) -> frozenset[str] | None:
        t = self.successor(self.state(state), self.action_index[action],
                           self.reaction_index[reaction])
        return None if t is None else self.names(t)

    @property
    def initial_state(self) -> frozenset[str]:
        return self.names(self.initial)

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        def st(s):
            return sorted(self.names(s), key=self.fluents.index)
        return {
            "fluents": list(self.fluents.names),
            "initial": st(self.initial),
            "actions": list(self.actions),
            "reactions": list(self.reactions),
            "alpha": [{"state": st(s), "actions": [self.actions[a] for a in acts]}
                      for s, acts in sorted(self._alpha.items())],
            "beta": [{"state": st(s), "action": self.actions[a],
                      "reactions": [self.reactions[r] for r in rs]}
                     for (s, a), rs in sorted(self._beta.items())],
            "delta": [{"state": st(s), "action": self.actions[a],
                       "reaction": self.reactions[r], "next": st(t)}
                      for (s, a, r), t in sorted(self._delta.items())],
        }

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")


def domain_from_json(data: Mapping) -> Domain:
    """Build a domain from the JSON schema, checking names and consistency."""
    if not isinstance(data, Mapping):
        raise DomainSchemaError("domain must be a JSON object")
    for key in _FIELDS:
        if key not in data:
            if key in ("alpha", "beta", "delta"):
                continue
            raise DomainSchemaError(f"missing field {key!r}")
    try:
        fluents = FluentSet(data["fluents"])
    except ValueError as exc:
        raise DomainSchemaError(str(exc)) from None
    actions = list(data["actions"])
    reactions = list(data["reactions"])
    act_ix = {a: i for i, a in enumerate(actions)}
    rea_ix = {r: i for i, r in enumerate(reactions)}

    def state(names, where):
        if not isinstance(names, list):
            raise DomainSchemaError(f"{where}: state must be a list of fluent names")
        unknown = [n for n in names if n not in fluents]
        if unknown:
            raise DomainSchemaError(f"{where}: unknown fluent {unknown[0]!r}")
        return fluents.mask(names)

    def action(name, where):
        if name not in act_ix:
            raise DomainSchemaError(f"{where}: unknown action {name!r}")
        return act_ix[name]

    def reaction(name, where):
        if name not in rea_ix:
            raise DomainSchemaError(f"{where}: unknown reaction {name!r}")
        return rea_ix[name]

    def entry(e, keys, where):
        missing = [k for k in keys if k not in e]
        if missing:
            raise DomainSchemaError(f"{where}: missing field {missing[0]!r}")

    initial = state(data["initial"], "initial")
    alpha: dict[int, set[int]] = {}
    for n, e in enumerate(data.get("alpha", [])):
        where = f"alpha[{n}]"
        entry(e, ("state", "actions"), where)
        alpha.setdefault(state(e["state"], where), set()).update(
            action(a, where) for a in e["actions"])
    beta: dict[tuple[int, int], set[int]] = {}
    for n, e in enumerate(data.get("beta", [])):
        where = f"beta[{n}]"
        entry(e, ("state", "action", "reactions"), where)
        s, a = state(e["state"], where), action(e["action"], where)
        if a not in alpha.get(s, ()):
            raise DomainSchemaError(f"{where}: reaction precondition for action "
                                    f"{e['action']!r} not enabled in that state")
        beta.setdefault((s, a), set()).update(reaction(r, where) for r in e["reactions"])
    delta: dict[tuple[int, int, int], int] = {}
    for n, e in enumerate(data.get("delta", [])):
        where = f"delta[{n}]"
        entry(e, ("state", "action", "reaction", "next"), where)
        s, a = state(e["state"], where), action(e["action"], where)
        r, t = reaction(e["reaction"], where), state(e["next"], where)
        if a not in alpha.get(s, ()):
            raise DomainSchemaError(f"{where}: transition without precondition "
                                    f"(action {e['action']!r} not in alpha)")
        if r not in beta.get((s, a), ()):
            raise DomainSchemaError(f"{where}: transition without reaction precondition "
                                    f"(reaction {e['reaction']!r} not in beta)")
        if delta.get((s, a, r), t) != t:
            raise DomainSchemaError(f"{where}: duplicate transition with conflicting successor")
        delta[(s, a, r)] = t
    try:
        return Domain(fluents, initial, actions, reactions, alpha, beta, delta)
    except DomainSchemaError as exc:
        raise DomainSchemaError(str(exc)) from None


def load_domain(path: str | Path) -> Domain:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DomainSchemaError(f"{path}: invalid JSON: {exc}") from None
    return domain_from_json(data)


# ---------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class Violation:
    rule: str                      # R1, R2, R3 or DEF
    state: frozenset[str]
    action: str | None = None
    reactions: tuple[str, ...] = ()
    message: str = ""

    def to_json(self) -> dict:
        return {"rule": self.rule, "state": sorted(self.state), "action": self.action,
                "reactions": list(self.reactions), "message": self.message}


@dataclass
class ValidationReport:
    scope: str
    states_checked: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}

    def describe(self) -> str:
        if self.ok:
            return f"ok: {self.states_checked} states checked ({self.scope} scope)"
        return "\n".join(f"{v.rule}: {v.message}" for v in self.violations)


RULE_NAMES = {
    "R1": "existence of agent action",
    "R2": "existence of environment reaction",
    "R3": "uniqueness of environment reaction",
    "DEF": "transition defined for every enabled action/reaction pair",
}


def validate_domain(d: Domain, scope: str = "reachable", *,
                    max_fluents: int = 20) -> ValidationReport:
    """Check the well-formedness rules on the reachable or on all states."""
    if scope == "reachable":
        states = d.reachable_states()
    elif scope == "full":
        if len(d.fluents) > max_fluents:
            raise ValueError(f"full scope enumerates 2^{len(d.fluents)} states; "
                             f"limit is 2^{max_fluents}")
        states = range(1 << len(d.fluents))
    else:
        raise ValueError(f"unknown scope {scope!r}")
    report = ValidationReport(scope)
    bad = report.violations
    for s in states:
        report.states_checked += 1
        names = d.names(s)
        shown = "{" + ", ".join(sorted(names)) + "}"
        acts = d.enabled(s)
        if not acts:
            bad.append(Violation("R1", names, message=f"no agent action enabled in {shown}"))
        for a in acts:
            an = d.actions[a]
            reas = d.allowed(s, a)
            if not reas:
                bad.append(Violation("R2", names, an,
                                     message=f"no reaction allowed for {an} in {shown}"))
            seen: dict[int, int] = {}
            for r in reas:
                t = d.successor(s, a, r)
                if t is None:
                    bad.append(Violation("DEF", names, an, (d.reactions[r],),
                                         f"delta undefined for ({shown}, {an}, "
                                         f"{d.reactions[r]})"))
                    continue
                if t in seen:
                    pair = (d.reactions[seen[t]], d.reactions[r])
                    bad.append(Violation("R3", names, an, pair,
                                         f"reactions {pair[0]} and {pair[1]} of {an} in "
                                         f"{shown} lead to the same state"))
                else:
                    seen[t] = r
    return report


def add_nop(d: Domain, scope: str = "reachable", action: str = "nop",
            reaction: str = "nopr") -> Domain:
    """Give every state without enabled actions a self-looping no-op."""
    states = d.reachable_states() if scope == "reachable" else range(1 << len(d.fluents))
    missing = [s for s in states if not d.enabled(s)]
    if not missing:
        return d
    actions = list(d.actions)
    reactions = list(d.reactions)
    if action not in actions:
        actions.append(action)
    if reaction not in reactions:
        reactions.append(reaction)
    a, r = actions.index(action), reactions.index(reaction)
    alpha = {s: set(v) for s, v in d._alpha.items()}
    beta = {k: set(v) for k, v in d._beta.items()}
    delta = dict(d._delta)
    for s in missing:
        alpha.setdefault(s, set()).add(a)
        beta.setdefault((s, a), set()).add(r)
        delta[(s, a, r)] = s
    out = Domain(d.fluents, d.initial, actions, reactions, alpha, beta, delta)
    if scope == "reachable" and any(not out.enabled(s) for s in out.reachable_states()):
        return add_nop(out, scope, action, reaction)
    return out


# ---------------------------------------------------------------------------
# Completion and traces

class CompletedDomain:
    """``D+``: total transitions with absorbing agent/environment error states."""

    def __init__(self, domain: Domain):
        self.domain = domain
        self.all_actions = tuple(range(len(domain.actions)))

    def enabled(self, s: int) -> tuple[int, ...]:
        if s in ERROR_STATES:
            return self.all_actions
        return self.domain.enabled(s)

    def step(self, s: int, a: int, r: int) -> int:
        if s in ERROR_STATES:
            return s
        d = self.domain
        if a not in d.enabled(s):
            return AG_ERR
        if r not in d.allowed(s, a):
            return ENV_ERR
        t = d.successor(s, a, r)
        if t is None:
            raise ValueError("domain leaves delta undefined for an allowed reaction; "
                             "run validate_domain first")
        return t


def complete_domain(d: Domain) -> CompletedDomain:
    return CompletedDomain(d)


def state_label(d: Domain, s: int) -> str:
    if s == AG_ERR:
        return "agErr"
    if s == ENV_ERR:
        return "envErr"
    return "{" + ",".join(sorted(d.names(s), key=d.fluents.index)) + "}"


def trace_of(d: Domain, actions: Sequence[str],
             reactions: Sequence[str]) -> list[frozenset[str]] | None:
    """``Trace(a, r)``; ``None`` when lengths differ or a step is undefined."""
    if len(actions) != len(reactions):
        return None
    s = d.initial
    out = [d.names(s)]
    for an, rn in zip(actions, reactions):
        a = d.action_index.get(an)
        r = d.reaction_index.get(rn)
        if a is None or r is None or a not in d.enabled(s) or r not in d.allowed(s, a):
            return None
        t = d.successor(s, a, r)
        if t is None:
            return None
        s = t
        out.append(d.names(s))
    return out


def is_legal_trace(d: Domain, trace: Sequence[Iterable[str]]) -> bool:
    """Whether every step is witnessed by an enabled action and allowed reaction."""
    if not trace:
        return False
    masks = [d.state(s) for s in trace]
    if masks[0] != d.initial:
        return False
    for s, t in zip(masks, masks[1:]):
        if not any(d.successor(s, a, r) == t
                   for a in d.enabled(s) for r in d.allowed(s, a)):
            return False
    return True
