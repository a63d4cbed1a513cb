import io
import itertools
import random
from pathlib import Path

import pytest

from besynth.bench import gen_arch_benchmark
from besynth.best_effort import synthesize
from besynth.domain import load_domain
from besynth.errors import ScriptError
from besynth.ltlf import TRUE, Atom, Eventually, parse
from besynth.runtime import (GOAL_REACHED, INTERACTIVE_QUIT, MAX_STEPS, AdversarialOraclePolicy,
                             InteractivePolicy, RandomPolicy, ScriptedPolicy,
                             cooperate_punish_cooperate, interactive_session, play,
                             record_is_legal, satisfied_in_domain)

from helpers import goal_for, random_domain, single_reaction_domain, state_goal

DOMAINS = Path(__file__).resolve().parent.parent / "domains"


def _check(rec, goal):
    assert record_is_legal(rec)
    assert rec.satisfied_at_step == satisfied_in_domain(rec.trace, goal)


@pytest.mark.parametrize("trace, f, expected", [
    ([set(), {"p"}], Eventually(Atom("p")), 1),
    ([set(), {"p"}], Atom("p"), None),
    ([set(), set()], TRUE, 0),
])
def test_satisfied_in_domain(trace, f, expected):
    assert satisfied_in_domain(trace, f) == expected


def test_winning_instance_wins_against_random_policies():
    d = load_domain(DOMAINS / "toy.json")
    goal = parse("F !p & F p", ["p"])
    rng = random.Random(3)
    wins = 0
    while wins < 5:
        dom = single_reaction_domain(rng)
        g = state_goal(dom, rng.choice(dom.reachable_states()))
        s = synthesize(dom, g)
        assert s.classification == "winning"
        for seed in range(10):
            rec = play(s, RandomPolicy(seed))
            assert rec.satisfied_at_step is not None
            assert rec.satisfied_at_step <= s.arena.num_states
            _check(rec, g)
        wins += 1
    s = synthesize(d, goal)
    assert s.classification == "pending"


def test_strong_guarantee_exhaustive_on_small_arenas():
    rng = random.Random(5)
    checked = 0
    while checked < 10:
        d = random_domain(rng, max_reactions=2)
        g = state_goal(d, rng.choice(d.reachable_states()))
        s = synthesize(d, g)
        if s.classification != "winning" or s.arena.num_states > 10:
            continue
        checked += 1
        n = s.arena.num_states
        R = len(d.reactions)
        for choices in itertools.product(range(R), repeat=n):
            it = iter(choices)

            def pick(ctx):
                k = next(it)
                return ctx.legal[k % len(ctx.legal)]

            rec = play(s, pick, max_steps=n)
            assert rec.satisfied_at_step is not None


def test_pending_instance_vs_adversarial_oracle():
    d, goal = gen_arch_benchmark(1, 2)
    s = synthesize(d, goal)
    rec = play(s, AdversarialOraclePolicy(), max_steps=40)
    assert rec.satisfied_at_step is None and rec.stop_reason == MAX_STEPS
    assert len(rec.actions) == 40
    _check(rec, goal)


def test_cooperate_punish_cooperate_reaches_goal():
    d, goal = gen_arch_benchmark(2, 3)
    s = synthesize(d, goal)
    script = cooperate_punish_cooperate(s)
    assert any(r.startswith("undo") for r in script)
    rec = play(s, ScriptedPolicy(script))
    assert rec.stop_reason == GOAL_REACHED
    assert rec.satisfied_at_step == len(script)
    _check(rec, goal)


def test_all_none_script_reaches_goal_on_arch():
    for O, L in [(1, 1), (1, 5), (2, 2), (3, 3)]:
        d, goal = gen_arch_benchmark(O, L)
        s = synthesize(d, goal)
        rec = play(s, ScriptedPolicy(["none"] * 100))
        assert rec.satisfied_at_step is not None


def test_script_errors():
    d, goal = gen_arch_benchmark(1, 1)
    s = synthesize(d, goal)
    with pytest.raises(ScriptError, match="exhausted"):
        play(s, ScriptedPolicy(["none"]))
    with pytest.raises(ScriptError, match="not allowed"):
        play(s, ScriptedPolicy(["undo_0_0"]))


def test_continue_after_goal():
    d, goal = gen_arch_benchmark(1, 1)
    s = synthesize(d, goal)
    rec = play(s, RandomPolicy(0), max_steps=15, stop_at_goal=False)
    assert len(rec.actions) == 15 and rec.stop_reason == MAX_STEPS
    _check(rec, goal)


def test_max_steps_default_and_validation():
    d, goal = gen_arch_benchmark(1, 1)
    s = synthesize(d, goal)
    rec = play(s, AdversarialOraclePolicy())
    assert len(rec.actions) == 10 * s.arena.num_states
    with pytest.raises(ValueError):
        play(s, RandomPolicy(0), max_steps=0)


def test_determinism():
    d, goal = gen_arch_benchmark(2, 2)
    s = synthesize(d, goal)
    a = play(s, RandomPolicy(9), stop_at_goal=False, max_steps=50).to_json()
    b = play(s, RandomPolicy(9), stop_at_goal=False, max_steps=50).to_json()
    assert a == b


def test_record_json_fields():
    d, goal = gen_arch_benchmark(1, 1)
    rec = play(synthesize(d, goal), ScriptedPolicy(["none", "none"]))
    assert set(rec.to_json()) == {"states", "actions", "reactions", "satisfiedAtStep",
                                  "stopReason"}
    assert rec.to_json()["states"][-1] == ["at_0_0"]


def test_interactive_first_choice_matches_script():
    d, goal = gen_arch_benchmark(2, 2)
    s = synthesize(d, goal)
    out = io.StringIO()
    rec = play(s, InteractivePolicy(io.StringIO("1\n" * 50), out))
    firsts = [d.reactions[d.allowed(d.state(st), d.action_index[a])[0]]
              for st, a in zip(rec.trace, rec.actions)]
    scripted = play(s, ScriptedPolicy(firsts))
    assert scripted.to_json() == rec.to_json()
    assert "1) none" in out.getvalue()


def test_interactive_reprompts_and_quits():
    d, goal = gen_arch_benchmark(1, 1)
    s = synthesize(d, goal)
    out = io.StringIO()
    rec = play(s, InteractivePolicy(io.StringIO("7\nabc\n1\nq\n"), out))
    assert rec.stop_reason == INTERACTIVE_QUIT
    assert len(rec.actions) == 1
    assert out.getvalue().count("enter a number") == 2
    eof = play(s, InteractivePolicy(io.StringIO(""), io.StringIO()))
    assert eof.stop_reason == INTERACTIVE_QUIT and eof.actions == []


def test_human_can_block_arch():
    d, goal = gen_arch_benchmark(1, 1)
    s = synthesize(d, goal)
    # pick: only "none"; place: choose the undo (second entry)
    answers = io.StringIO("1\n2\n" * 20)
    rec = interactive_session(s, max_steps=20, stdin=answers, stdout=io.StringIO())
    assert rec.satisfied_at_step is None and rec.stop_reason == MAX_STEPS


def test_random_domains_plays_are_legal():
    rng = random.Random(8)
    for _ in range(30):
        d = random_domain(rng)
        g = goal_for(d, rng)
        s = synthesize(d, g)
        for policy in (RandomPolicy(rng.randrange(1000)), AdversarialOraclePolicy()):
            rec = play(s, policy, max_steps=12, stop_at_goal=rng.random() < 0.5)
            _check(rec, g)
