"""Session-wide hooks.

Every arena composed anywhere in the suite is recorded so the
safety-reachability cross-check can run on all of them at the end, and the
acceptance criteria report one line each in the terminal summary.
"""

import besynth.arena
import besynth.best_effort
from besynth.games import check_safe_reach_lemma

COMPOSED = []
ACCEPTANCE = {}

_compose = besynth.arena.compose


def _recording_compose(*args, **kwargs):
    arena = _compose(*args, **kwargs)
    COMPOSED.append(arena)
    return arena


besynth.arena.compose = _recording_compose
besynth.best_effort.compose = _recording_compose


def lemma_failures(arenas):
    return [(i, p) for i, a in enumerate(arenas) for p in check_safe_reach_lemma(a)]


def pytest_sessionfinish(session, exitstatus):
    failures = lemma_failures(COMPOSED)
    session.config._lemma_summary = (len(COMPOSED), failures)
    if failures and session.exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    tr = terminalreporter
    if ACCEPTANCE:
        tr.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            ok, detail = ACCEPTANCE[key]
            tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")
    count, failures = getattr(config, "_lemma_summary", (0, []))
    tr.section("safety-reachability cross-check")
    tr.write_line(f"{count} composed arenas checked, {len(failures)} mismatches")
    for i, p in failures[:10]:
        tr.write_line(f"  arena #{i}: {p}")
