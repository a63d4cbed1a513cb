"""Objects-at-locations benchmark family and the timing harness."""

from __future__ import annotations

import csv
import gc
import multiprocessing as mp
import statistics
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from . import ltlf
from .best_effort import MODES, STEPS, synthesize
from .domain import Domain
from .errors import StateBudgetExceeded
from .ltlf import Formula

MAX_OBJECTS = 3
MAX_LOCATIONS = 12

CSV_HEADER = ["O", "L", "mode", "dfa_states", "arena_states", "t_dfa_ms", "t_arena_ms",
              "t_adv_ms", "t_coop_ms", "t_combine_ms", "t_total_ms", "classification",
              "outcome"]


def arch_fluents(O: int, L: int) -> list[str]:
    return ([f"at_{o}_{l}" for o in range(O) for l in range(L)]
            + [f"held_{o}" for o in range(O)] + [f"stored_{o}" for o in range(O)])


def arch_goal(O: int) -> Formula:
    conj = ltlf.Atom(f"at_{O - 1}_{O - 1}")
    for o in range(O - 2, -1, -1):
        conj = ltlf.And(ltlf.Atom(f"at_{o}_{o}"), conj)
    return ltlf.Eventually(conj)


def gen_arch_benchmark(O: int, L: int, *, max_objects: int = MAX_OBJECTS,
                       max_locations: int = MAX_LOCATIONS) -> tuple[Domain, Formula]:
    """Build the (O, L) arch instance: pick and place objects, the human may undo one placement.

    An abstract state records, per object, ``"s"`` (stored), ``"h"`` (held)
    or the location index it sits on. Only states reachable from the
    all-stored start are materialized.
    """
    if O < 1 or L < 1:
        raise ValueError("need at least one object and one location")
    if O > max_objects or L > max_locations:
        raise ValueError(f"instance ({O}, {L}) exceeds the caps "
                         f"O <= {max_objects}, L <= {max_locations}")
    if O > L:
        raise ValueError(f"{O} objects cannot all be placed on {L} distinct locations")
    fluents = ltlf.FluentSet(arch_fluents(O, L))
    actions = ([f"pick_{o}" for o in range(O)]
               + [f"place_{o}_{l}" for o in range(O) for l in range(L)] + ["nop"])
    reactions = ["none"] + [f"undo_{o}_{l}" for o in range(O) for l in range(L)]
    nop = len(actions) - 1

    def mask(pos: tuple) -> int:
        names = []
        for o, p in enumerate(pos):
            names.append(f"stored_{o}" if p == "s" else f"held_{o}" if p == "h"
                         else f"at_{o}_{p}")
        return fluents.mask(names)

    def moves(pos: tuple):
        holding = "h" in pos
        occupied = {p for p in pos if isinstance(p, int)}
        for o, p in enumerate(pos):
            if p == "s" and not holding:
                yield o, pos[:o] + ("h",) + pos[o + 1:]
        for o, p in enumerate(pos):
            if p == "h":
                for l in range(L):
                    if l not in occupied:
                        yield O + o * L + l, pos[:o] + (l,) + pos[o + 1:]
        yield nop, pos

    start = ("s",) * O
    alpha: dict[int, set[int]] = {}
    beta: dict[tuple[int, int], set[int]] = {}
    delta: dict[tuple[int, int, int], int] = {}
    seen = {start}
    queue = deque([start])
    while queue:
        pos = queue.popleft()
        s = mask(pos)
        for a, post in moves(pos):
            alpha.setdefault(s, set()).add(a)
            outcomes = [(0, post)]
            for o, p in enumerate(post):
                if isinstance(p, int):
                    outcomes.append((1 + o * L + p, post[:o] + ("s",) + post[o + 1:]))
            for r, nxt in outcomes:
                beta.setdefault((s, a), set()).add(r)
                delta[(s, a, r)] = mask(nxt)
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    domain = Domain(fluents, mask(start), actions, reactions, alpha, beta, delta)
    return domain, arch_goal(O)


# ---------------------------------------------------------------------------
# Timing harness

@dataclass
class BenchRow:
    O: int
    L: int
    mode: str
    dfa_states: int | None = None
    arena_states: int | None = None
    timings: dict[str, float] = field(default_factory=dict)
    classification: str | None = None
    outcome: str = "ok"

    def csv_row(self) -> list:
        t = [f"{self.timings[s]:.3f}" if s in self.timings else ""
             for s in (*STEPS, "total")]
        return [self.O, self.L, self.mode, _blank(self.dfa_states), _blank(self.arena_states),
                *t, self.classification or "", self.outcome]


def _blank(v):
    return "" if v is None else v


def _timed(domain, goal, mode):
    enabled = gc.isenabled()
    gc.disable()
    try:
        return synthesize(domain, goal, mode=mode)
    finally:
        if enabled:
            gc.enable()


def measure(O: int, L: int, mode: str, repeat: int = 1) -> dict:
    """Synthesize one instance ``repeat`` times; per-step medians in ms."""
    domain, goal = gen_arch_benchmark(O, L)
    runs = []
    strategy = None
    try:
        for _ in range(max(1, repeat)):
            strategy = _timed(domain, goal, mode)
            runs.append(strategy.timings)
    except StateBudgetExceeded:
        return {"outcome": "budget"}
    timings = {k: statistics.median(r[k] for r in runs) for k in (*STEPS, "total")}
    return {"outcome": "ok", "timings": timings, "dfa_states": strategy.dfa.num_states,
            "arena_states": strategy.arena.num_states,
            "classification": strategy.classification}


def _child(conn, O, L, mode, repeat):
    try:
        conn.send(measure(O, L, mode, repeat))
    except Exception as exc:  # reported to the parent as a failed row
        conn.send({"outcome": "error", "error": repr(exc)})
    finally:
        conn.close()


def run_instance(O: int, L: int, mode: str, *, timeout: float | None = None,
                 repeat: int = 1) -> BenchRow:
    """One row; with ``timeout`` the instance runs in a child process that is killed on expiry."""
    row = BenchRow(O, L, mode)
    if timeout is None:
        res = measure(O, L, mode, repeat)
    else:
        ctx = mp.get_context("fork")
        recv, send = ctx.Pipe(duplex=False)
        proc = ctx.Process(target=_child, args=(send, O, L, mode, repeat), daemon=True)
        proc.start()
        send.close()
        if recv.poll(timeout):
            res = recv.recv()
            proc.join()
        else:
            proc.kill()
            proc.join()
            res = {"outcome": "timeout"}
        recv.close()
    row.outcome = res["outcome"]
    if row.outcome == "ok":
        row.timings = res["timings"]
        row.dfa_states = res["dfa_states"]
        row.arena_states = res["arena_states"]
        row.classification = res["classification"]
    return row


@dataclass
class BenchSummary:
    rows: list[BenchRow]

    def total(self, mode: str) -> float:
        """Sum of total times over instances that finished in every mode."""
        done = self._complete()
        return sum(r.timings["total"] for r in self.rows
                   if r.mode == mode and (r.O, r.L) in done)

    def _complete(self) -> set[tuple[int, int]]:
        by_inst: dict[tuple[int, int], set[str]] = {}
        for r in self.rows:
            if r.outcome == "ok":
                by_inst.setdefault((r.O, r.L), set()).add(r.mode)
        modes = {r.mode for r in self.rows}
        return {k for k, v in by_inst.items() if v >= modes}

    def ratio(self, num: str, den: str) -> float | None:
        d = self.total(den)
        return self.total(num) / d if d > 0 else None

    def describe(self) -> str:
        modes = [m for m in MODES if any(r.mode == m for r in self.rows)]
        lines = [f"instances: {len({(r.O, r.L) for r in self.rows})}, rows: {len(self.rows)}"]
        for m in modes:
            lines.append(f"  {m:16s} total {self.total(m):10.2f} ms")
        be_coop = self.ratio("bestEffort", "cooperativeOnly")
        adv_be = self.ratio("adversarialOnly", "bestEffort")
        if be_coop is not None:
            lines.append(f"  bestEffort / cooperativeOnly  = {be_coop:.3f} "
                         f"(reported range 1.10-1.15)")
        if adv_be is not None:
            lines.append(f"  adversarialOnly / bestEffort  = {adv_be:.3f} "
                         f"(reported range 0.75-0.80)")
        bad = [r for r in self.rows if r.outcome != "ok"]
        for r in bad:
            lines.append(f"  ({r.O}, {r.L}) {r.mode}: {r.outcome}")
        return "\n".join(lines)


def instances(objects: Iterable[int], locations: Iterable[int]) -> list[tuple[int, int]]:
    """Grid points, skipping those with more objects than locations."""
    return [(O, L) for O in objects for L in locations if O <= L]


def run_bench(objects: Iterable[int], locations: Iterable[int], *,
              modes: Sequence[str] = MODES, timeout: float | None = 60.0,
              out: str | Path | None = None, repeat: int = 1,
              parallel: int = 1) -> BenchSummary:
    jobs = [(O, L, m) for O, L in instances(objects, locations) for m in modes]

    def run(job):
        return run_instance(*job, timeout=timeout, repeat=repeat)

    if parallel > 1:
        with ThreadPoolExecutor(parallel) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]
    if out is not None:
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for r in rows:
                w.writerow(r.csv_row())
    return BenchSummary(rows)


def time_suite(points: Iterable[tuple[int, int]], *, modes: Sequence[str] = MODES,
               repeat: int = 15) -> BenchSummary:
    """In-process timings with modes and instances interleaved on every round.

    Interleaving spreads slow drifts (frequency scaling, cache state) evenly
    over the modes, which matters when comparing totals a few percent apart.
    """
    points = list(points)
    problems = {p: gen_arch_benchmark(*p) for p in points}
    runs: dict[tuple[int, int, str], list] = {(O, L, m): [] for O, L in points for m in modes}
    for _ in range(max(1, repeat)):
        for O, L in points:
            for m in modes:
                runs[(O, L, m)].append(_timed(*problems[(O, L)], m))
    rows = []
    for (O, L, m), results in runs.items():
        last = results[-1]
        timings = {k: statistics.median(r.timings[k] for r in results)
                   for k in (*STEPS, "total")}
        rows.append(BenchRow(O, L, m, last.dfa.num_states, last.arena.num_states, timings,
                             last.classification))
    return BenchSummary(rows)


def parse_range(text: str) -> range:
    """``"A..B"`` (inclusive) or a single integer."""
    lo, sep, hi = text.partition("..")
    try:
        a = int(lo)
        b = int(hi) if sep else a
    except ValueError:
        raise ValueError(f"bad range {text!r}; expected A..B") from None
    if b < a:
        raise ValueError(f"empty range {text!r}")
    return range(a, b + 1)
