"""Command-line interface: ``besynth <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, ltlf
from .bench import CSV_HEADER, gen_arch_benchmark, parse_range, run_bench
from .best_effort import MODES, synthesize, verify_maximality
from .dfa import compile as compile_dfa
from .domain import add_nop, load_domain, validate_domain
from .errors import (BesynthError, DomainSchemaError, ParseError, ScriptError,
                     StateBudgetExceeded, ValidationFailed)
from .games import check_safe_reach_lemma
from .runtime import (AdversarialOraclePolicy, RandomPolicy, ScriptedPolicy,
                      interactive_session, play, satisfied_in_domain)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_VIOLATION = 3
EXIT_BUDGET = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _fluent_list(values: list[str]) -> list[str]:
    return [n for v in values for n in v.split(",") if n]


def _load(args):
    domain = load_domain(args.domain)
    goal = ltlf.parse(args.formula, domain.fluents)
    return domain, goal


def cmd_compile(args) -> int:
    fluents = _fluent_list(args.fluents) if args.fluents else None
    f = ltlf.parse(args.formula, fluents)
    if fluents is None:
        fluents = sorted(ltlf.atoms(f))
    dfa = compile_dfa(f, fluents, minimized=not args.no_minimize)
    text = dfa.to_dot() if args.format == "dot" else dfa.dumps()
    _emit(text, args.out)
    return EXIT_OK


def cmd_check_domain(args) -> int:
    domain = load_domain(args.domain)
    if args.add_nop:
        domain = add_nop(domain, args.scope)
        if args.out:
            domain.dump(args.out)
    report = validate_domain(domain, args.scope)
    if args.json:
        print(json.dumps({"ok": report.ok, "statesChecked": report.states_checked,
                          "violations": [v.to_json() for v in report.violations]}, indent=2))
    elif report.ok:
        print(f"ok: {report.states_checked} states checked ({args.scope})")
    else:
        print(report.describe())
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_synthesize(args) -> int:
    domain, goal = _load(args)
    s = synthesize(domain, goal, mode=args.mode, validate=args.scope)
    print(f"classification: {s.classification}")
    print(f"dfa states: {s.dfa.num_states}")
    print(f"arena states: {s.arena.num_states}")
    print(f"|W_adv| = {len(s.w_adv)}, |W_coop| = {len(s.w_coop)}")
    print("timings (ms): " + ", ".join(f"{k}={v:.3f}" for k, v in s.timings.items()))
    if args.export:
        s.export(args.export, args.format)
        print(f"strategy written to {args.export}")
    return EXIT_OK


def _policy(spec: str):
    kind, _, arg = spec.partition(":")
    if kind == "scripted":
        if not arg:
            raise UsageError("scripted environment needs a file: scripted:<file>")
        text = Path(arg).read_text()
        try:
            reactions = json.loads(text)
        except json.JSONDecodeError:
            reactions = text.split()
        if not isinstance(reactions, list) or not all(isinstance(r, str) for r in reactions):
            raise UsageError(f"{arg}: expected a JSON list of reaction names or one per line")
        return ScriptedPolicy(reactions)
    if kind == "random":
        try:
            return RandomPolicy(int(arg or 0))
        except ValueError:
            raise UsageError(f"bad seed {arg!r}") from None
    if kind == "adversarial":
        return AdversarialOraclePolicy()
    if kind == "interactive":
        return None
    raise UsageError(f"unknown environment {spec!r}; expected scripted:<file>, "
                     f"random:<seed>, adversarial or interactive")


def cmd_simulate(args) -> int:
    policy = _policy(args.env)
    domain, goal = _load(args)
    s = synthesize(domain, goal)
    stop = not args.cont
    if policy is None:
        rec = interactive_session(s, max_steps=args.max_steps, stop_at_goal=stop)
    else:
        rec = play(s, policy, max_steps=args.max_steps, stop_at_goal=stop)
    if args.json:
        print(json.dumps(rec.to_json(), indent=2))
    else:
        print(f"classification: {s.classification}")
        trace = rec.trace
        print(f"0: {{{', '.join(sorted(trace[0]))}}}")
        for k, (a, r) in enumerate(zip(rec.actions, rec.reactions), start=1):
            print(f"{k}: {a} / {r} -> {{{', '.join(sorted(trace[k]))}}}")
        sat = rec.satisfied_at_step
        print(f"satisfiedAtStep: {'none' if sat is None else sat}")
        print(f"stopReason: {rec.stop_reason}")
    if rec.satisfied_at_step != satisfied_in_domain(rec.trace, goal):
        print("internal error: arena and trace disagree on goal satisfaction", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_verify(args) -> int:
    domain, goal = _load(args)
    s = synthesize(domain, goal)
    report = verify_maximality(s)
    problems = check_safe_reach_lemma(s.arena)
    print(f"classification: {s.classification}")
    print(f"histories checked: {report.checked}")
    if args.json:
        print(json.dumps(report.to_json(), indent=2))
    for v in report.violations:
        print(f"violation [{v['kind']}] at {v['state']}: {v['detail']}")
    for p in problems:
        print(f"region mismatch: {p}")
    if report.ok and not problems:
        print("verified: every consistent history keeps its best value")
        return EXIT_OK
    return EXIT_VIOLATION


def cmd_bench(args) -> int:
    objects = parse_range(args.objects)
    locations = parse_range(args.locations)
    if args.timeout <= 0:
        raise UsageError("--timeout must be positive")
    summary = run_bench(objects, locations, modes=args.modes, timeout=args.timeout,
                        out=args.out, repeat=args.repeat, parallel=args.parallel)
    if args.out is None:
        print(",".join(CSV_HEADER))
        for r in summary.rows:
            print(",".join(str(v) for v in r.csv_row()))
    print(summary.describe(), file=sys.stderr if args.out is None else sys.stdout)
    return EXIT_OK


def cmd_gen_arch(args) -> int:
    domain, goal = gen_arch_benchmark(args.objects, args.locations)
    if args.out:
        domain.dump(args.out)
        print(f"domain written to {args.out}")
    else:
        print(json.dumps(domain.to_json(), indent=2))
    print(f"goal: {goal}", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="besynth", description="Best-effort LTLf synthesis in planning domains.")
    p.add_argument("--version", action="version", version=f"besynth {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compile", help="compile an LTLf formula to a DFA")
    c.add_argument("formula")
    c.add_argument("--fluents", nargs="+", help="fluent names (space or comma separated)")
    c.add_argument("--format", choices=("dot", "json"), default="dot")
    c.add_argument("--no-minimize", action="store_true")
    c.add_argument("--out")
    c.set_defaults(func=cmd_compile)

    c = sub.add_parser("check-domain", help="validate a domain file")
    c.add_argument("domain")
    c.add_argument("--scope", choices=("reachable", "full"), default="reachable")
    c.add_argument("--add-nop", action="store_true",
                   help="add a self-looping no-op where no action is enabled")
    c.add_argument("--out", help="write the repaired domain (with --add-nop)")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check_domain)

    def goal_args(c):
        c.add_argument("domain")
        c.add_argument("formula")

    c = sub.add_parser("synthesize", help="synthesize a best-effort strategy")
    goal_args(c)
    c.add_argument("--export")
    c.add_argument("--format", default="json")
    c.add_argument("--mode", choices=MODES, default="bestEffort")
    c.add_argument("--scope", choices=("reachable", "full"), default="reachable")
    c.set_defaults(func=cmd_synthesize)

    c = sub.add_parser("simulate", help="play the strategy against an environment")
    goal_args(c)
    c.add_argument("--env", default="random:0",
                   help="scripted:<file> | random:<seed> | adversarial | interactive")
    c.add_argument("--max-steps", type=int)
    c.add_argument("--continue", dest="cont", action="store_true",
                   help="keep playing after the goal is satisfied")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_simulate)

    c = sub.add_parser("verify", help="synthesize and check maximality")
    goal_args(c)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_verify)

    c = sub.add_parser("bench", help="run the objects-at-locations benchmark")
    c.add_argument("--objects", default="1..1")
    c.add_argument("--locations", default="1..10")
    c.add_argument("--timeout", type=float, default=60.0, help="seconds per instance")
    c.add_argument("--out")
    c.add_argument("--repeat", type=int, default=3)
    c.add_argument("--parallel", type=int, default=1)
    c.add_argument("--modes", nargs="+", choices=MODES, default=list(MODES))
    c.set_defaults(func=cmd_bench)

    c = sub.add_parser("gen-arch", help="write an objects-at-locations domain")
    c.add_argument("objects", type=int)
    c.add_argument("locations", type=int)
    c.add_argument("--out")
    c.set_defaults(func=cmd_gen_arch)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "max_steps", None) is not None and args.max_steps < 1:
            raise UsageError("--max-steps must be at least 1")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationFailed, DomainSchemaError, ScriptError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except StateBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (BesynthError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
