"""Command-line entry point.

Exit codes: 0 ok, 1 error, 2 divergence or failed check, 3 replay mismatch.
Results go to stdout as one JSON object per line; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .core import CrdtError
from .crdts import registry
from .encoding import dumps
from .harness import (
    BUNDLED,
    check_convergence,
    diverges,
    load_bundled,
    parse_scenario,
    random_execution,
    run_scenario,
    shrink,
)
from .suites import SUITES, SuiteNotApplicable, applicable

OK, ERROR, FAILED, MISMATCH = 0, 1, 2, 3

CHECK_SUITES = ("assumptions", "tp", "oracle", "compressed", "prune", "commute", "convergence",
                "exhaustive")


def _seed(args) -> int:
    env = os.environ.get("SEMIDIRECT_SEED")
    return int(env) if env not in (None, "") else args.seed


def _emit(obj) -> None:
    print(dumps(obj))


def _fail(text: str) -> int:
    print(f"error: {text}", file=sys.stderr)
    return ERROR


def _load_scenario(path: str):
    if path.startswith("bundled:"):
        return load_bundled(path.split(":", 1)[1])
    return parse_scenario(Path(path).read_text("utf-8"))


def cmd_simulate(args) -> int:
    try:
        scenario = _load_scenario(args.scenario)
        trace = run_scenario(scenario)
    except (CrdtError, OSError) as err:
        return _fail(str(err))
    if args.out:
        Path(args.out).write_text(trace.dumps() + "\n", "utf-8")
    converged = check_convergence(trace)
    _emit({"instance": scenario.instance, "steps": len(trace.steps), "converged": converged,
           "final": trace.final})
    if not converged:
        print("replicas diverged", file=sys.stderr)
        return FAILED
    return OK


def cmd_fuzz(args) -> int:
    seed = _seed(args)
    try:
        instance = registry.get(args.instance)
    except CrdtError as err:
        return _fail(str(err))
    failing = diverges(instance)
    failures = []
    for run in range(args.runs):
        scenario = random_execution(instance, args.replicas, args.ops, seed=seed * 100_003 + run)
        try:
            bad = failing(scenario)
        except CrdtError as err:
            print(f"run {run}: {err}", file=sys.stderr)
            bad = True
        if bad:
            failures.append((run, scenario))
    result = {"instance": args.instance, "runs": args.runs, "seed": seed,
              "failures": [run for run, _ in failures]}
    if failures:
        run, scenario = failures[0]
        minimal = shrink(scenario, failing)
        Path(args.out).write_text(minimal.dumps() + "\n", "utf-8")
        result["shrunk"] = args.out
        result["shrunk_events"] = len(minimal.events)
        print(f"{len(failures)} of {args.runs} runs diverged; minimal scenario in {args.out}",
              file=sys.stderr)
    _emit(result)
    return FAILED if failures else OK


def cmd_check(args) -> int:
    seed = _seed(args)
    try:
        instance = registry.get(args.instance)
    except CrdtError as err:
        return _fail(str(err))
    if args.suite == "all":
        suites = [s for s in CHECK_SUITES if applicable(instance, s)]
    elif not applicable(instance, args.suite):
        return _fail(str(SuiteNotApplicable(f"suite {args.suite!r} does not apply to {args.instance}")))
    else:
        suites = [args.suite]
    ok = True
    for name in suites:
        kwargs = {"seed": seed}
        if name == "compressed":
            kwargs["bundled"] = [s for s in map(load_bundled, BUNDLED)
                                 if s.instance == instance.name]
        try:
            result = SUITES[name](instance, **kwargs)
        except CrdtError as err:
            return _fail(f"{name}: {err}")
        _emit(result.summary())
        ok = ok and result.passed
    return OK if ok else FAILED


def _first_divergence(expected: str, actual: str):
    try:
        want, got = json.loads(expected), json.loads(actual)
    except json.JSONDecodeError:
        return None
    steps_a, steps_b = want.get("steps", []), got.get("steps", [])
    for i, (a, b) in enumerate(zip(steps_a, steps_b)):
        if a != b:
            return i
    if len(steps_a) != len(steps_b):
        return min(len(steps_a), len(steps_b))
    return -1  # steps agree; header or final differ


def cmd_replay(args) -> int:
    try:
        recorded = Path(args.trace).read_text("utf-8").rstrip("\n")
        scenario = _load_scenario(args.scenario)
        fresh = run_scenario(scenario).dumps()
    except (CrdtError, OSError) as err:
        return _fail(str(err))
    if recorded == fresh:
        _emit({"identical": True, "steps": len(json.loads(fresh)["steps"])})
        return OK
    step = _first_divergence(recorded, fresh)
    _emit({"identical": False, "first_divergence": step})
    print(f"trace mismatch; first divergent step: {step}", file=sys.stderr)
    return MISMATCH


def cmd_list(args) -> int:
    for name in registry.names(include_controls=True):
        _emit({"instance": name, "control": registry.is_control(name),
               "suites": [s for s in CHECK_SUITES if applicable(name, s)]})
    return OK


class _Parser(argparse.ArgumentParser):
    # usage errors are plain errors here; 2 means a failed check
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="semidirect", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario document")
    p.add_argument("--scenario", required=True, help="path, or bundled:<name>")
    p.add_argument("--out", help="write the trace document here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fuzz", help="seeded random executions with shrinking")
    p.add_argument("--instance", required=True)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ops", type=int, default=10)
    p.add_argument("--replicas", type=int, default=3)
    p.add_argument("--out", default="fuzz-failure.json", help="where the shrunk scenario goes")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("check", help="run check suites")
    p.add_argument("--instance", required=True)
    p.add_argument("--suite", default="all", choices=CHECK_SUITES + ("all",))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("replay", help="re-run a scenario and byte-compare with a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("list", help="registered instances")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
