"""Command-line front end: explore, stress, check, linearize, repro, dump-edges.

Exit codes: 0 all requested checks passed, 1 check failures (failing axiom
ids on stderr), 2 usage errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .algorithms import ALGORITHMS, OpScript, ScriptError
from .checker import run_checks
from .events import History
from .harness import ExploreCapExceeded, ExploreConfig, FixedSchedule, \
    ReproMismatch, StressConfig, explore, parse_mode, random_script, repro, stress
from .linearize import Linearization, LinearizeError, SizeGuard, \
    brute_force_linearize, linearize
from .report import CheckReport
from .visibility import derive

DEFAULT_SUITES = ("S",)


def _load_script(path: str) -> OpScript:
    with open(path) as fh:
        return OpScript.from_json(fh.read())


def _load_history(path: str) -> History:
    with open(path) as fh:
        return History.from_json(fh.read())


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _report_failures(report: CheckReport) -> None:
    for v in report.all_violations():
        print(v.render(), file=sys.stderr)


def _parse_mode_arg(text: str):
    if text.startswith("fixed:"):
        with open(text.split(":", 1)[1]) as fh:
            return FixedSchedule(tuple(json.load(fh)["schedule"]))
    return parse_mode(text)


def cmd_explore(args) -> int:
    script = _load_script(args.script)
    suites = tuple(args.check.split(",")) if args.check else DEFAULT_SUITES
    cfg = ExploreConfig(
        algorithm=args.alg, n=args.n, script=script, mode=_parse_mode_arg(args.mode),
        suites=suites, linearize=True, oracle=args.oracle,
        hash_stream=args.hash)
    written = 0

    def per_result(res):
        nonlocal written
        if args.out:
            base = os.path.join(args.out, f"history_{written:06d}")
            with open(base + ".json", "w") as fh:
                fh.write(res.history.to_json() + "\n")
            with open(base + ".report.json", "w") as fh:
                json.dump(res.report.to_obj(), fh, indent=2)
            if res.lin is not None:
                with open(base + ".lin.json", "w") as fh:
                    fh.write(res.lin.to_json() + "\n")
        written += 1

    if args.out:
        os.makedirs(args.out, exist_ok=True)
    try:
        summary = explore(cfg, per_result=per_result if args.out else None,
                          jobs=1 if args.out else args.jobs)
    except ExploreCapExceeded as exc:
        print(str(exc), file=sys.stderr)
        return 2
    out = {
        "schedules": summary.schedules,
        "passed": summary.passed,
        "failed": summary.failed,
        "violations": summary.violations,
        "lin_failures": summary.lin_failures,
        "oracle_mismatches": summary.oracle_mismatches,
        "oracle_skipped": summary.oracle_skipped,
        "max_steps": summary.max_steps,
    }
    if summary.stream_sha256:
        out["stream_sha256"] = summary.stream_sha256
    _emit(out, None)
    for res in summary.failing:
        if isinstance(res, dict):  # compact failure record from a worker
            print(json.dumps(res), file=sys.stderr)
            continue
        _report_failures(res.report)
        if res.lin_error:
            print(res.lin_error, file=sys.stderr)
    return 0 if summary.clean else 1


def cmd_stress(args) -> int:
    script = random_script(args.n, args.threads, args.ops, args.seed)
    suites = tuple(args.check.split(",")) if args.check else ("RB", "S")
    cfg = StressConfig(algorithm=args.alg, n=args.n, script=script,
                       runs=args.runs, suites=suites)
    summary = stress(cfg)
    _emit({"runs": summary.runs, "violations": summary.violations}, None)
    for report in summary.failing:
        _report_failures(report)
    return 0 if summary.clean else 1


def cmd_check(args) -> int:
    h = _load_history(args.history)
    d = derive(h)
    suites = tuple(args.suites.split(",")) if args.suites else DEFAULT_SUITES
    lin_ok = None
    if "CHAIN" in suites:
        try:
            lin_ok = linearize(d).legal
        except LinearizeError:
            lin_ok = False
    report = run_checks(d, suites, lin_ok=lin_ok, label=args.history)
    _emit(report.to_obj(), args.out)
    if not report.passed:
        _report_failures(report)
        return 1
    return 0


def cmd_linearize(args) -> int:
    h = _load_history(args.history)
    d = derive(h)
    result: dict = {}
    code = 0
    try:
        lin = linearize(d)
        result["linearization"] = lin.to_obj()
        if not lin.legal:
            code = 1
    except LinearizeError as exc:
        result["error"] = f"{type(exc).__name__}: {exc}"
        code = 1
    if args.oracle:
        try:
            verdict = brute_force_linearize(d, args.guard)
        except SizeGuard as exc:
            result["oracle"] = {"skipped": str(exc)}
        else:
            if isinstance(verdict, Linearization):
                result["oracle"] = verdict.to_obj()
            else:
                result["oracle"] = verdict.to_obj()
    _emit(result, args.out)
    return code


def cmd_repro(args) -> int:
    try:
        res = repro(args.scenario)
    except ReproMismatch as exc:
        print(str(exc), file=sys.stderr)
        return 1
    d = derive(res.history)
    out = {"scenario": res.name, "scan_output": res.scan_output, "ids": res.ids,
           "schedule": list(res.schedule)}
    if args.scenario == "naive_03":
        verdict = brute_force_linearize(d)
        out["oracle"] = verdict.to_obj() if not isinstance(verdict, Linearization) \
            else {"linearizable": True}
        ok = not isinstance(verdict, Linearization)
        if not ok:
            print("expected the naive scenario to be non-linearizable", file=sys.stderr)
    else:
        lin = linearize(d)
        out["linearization"] = lin.to_obj()
        ok = lin.legal
        if not ok:
            print("expected the scripted scenario to linearize", file=sys.stderr)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"{res.name}.history.json"), "w") as fh:
            fh.write(res.history.to_json() + "\n")
    _emit(out, None)
    return 0 if ok else 1


def cmd_dump_edges(args) -> int:
    h = _load_history(args.history)
    d = derive(h)
    labels = args.labels.split(",")
    out = [{"label": lab, "pairs": [list(p) for p in d.edge_set(lab)]} for lab in labels]
    _emit(out, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="snaplab",
                                description="concurrent-snapshot laboratory")
    sub = p.add_subparsers(dest="cmd", required=True)

    ex = sub.add_parser("explore", help="enumerate or sample schedules and check each history")
    ex.add_argument("--alg", required=True, choices=sorted(ALGORITHMS))
    ex.add_argument("--n", type=int, required=True)
    ex.add_argument("--script", required=True)
    ex.add_argument("--mode", default="exhaustive",
                    help="exhaustive | dfs:LIMIT | random:SEED:SAMPLES | fixed:PATH")
    ex.add_argument("--check", default="S", help="comma list of suites (RB,M,M+,L,F,F+,S,CHAIN)")
    ex.add_argument("--oracle", action="store_true")
    ex.add_argument("--hash", action="store_true", help="hash the history/linearization stream")
    ex.add_argument("--out", default=None)
    ex.add_argument("--jobs", type=int, default=1,
                    help="parallelize checking across histories (ignored with --out)")
    ex.set_defaults(fn=cmd_explore)

    st = sub.add_parser("stress", help="real-thread runs with post-hoc checking")
    st.add_argument("--alg", required=True, choices=sorted(ALGORITHMS))
    st.add_argument("--n", type=int, required=True)
    st.add_argument("--threads", type=int, default=4)
    st.add_argument("--ops", type=int, default=200)
    st.add_argument("--runs", type=int, default=1)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--check", default="RB,S")
    st.set_defaults(fn=cmd_stress)

    ck = sub.add_parser("check", help="run axiom suites over a recorded history")
    ck.add_argument("--history", required=True)
    ck.add_argument("--suites", default="S")
    ck.add_argument("--out", default=None)
    ck.set_defaults(fn=cmd_check)

    ln = sub.add_parser("linearize", help="construct and validate a linearization")
    ln.add_argument("--history", required=True)
    ln.add_argument("--oracle", action="store_true")
    ln.add_argument("--guard", type=int, default=10)
    ln.add_argument("--out", default=None)
    ln.set_defaults(fn=cmd_linearize)

    rp = sub.add_parser("repro", help="replay a scripted scenario")
    rp.add_argument("scenario", choices=["naive_03", "jayanti1_fig3"])
    rp.add_argument("--out", default=None)
    rp.set_defaults(fn=cmd_repro)

    de = sub.add_parser("dump-edges", help="export derived relations as edge lists")
    de.add_argument("--history", required=True)
    de.add_argument("--labels", default="rf,ll")
    de.add_argument("--out", default=None)
    de.set_defaults(fn=cmd_dump_edges)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ScriptError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
