"""Command-line entry point: gen / run / summarize / verify."""

import argparse
import json
import os
import subprocess
import sys

from .bench import (
    DETERMINISTIC_ENV,
    gen_instance,
    parse_seeds,
    run_experiment,
    summarize,
    write_json,
)


def _cmd_gen(args):
    with open(args.config) as fh:
        spec = json.load(fh)
    if args.seed is not None:
        spec["seed"] = args.seed
    inst = gen_instance(spec)
    out = args.out or "instance.json"
    if os.path.isdir(out):
        out = os.path.join(out, "instance.json")
    write_json(out, inst)
    print("wrote %s (region=%s, dim=%d, m=%d)" % (
        out, inst["region"]["kind"], len(inst["objective"]["x_star"]),
        len(inst["objective"]["b"])))
    return 0


def _cmd_run(args):
    with open(args.config) as fh:
        config = json.load(fh)
    jobs = 1 if os.environ.get(DETERMINISTIC_ENV) == "1" else args.jobs
    summary, code = run_experiment(
        config,
        base_dir=os.path.dirname(os.path.abspath(args.config)),
        out_dir=args.out,
        seeds=parse_seeds(args.seeds) if args.seeds else None,
        time_limit=args.time_limit,
        jobs=jobs,
    )
    _print_summary(summary)
    return code


def _cmd_summarize(args):
    out_dir = args.out or "."
    summary = summarize(out_dir)
    write_json(os.path.join(out_dir, "summary.json"), summary)
    _print_summary(summary)
    return 0


def _cmd_verify(args):
    target = args.tests or "tests/test_acceptance.py"
    cmd = [sys.executable, "-m", "pytest", target, "-v"]
    return subprocess.call(cmd)


def _print_summary(summary):
    for name, info in sorted(summary.get("solvers", {}).items()):
        print("%s (%d runs)" % (name, info["runs"]))
        for thr in summary["thresholds"]:
            cell = info["thresholds"][thr]
            if cell["reached"]:
                print("  f<=%s: %d/%d reached, median outer_k=%d sfo=%d lmo=%d wall_ms=%.1f"
                      % (thr, cell["reached"], cell["of"], cell["outer_k"],
                         cell["sfo_calls"], cell["exact_lmo_calls"], cell["wall_ms"]))
            else:
                print("  f<=%s: 0/%d reached" % (thr, cell["of"]))
    errs = summary.get("budget_errors", [])
    for e in errs:
        print("BUDGET ERROR %s seed=%s: %s" % (e["solver"], e["seed"], e["message"]),
              file=sys.stderr)


def build_parser():
    p = argparse.ArgumentParser(
        prog="lazy-sliding",
        description="Projection-free optimization benchmarks: generate instances, "
                    "run solver experiments, and summarize convergence traces.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a problem instance from a spec file")
    g.add_argument("--config", required=True, help="generator spec JSON")
    g.add_argument("--out", help="output instance path (default instance.json)")
    g.add_argument("--seed", type=int, help="override the generator seed")
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("run", help="run an experiment config over solvers x seeds")
    r.add_argument("--config", required=True, help="experiment config JSON")
    r.add_argument("--out", help="output directory for traces + summary")
    r.add_argument("--seeds", help="seed range a..b or single seed")
    r.add_argument("--time-limit", type=float, help="wall-clock budget per run (s)")
    r.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("summarize", help="recompute summary.json from trace CSVs")
    s.add_argument("--out", help="directory holding trace CSVs (default .)")
    s.set_defaults(func=_cmd_summarize)

    v = sub.add_parser("verify", help="run the acceptance test suite")
    v.add_argument("--tests", help="pytest target (default tests/test_acceptance.py)")
    v.set_defaults(func=_cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
