"""Command line entry point: run, baseline, render, validate."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import config as cfgmod
from . import runner
from .errors import ChiplaceError, ConfigError
from .evaluate import Evaluator

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _algorithms(text: str) -> list[str]:
    return [a.strip().lower() for a in text.split(",") if a.strip()]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chiplace", description="Chiplet placement and interconnect co-optimization.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the configured optimizers")
    run.add_argument("config")
    run.add_argument("--out", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--algorithms", type=_algorithms, help="comma separated subset of br,ga,sa")
    run.add_argument("--eval-budget", type=int, help="cost evaluations per run; overrides the time budget")
    run.add_argument("--jobs", type=int)

    base = sub.add_parser("baseline", help="evaluate the mesh baseline only")
    base.add_argument("config")
    base.add_argument("--out", required=True)
    base.add_argument("--seed", type=int)

    ren = sub.add_parser("render", help="redraw the SVGs of a results file")
    ren.add_argument("results")
    ren.add_argument("--out", required=True)

    val = sub.add_parser("validate", help="check a config file")
    val.add_argument("config")
    return p


def _cmd_run(args) -> int:
    cfg = cfgmod.load(args.config)
    if args.eval_budget is not None and args.eval_budget < 1:
        raise ConfigError([("/general/eval_budget", "must be >= 1")])
    if args.jobs is not None and args.jobs < 1:
        raise ConfigError([("/general/jobs", "must be >= 1")])
    jobs = args.jobs if args.jobs is not None else cfg["general"]["jobs"]
    eff = runner.effective_config(cfg, args.seed, args.algorithms, args.eval_budget)
    cfgmod.build(cfgmod.validate(eff))
    bundle = runner.run_experiment(eff, jobs=jobs)
    runner.write_outputs(bundle, args.out)
    failed = [r for r in bundle.runs if r.error]
    for r in failed:
        print(f"run {r.algorithm}/{r.repetition} failed: {r.error}", file=sys.stderr)
    for alg in dict.fromkeys(r.algorithm for r in bundle.runs):
        best = bundle.best(alg)
        if best is not None:
            print(f"{alg}: best cost {best.solution.report.total:.6f} (repetition {best.repetition})")
    if bundle.baseline is not None:
        print(f"baseline: cost {bundle.baseline.report.total:.6f}")
    else:
        print(f"baseline unavailable: {bundle.baseline_error}", file=sys.stderr)
    return EXIT_RUNTIME if failed else EXIT_OK


def _cmd_baseline(args) -> int:
    cfg = runner.effective_config(cfgmod.load(args.config), args.seed)
    exp, rep = runner._setup(cfg)
    norm = runner.normalizers_for(exp, rep)
    cand = runner.build_baseline(exp.arch, rep)
    report = Evaluator(exp.arch.latency, exp.weights, norm).report(cand)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    runner.render_svg(runner.placed_chiplets(rep, cand), cand.topology, out / "baseline.svg",
                      cfg["output"]["svg_scale"], "baseline")
    doc = {"config": cfg, "normalizers": norm.to_dict(), "baseline": runner.Solution.of(cand, report).to_dict()}
    runner.write_atomic(out / "baseline.json", json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(f"baseline: cost {report.total:.6f}")
    return EXIT_OK


def _cmd_render(args) -> int:
    try:
        bundle = runner.ResultBundle.load(args.results)
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ConfigError([("", f"cannot load {args.results}: {e}")]) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    runner.write_svgs(bundle, out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = cfgmod.load(args.config)
    exp = cfgmod.build(cfg)
    runner.make_representation(exp)
    print(f"{args.config}: ok ({exp.arch.n} chiplets, {exp.representation})")
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "baseline": _cmd_baseline, "render": _cmd_render, "validate": _cmd_validate}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(e, file=sys.stderr)
        return EXIT_CONFIG
    except ChiplaceError as e:
        if isinstance(e, ValueError):
            print(f"invalid configuration: {e}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
