"""Command-line entry point.

Subcommands wrap the library: ``parse`` validates genotype files, ``evolve``
runs the standard / co-evolution / ecology regimes, ``simulate`` replays one
controller through one trial, ``diagnose`` ranks failure hypotheses for
recorded traces, ``experiment`` produces the environment-matrix artifacts,
and ``serve`` starts the user-guided-evolution session server.

Exit codes: 0 success, 1 usage error, 2 configuration error, 3 runtime
failure.  Errors print one machine-readable line on stderr of the form
``evobot-error kind=<usage|config|runtime>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import genotype
from .config import Config, ConfigError, load_config
from .controller import Controller, Topology
from .estimation import diagnose, read_trace, write_diagnosis_report
from .evolution import (
    EvoConfig,
    GuidedSession,
    LayoutOps,
    Mode,
    VectorOps,
    coevolve,
    controller_evaluator,
    ecology_run,
    evolve,
    robot_vs_layout_cross_eval,
)
from .experiments import export, run_failure_distribution, run_matrix
from .fitness import append_result_row, run_trial
from .server import SessionServer

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        raise _UsageError(message)


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(f"evobot-error kind={kind}: {message}\n")
    return code


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="configuration file")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override one config value (repeatable)",
    )
    p.add_argument("--seed", type=int, help="shorthand for --set evolution.seed=N")
    p.add_argument("--workers", type=int, help="shorthand for --set evolution.workers=N")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument(
        "--dump-config",
        action="store_true",
        help="print the effective configuration and exit",
    )


def _effective_config(args) -> Config:
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"evolution.seed={args.seed}")
    if args.workers is not None:
        overrides.append(f"evolution.workers={args.workers}")
    return load_config(args.config, overrides)


def _prepare_out(args, cfg: Config) -> str | None:
    if args.out is None:
        return None
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "effective.cfg"), "w") as fh:
        fh.write(cfg.dump())
    return args.out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evobot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate genotype files and print plan stats")
    p.add_argument("file", help="genotype file: one genotype per line, # comments")

    p = sub.add_parser("evolve", help="run evolution per [evolution] mode")
    _add_common(p)

    p = sub.add_parser("simulate", help="run one trial of a saved controller")
    p.add_argument("controller", help="controller file")
    _add_common(p)
    p.add_argument("--trial-seed", type=int, default=0, help="start-corner / noise seed")

    p = sub.add_parser("diagnose", help="rank failure hypotheses for trace files")
    p.add_argument("traces", nargs="+", help="trace CSV files")
    _add_common(p)

    p = sub.add_parser("experiment", help="run the environment matrix and export CSVs")
    _add_common(p)

    p = sub.add_parser("serve", help="start the user-guided evolution server")
    _add_common(p)
    p.add_argument("--port", type=int, help="shorthand for --set session.port=N")
    p.add_argument("--ui-dir", help="static UI directory to serve at /")
    return parser


# ---------------------------------------------------------------------------
# Commands


def cmd_parse(args) -> int:
    try:
        with open(args.file) as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        return _fail("runtime", str(err), EXIT_RUNTIME)
    bad = 0
    for number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            plan = genotype.parse(text)
        except (genotype.GenotypeSyntaxError, genotype.GenotypeSemanticError) as err:
            bad += 1
            print(f"line {number}: INVALID {err}")
            continue
        hidden = plan.hidden_count()
        print(
            f"line {number}: parts={len(plan.parts)} joints={len(plan.joints)} "
            f"neurons={len(plan.neurons)} hidden={hidden} "
            f"connections={len(plan.connections)}"
        )
    if bad:
        return _fail("runtime", f"{bad} invalid genotype(s) in {args.file}", EXIT_RUNTIME)
    return EXIT_OK


def cmd_evolve(args) -> int:
    cfg = _effective_config(args)
    if args.dump_config:
        print(cfg.dump(), end="")
        return EXIT_OK
    evo = cfg.evo_cfg()
    world = cfg.world()
    body = cfg.body()
    fcfg = cfg.fitness_cfg()
    out = _prepare_out(args, cfg)
    n_hidden = int(cfg.get("controller", "n_hidden"))

    if evo.mode is Mode.STANDARD:
        plast = cfg.plasticity()
        evaluate, ops, build = controller_evaluator(
            world,
            body,
            fcfg,
            n_hidden,
            lifetime_learning=evo.lifetime_learning,
            eta=plast.eta,
            weight_clip=plast.weight_clip,
        )
        best, log = evolve(evo, evaluate, ops)
        print(f"best fitness {best.fitness!r} after {evo.generations} generations")
        if out:
            log.write_csv(os.path.join(out, "runlog.csv"))
            log.write_snapshots(os.path.join(out, "snapshots.txt"))
            build(best.genome).save(os.path.join(out, "best_controller.txt"))
    elif evo.mode is Mode.COEVOLUTION:
        layout_ops = LayoutOps(world, body)
        cross = robot_vs_layout_cross_eval(world, body, fcfg, layout_ops, n_hidden)
        cfg_b = replace(evo, seed=evo.seed + 1)
        best_a, best_b, log_a, log_b = coevolve(
            evo, cfg_b, cross, VectorOps(Topology(n_hidden).n_weights), layout_ops
        )
        print(
            f"best robot fitness {best_a.fitness!r}; "
            f"hardest layout has {len(best_b.genome)} obstacles"
        )
        if out:
            log_a.write_csv(os.path.join(out, "runlog_robots.csv"))
            log_b.write_csv(os.path.join(out, "runlog_layouts.csv"))
            Controller(
                Topology(n_hidden), np.asarray(best_a.genome, float), fcfg.threshold
            ).save(os.path.join(out, "best_controller.txt"))
            with open(os.path.join(out, "best_layout.txt"), "w") as fh:
                fh.write(layout_ops.to_text(best_b.genome) + "\n")
    elif evo.mode is Mode.VIRTUAL_ECOLOGY:
        eco = cfg.ecology_cfg()
        steps = int(cfg.get("ecology", "steps"))
        log = ecology_run(eco, world, steps, body=body, fcfg=fcfg)
        print(
            f"ecology {log.status} after {log.steps_run} steps: "
            f"{len(log.deaths)} deaths, {len(log.respawns)} respawns, "
            f"{log.feedings} feedings"
        )
        if out:
            with open(os.path.join(out, "ecology.json"), "w") as fh:
                json.dump(
                    {
                        "status": log.status,
                        "steps_run": log.steps_run,
                        "deaths": log.deaths,
                        "respawns": log.respawns,
                        "feedings": log.feedings,
                        "alive_per_step": log.alive_per_step,
                        "lineages": {str(k): v for k, v in log.lineages.items()},
                        "survivors": log.survivors,
                    },
                    fh,
                )
    else:
        return _fail(
            "config", "mode 'guided' runs under the serve command", EXIT_CONFIG
        )
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _effective_config(args)
    if args.dump_config:
        print(cfg.dump(), end="")
        return EXIT_OK
    try:
        controller = Controller.load(args.controller)
    except (OSError, ValueError) as err:
        return _fail("runtime", f"cannot load controller: {err}", EXIT_RUNTIME)
    world = cfg.world()
    body = cfg.body()
    fcfg = cfg.fitness_cfg()
    out = _prepare_out(args, cfg)
    result, trace = run_trial(world, body, controller, fcfg, args.trial_seed)
    print(
        f"fitness={result.fitness!r} reached={result.reached} "
        f"steps={result.steps_used} rotations_l={result.rotations_left!r} "
        f"rotations_r={result.rotations_right!r} "
        f"sensor_performance={result.sensor_performance!r}"
    )
    if out:
        trace.write_csv(os.path.join(out, "trajectory.csv"))
        append_result_row(
            os.path.join(out, "results.csv"),
            args.trial_seed,
            world.terrain.kind.value,
            result,
        )
    return EXIT_OK


def cmd_diagnose(args) -> int:
    cfg = _effective_config(args)
    if args.dump_config:
        print(cfg.dump(), end="")
        return EXIT_OK
    out = _prepare_out(args, cfg)
    try:
        traces = [read_trace(path) for path in args.traces]
    except (OSError, ValueError, KeyError) as err:
        return _fail("runtime", f"cannot read trace: {err}", EXIT_RUNTIME)
    ranking = diagnose(traces, cfg.estimation_evo_cfg())
    for rank, (case, score) in enumerate(ranking, start=1):
        print(f"{rank:>2}. {case.value:<18} discrepancy {score!r}")
    if out:
        write_diagnosis_report(
            ranking,
            os.path.join(out, "diagnosis.csv"),
            os.path.join(out, "diagnosis.txt"),
        )
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _effective_config(args)
    if args.dump_config:
        print(cfg.dump(), end="")
        return EXIT_OK
    plan = cfg.experiment_plan()
    evo = cfg.evo_cfg()
    fcfg = cfg.fitness_cfg()
    out = _prepare_out(args, cfg) or "."
    report = run_matrix(plan, evo, fcfg, cfg.body())
    failure_trials = int(cfg.get("experiment", "failure_trials"))
    report.failure_counts = run_failure_distribution(
        plan, failure_trials, evo, fcfg, cfg.body()
    )
    paths = export(report, out)
    for summary in report.summaries:
        print(
            f"{summary.env:<16} mean={summary.mean_fitness:.3f} "
            f"max={summary.max_fitness:.3f} reach={summary.reach_rate:.2f}"
        )
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_serve(args) -> int:
    overrides = list(args.overrides)
    if args.port is not None:
        overrides.append(f"session.port={args.port}")
    args.overrides = overrides
    cfg = _effective_config(args)
    if args.dump_config:
        print(cfg.dump(), end="")
        return EXIT_OK
    _prepare_out(args, cfg)
    session = GuidedSession(
        replace(cfg.evo_cfg(), pop_size=int(cfg.get("session", "pop_size"))),
        cfg.world(),
        cfg.body(),
        cfg.fitness_cfg(),
        n_hidden=int(cfg.get("session", "n_hidden")),
        timeout_s=float(cfg.get("session", "timeout_s")),
    )
    server = SessionServer(session, port=int(cfg.get("session", "port")), ui_dir=args.ui_dir)
    print(f"serving user-guided evolution on {server.url}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return EXIT_OK


_COMMANDS = {
    "parse": cmd_parse,
    "evolve": cmd_evolve,
    "simulate": cmd_simulate,
    "diagnose": cmd_diagnose,
    "experiment": cmd_experiment,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("EVOBOT_LOG", "WARNING"))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        return _fail("usage", str(err), EXIT_USAGE)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as err:
        return _fail("config", str(err), EXIT_CONFIG)
    except KeyboardInterrupt:
        return _fail("runtime", "interrupted", EXIT_RUNTIME)
    except Exception as err:  # surface anything else as a runtime failure
        return _fail("runtime", f"{type(err).__name__}: {err}", EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
