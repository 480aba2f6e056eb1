"""Desk-scale experiment matrix: evolve a controller per environment cell,
assess it with corner-relocated target-reaching trials, and export the
aggregate table, the fitness-vs-generation curves, and the fault-injection
failure distribution as stable CSV artifacts.

Seeds are derived from (replicate seed, environment content), so repeating an
identical environment in the plan reproduces identical rows, and cells can
run in any order or in parallel without changing results.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .controller import Controller, FailureCase, FailureInjection, Topology
from .evolution import EvoConfig, RunLog, controller_evaluator, evolve
from .fitness import FitnessConfig, TrialResult, evaluate_trial
from .world import DEFAULT_BODY, RobotBody, TerrainKind, World, make_world

__all__ = [
    "EnvSpec",
    "ExperimentPlan",
    "TrialRow",
    "EnvSummary",
    "Report",
    "default_matrix",
    "run_matrix",
    "run_failure_distribution",
    "export",
]


@dataclass(frozen=True)
class EnvSpec:
    kind: TerrainKind
    obstacles: int = 0

    @property
    def label(self) -> str:
        return f"{self.kind.value}/{'obs' if self.obstacles else 'no-obs'}"


def default_matrix(n_obstacles: int = 5) -> tuple[EnvSpec, ...]:
    cells = []
    for kind in (TerrainKind.FLAT, TerrainKind.BUMPY, TerrainKind.COMBINED):
        cells.append(EnvSpec(kind, 0))
        cells.append(EnvSpec(kind, n_obstacles))
    return tuple(cells)


@dataclass(frozen=True)
class ExperimentPlan:
    environments: tuple[EnvSpec, ...] = field(default_factory=default_matrix)
    trials_per_env: int = 25
    seeds: tuple[int, ...] = (0,)
    n_hidden: int = 2
    evolution_steps: int = 160  # per-trial step budget while evolving
    assessment_steps: int = 350  # step budget for each relocated trial
    train_corners: tuple[int, ...] = (0, 3)  # west corners train; all four assess

    def __post_init__(self):
        if self.trials_per_env < 1:
            raise ValueError("trials_per_env must be >= 1")
        if not self.environments:
            raise ValueError("plan needs at least one environment")
        if not self.seeds:
            raise ValueError("plan needs at least one seed")


@dataclass(frozen=True)
class TrialRow:
    env: str
    seed: int
    trial: int
    result: TrialResult


@dataclass(frozen=True)
class EnvSummary:
    env: str
    trials: int
    mean_fitness: float
    max_fitness: float
    mean_rotations_left: float
    mean_rotations_right: float
    mean_sensor_performance: float
    reach_rate: float


@dataclass
class Report:
    rows: list[TrialRow]
    summaries: list[EnvSummary]
    curves: list[tuple[str, int, int, float, float]]  # env, seed, generation, best, mean
    seed_scores: dict[str, dict[int, float]]  # env -> seed -> mean trial fitness
    failure_counts: dict[str, dict[str, int]] = field(default_factory=dict)


def _derive_seed(*parts) -> int:
    return int(np.random.SeedSequence(tuple(int(p) for p in parts)).generate_state(1)[0] % 2**31)


def _env_entropy(env: EnvSpec) -> int:
    kinds = [TerrainKind.FLAT, TerrainKind.BUMPY, TerrainKind.COMBINED]
    return kinds.index(env.kind) * 1000 + env.obstacles


def _summarize(env: str, rows: list[TrialRow]) -> EnvSummary:
    results = [r.result for r in rows]
    n = len(results)
    return EnvSummary(
        env=env,
        trials=n,
        mean_fitness=sum(r.fitness for r in results) / n,
        max_fitness=max(r.fitness for r in results),
        mean_rotations_left=sum(r.rotations_left for r in results) / n,
        mean_rotations_right=sum(r.rotations_right for r in results) / n,
        mean_sensor_performance=sum(r.sensor_performance for r in results) / n,
        reach_rate=sum(1 for r in results if r.reached) / n,
    )


def run_matrix(
    plan: ExperimentPlan,
    evo: EvoConfig,
    fcfg: FitnessConfig = FitnessConfig(),
    body: RobotBody = DEFAULT_BODY,
) -> Report:
    """For every (environment, seed): evolve a controller from the first
    corner, then score ``trials_per_env`` target-reaching trials that cycle
    the start through all four corners; aggregate per environment."""
    rows: list[TrialRow] = []
    curves: list[tuple[str, int, int, float, float]] = []
    seed_scores: dict[str, dict[int, float]] = {}
    topo = Topology(plan.n_hidden)
    for env in plan.environments:
        env_rows: list[TrialRow] = []
        for seed in plan.seeds:
            world = make_world(
                env.kind, env.obstacles, _derive_seed(seed, _env_entropy(env), 1), body=body
            )
            evo_cfg = replace(evo, seed=_derive_seed(seed, _env_entropy(env), 2))
            train_cfg = replace(fcfg, max_steps=plan.evolution_steps)
            evaluate, ops, build = controller_evaluator(
                world,
                body,
                train_cfg,
                plan.n_hidden,
                lifetime_learning=evo.lifetime_learning,
                trial_seeds=plan.train_corners,
            )
            best, log = evolve(evo_cfg, evaluate, ops)
            for rec in log.records:
                curves.append((env.label, seed, rec.generation, rec.best, rec.mean))
            assess_cfg = replace(fcfg, max_steps=plan.assessment_steps)
            champion = build(best.genome)
            trial_results = []
            for t in range(plan.trials_per_env):
                result = evaluate_trial(world, body, champion, assess_cfg, seed=t)
                trial_results.append(result)
                env_rows.append(TrialRow(env.label, seed, t, result))
            seed_scores.setdefault(env.label, {})[seed] = sum(
                r.fitness for r in trial_results
            ) / len(trial_results)
        rows.extend(env_rows)
    by_env: dict[str, list[TrialRow]] = {}
    for row in rows:
        by_env.setdefault(row.env, []).append(row)
    summaries = [_summarize(env, env_rows) for env, env_rows in by_env.items()]
    return Report(rows=rows, summaries=summaries, curves=curves, seed_scores=seed_scores)


def run_failure_distribution(
    plan: ExperimentPlan,
    n_per_case: int,
    evo: EvoConfig,
    fcfg: FitnessConfig = FitnessConfig(),
    body: RobotBody = DEFAULT_BODY,
    *,
    env: EnvSpec | None = None,
    controller: Controller | None = None,
    severity: float = 0.5,
) -> dict[str, dict[str, int]]:
    """Inject every failure case ``n_per_case`` times into seeded trials of a
    competent controller; count trials that miss the target."""
    if n_per_case < 1:
        raise ValueError("n_per_case must be >= 1")
    env = env or plan.environments[0]
    world = make_world(
        env.kind, env.obstacles, _derive_seed(plan.seeds[0], _env_entropy(env), 1), body=body
    )
    assess_cfg = replace(fcfg, max_steps=plan.assessment_steps)
    if controller is None:
        evo_cfg = replace(evo, seed=_derive_seed(plan.seeds[0], _env_entropy(env), 2))
        train_cfg = replace(fcfg, max_steps=plan.evolution_steps)
        evaluate, ops, build = controller_evaluator(world, body, train_cfg, plan.n_hidden)
        best, _ = evolve(evo_cfg, evaluate, ops)
        controller = build(best.genome)
    counts: dict[str, dict[str, int]] = {}
    for case in FailureCase:
        failures = 0
        for k in range(n_per_case):
            working = controller.clone()
            working.failure = FailureInjection(
                case=case, onset_step=0, severity=severity, rng_seed=k
            )
            result = evaluate_trial(world, body, working, assess_cfg, seed=k)
            if not result.reached:
                failures += 1
        counts[case.value] = {"trials": n_per_case, "failures": failures}
    return counts


# ---------------------------------------------------------------------------
# CSV artifacts


def export(report: Report, out_dir) -> list[str]:
    """Write table.csv, curves.csv, and failures.csv; byte-stable for a
    given report."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    table = os.path.join(out_dir, "table.csv")
    with open(table, "w") as fh:
        fh.write(
            "env,trials,mean_fitness,max_fitness,mean_rotations_left,"
            "mean_rotations_right,mean_sensor_performance,reach_rate\n"
        )
        for s in report.summaries:
            fh.write(
                f"{s.env},{s.trials},{s.mean_fitness!r},{s.max_fitness!r},"
                f"{s.mean_rotations_left!r},{s.mean_rotations_right!r},"
                f"{s.mean_sensor_performance!r},{s.reach_rate!r}\n"
            )
    paths.append(table)

    curves = os.path.join(out_dir, "curves.csv")
    with open(curves, "w") as fh:
        fh.write("env,seed,generation,best,mean\n")
        for env, seed, gen, best, mean in report.curves:
            fh.write(f"{env},{seed},{gen},{best!r},{mean!r}\n")
    paths.append(curves)

    failures = os.path.join(out_dir, "failures.csv")
    with open(failures, "w") as fh:
        fh.write("case,trials,failures,failure_rate\n")
        for case in FailureCase:
            row = report.failure_counts.get(case.value)
            if row is None:
                continue
            rate = row["failures"] / row["trials"] if row["trials"] else 0.0
            fh.write(f"{case.value},{row['trials']},{row['failures']},{rate!r}\n")
    paths.append(failures)
    return paths
