#!/usr/bin/env python3
"""A desk-scale run of the six-environment matrix with CSV artifacts."""

from evobot.evolution import EvoConfig
from evobot.experiments import ExperimentPlan, default_matrix, export, run_failure_distribution, run_matrix

plan = ExperimentPlan(
    environments=default_matrix(n_obstacles=4),
    trials_per_env=8,
    seeds=(0,),
    evolution_steps=150,
    assessment_steps=200,
)
evo = EvoConfig(pop_size=10, generations=8, seed=0)

report = run_matrix(plan, evo)
report.failure_counts = run_failure_distribution(plan, 3, evo)

print(f"{'environment':<16}{'mean':>7}{'max':>7}{'rot L':>7}{'rot R':>7}{'sens%':>7}{'reach':>7}")
for s in report.summaries:
    print(
        f"{s.env:<16}{s.mean_fitness:>7.3f}{s.max_fitness:>7.3f}"
        f"{s.mean_rotations_left:>7.1f}{s.mean_rotations_right:>7.1f}"
        f"{100 * s.mean_sensor_performance:>6.0f}%{s.reach_rate:>7.2f}"
    )

print("\nfault-injection failure counts (target missed):")
for case, row in report.failure_counts.items():
    print(f"  {case:<18} {row['failures']}/{row['trials']}")

paths = export(report, "matrix_out")
print("\nwrote " + ", ".join(paths))
print("(full-scale settings live in the [experiment] config section; see README)")
