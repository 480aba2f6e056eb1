#!/usr/bin/env python3
"""The full identification loop: evolve a controller in the working
simulator, run it on the hidden-parameter reference robot, then evolve
simulator parameters (including a failure hypothesis) to explain the trace."""

from evobot.controller import FailureCase, FailureInjection
from evobot.estimation import (
    SimParams,
    diagnose,
    discrepancy,
    estimation_phase,
    exploration_phase,
    run_reference,
    write_trace,
)
from evobot.evolution import EvoConfig
from evobot.fitness import FitnessConfig
from evobot.world import DEFAULT_BODY, TerrainKind, Rect, Target, make_world

world = make_world(
    TerrainKind.FLAT, obstacles=5, seed=9,
    bounds=Rect(0, 0, 16, 16), target=Target((8.0, 8.0), 1.0),
)
fcfg = FitnessConfig(max_steps=160)

# the "physical" robot secretly runs with a weak left motor
truth = SimParams(
    motor_gain_left=0.9,
    failure_hypothesis=FailureInjection(FailureCase.MOTOR_WEAK, 0, 0.6, 0),
)
working = SimParams()  # our current best guess: everything nominal

print("exploration phase: evolving a controller inside the working simulator")
controller = exploration_phase(working, EvoConfig(pop_size=12, generations=8, seed=3),
                               world, DEFAULT_BODY, fcfg)

print("reference run: executing it on the hidden-parameter robot")
trace = run_reference(controller, truth, world, 0, DEFAULT_BODY, fcfg)
write_trace(trace, "reference_trace.csv")
print(f"  recorded {len(trace)} steps -> reference_trace.csv")

before = discrepancy([trace], working).value
estimated, _ = estimation_phase([trace], EvoConfig(pop_size=14, generations=12, seed=4),
                                initial=[working])
after = discrepancy([trace], estimated).value
print(f"estimation phase: trace mismatch {before:.4f} -> {after:.4f}")
print(f"  estimated left motor gain {estimated.motor_gain_left:.2f} (true 0.9 x weak motor)")

print("\ndiagnosis: one clamped parameter search per failure case")
ranking = diagnose([trace], EvoConfig(pop_size=14, generations=10, seed=5))
for rank, (case, score) in enumerate(ranking, start=1):
    marker = "  <-- injected" if case is FailureCase.MOTOR_WEAK else ""
    print(f"  {rank:>2}. {case.value:<18} mismatch {score:.5f}{marker}")
