#!/usr/bin/env python3
"""Evolve a neural navigator on an obstacle course with the standard GA."""

from evobot.evolution import EvoConfig, controller_evaluator, evolve
from evobot.fitness import FitnessConfig, evaluate_trial
from evobot.world import DEFAULT_BODY, TerrainKind, make_world

world = make_world(TerrainKind.FLAT, obstacles=5, seed=4)
fcfg = FitnessConfig(max_steps=250)
evaluate, ops, build = controller_evaluator(world, DEFAULT_BODY, fcfg, n_hidden=2,
                                            trial_seeds=(0, 2))

evo = EvoConfig(pop_size=20, generations=20, seed=1)
best, log = evolve(evo, evaluate, ops)

print("generation   best    mean")
for rec in log.records:
    if rec.generation % 4 == 0 or rec.generation == evo.generations:
        print(f"{rec.generation:>10}   {rec.best:.3f}   {rec.mean:.3f}")

champion = build(best.genome)
print("\nchampion relocated to each corner:")
for corner in range(4):
    result = evaluate_trial(world, DEFAULT_BODY, champion, fcfg, seed=corner)
    print(
        f"  corner {corner}: fitness {result.fitness:.3f} "
        f"reached={result.reached} rotations L/R "
        f"{result.rotations_left:.1f}/{result.rotations_right:.1f}"
    )

champion.save("navigator.txt")
log.write_csv("navigator_curve.csv")
print("\nsaved navigator.txt and navigator_curve.csv")
print("replay it with: evobot simulate navigator.txt --out replay")
