#!/usr/bin/env python3
"""Co-evolve navigators against a population of obstacle layouts."""

import numpy as np

from evobot.controller import Topology
from evobot.evolution import (
    EvoConfig,
    LayoutOps,
    VectorOps,
    coevolve,
    robot_vs_layout_cross_eval,
)
from evobot.fitness import FitnessConfig
from evobot.world import DEFAULT_BODY, TerrainKind, make_world

base_world = make_world(TerrainKind.FLAT, obstacles=0, seed=6)
fcfg = FitnessConfig(max_steps=200)
layout_ops = LayoutOps(base_world, DEFAULT_BODY, max_obstacles=8)
cross_eval = robot_vs_layout_cross_eval(base_world, DEFAULT_BODY, fcfg, layout_ops, n_hidden=2)

cfg_robots = EvoConfig(pop_size=10, generations=8, seed=13)
cfg_layouts = EvoConfig(pop_size=10, generations=8, seed=14, sigma=0.5)
best_robot, best_layout, log_r, log_l = coevolve(
    cfg_robots, cfg_layouts, cross_eval, VectorOps(Topology(2).n_weights), layout_ops
)

print("robots vs layouts (each generation scores against the other's best):")
print("gen   robot-best   layout-best")
for rec_r, rec_l in zip(log_r.records, log_l.records):
    print(f"{rec_r.generation:>3}   {rec_r.best:>10.3f}   {rec_l.best:>11.3f}")

print(f"\nhardest evolved layout uses {len(best_layout.genome)} obstacles:")
for x, y, r in best_layout.genome:
    print(f"  circle at ({x:5.1f}, {y:5.1f}) radius {r:.2f}")

# the arms race in one number: fresh random robots score worse on the evolved
# layout than on an empty arena
rng = np.random.default_rng(0)
fresh = [VectorOps(Topology(2).n_weights).random(rng) for _ in range(10)]
on_empty = np.mean([cross_eval(g, ())[0] for g in fresh])
on_evolved = np.mean([cross_eval(g, best_layout.genome)[0] for g in fresh])
print(f"\nfresh robots: mean fitness {on_empty:.3f} on empty vs {on_evolved:.3f} on evolved layout")
