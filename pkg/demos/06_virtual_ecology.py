#!/usr/bin/env python3
"""A shared-world ecology: many robots, one arena, survival of the fed."""

import math

from evobot.evolution import EcologyConfig, ecology_run
from evobot.world import TerrainKind, make_world

world = make_world(TerrainKind.FLAT, obstacles=3, seed=2)


def forager(world_, body, state, reading):
    """Scripted target-seeker; the rest of the population starts random."""
    tx, ty = world_.target.center
    err = math.atan2(ty - state.y, tx - state.x) - state.heading
    while err > math.pi:
        err -= 2 * math.pi
    while err < -math.pi:
        err += 2 * math.pi
    return max(-1.0, min(1.0, 1 - err)), max(-1.0, min(1.0, 1 + err))


cfg = EcologyConfig(
    n_robots=8,
    energy_init=120.0,
    energy_drain=1.0,
    energy_gain=80.0,
    mutation_sigma=0.4,
    seed=5,
)
log = ecology_run(cfg, world, steps=400, initial_brains=[forager, forager])

print(f"run {log.status} after {log.steps_run} steps")
print(f"feedings: {log.feedings}, deaths: {len(log.deaths)}, respawns: {len(log.respawns)}")

print("\nfirst deaths (id, step, lifespan):")
for death in log.deaths[:6]:
    print(f"  robot {death['id']:>2} died at step {death['step']:>3} after {death['lifespan']} steps")

print("\nlineages of the survivors (child <- parent <- ...):")
for rid in log.survivors:
    chain = [rid]
    while log.lineages.get(chain[-1]) is not None:
        chain.append(log.lineages[chain[-1]])
    print("  " + " <- ".join(str(i) for i in chain))

# population accounting holds at every step: alive + deaths == founders + respawns
assert log.conserved(cfg.n_robots)
print("\npopulation accounting checks out at every step")
