#!/usr/bin/env python3
"""Human-in-the-loop evolution with a scripted 'human': always pick the
widest-turning robot and watch its lineage take over.

For the real thing, run `evobot serve --ui-dir frontend/dist` and open the
printed URL in a browser.
"""

from evobot.evolution import EvoConfig, GuidedSession
from evobot.fitness import FitnessConfig
from evobot.world import DEFAULT_BODY, TerrainKind, make_world

world = make_world(TerrainKind.FLAT, obstacles=2, seed=3)
session = GuidedSession(
    EvoConfig(pop_size=10, generations=999, seed=5, sigma=0.2),
    world,
    DEFAULT_BODY,
    FitnessConfig(max_steps=120),
)

print("generation | favorite (most left-wheel turns) | population mean rot_L | lineage share")
for _ in range(5):
    cands = session.candidates()
    favorite = max(cands, key=lambda c: c.rotations_l)
    mean_rl = sum(c.rotations_l for c in cands) / len(cands)
    share = session.history[-1]["lineage_share"].get(str(favorite.root_ids[0]), 0.0)
    print(
        f"{session.generation:>10} | #{favorite.id:<4} rot_L={favorite.rotations_l:5.1f} "
        f"| {mean_rl:>9.2f} | {share:.2f}"
    )
    session.select([favorite.id])

cands = session.candidates()
mean_rl = sum(c.rotations_l for c in cands) / len(cands)
print(f"{session.generation:>10} | (final population)              | {mean_rl:>9.2f} |")
print("\nsteering by hand needs no fitness function: the picks are the selection pressure.")
session.save("guided_session.json")
print("session saved to guided_session.json (resumable)")
