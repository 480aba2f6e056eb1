"""One-off calibration probe for the environment-difficulty ordering (not part
of the package)."""

import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from evobot.evolution import EvoConfig, controller_evaluator, evolve
from evobot.experiments import EnvSpec, _derive_seed, _env_entropy
from evobot.fitness import FitnessConfig, evaluate_trial
from evobot.world import DEFAULT_BODY, TerrainKind, make_world

CELLS = [
    EnvSpec(TerrainKind.FLAT, 0),
    EnvSpec(TerrainKind.FLAT, 5),
    EnvSpec(TerrainKind.BUMPY, 0),
    EnvSpec(TerrainKind.BUMPY, 5),
    EnvSpec(TerrainKind.COMBINED, 5),
]

GENS = int(sys.argv[1]) if len(sys.argv) > 1 else 25
TRAIN_STEPS = int(sys.argv[2]) if len(sys.argv) > 2 else 250
SEEDS = list(range(int(sys.argv[3]) if len(sys.argv) > 3 else 10))


def run_cell(args):
    seed, env = args
    world = make_world(env.kind, env.obstacles, _derive_seed(seed, _env_entropy(env), 1))
    fcfg = FitnessConfig(max_steps=TRAIN_STEPS)
    evaluate, ops, build = controller_evaluator(world, DEFAULT_BODY, fcfg, 2, trial_seeds=(0, 2))
    evo = EvoConfig(pop_size=20, generations=GENS, seed=_derive_seed(seed, _env_entropy(env), 2))
    best, _ = evolve(evo, evaluate, ops)
    champion = build(best.genome)
    assess = replace(fcfg, max_steps=300)
    results = [evaluate_trial(world, DEFAULT_BODY, champion, assess, seed=t) for t in range(25)]
    mean_fit = sum(r.fitness for r in results) / len(results)
    reached = [r for r in results if r.reached]
    rot = (
        sum(r.rotations_left + r.rotations_right for r in reached) / len(reached)
        if reached
        else float("nan")
    )
    return seed, env.label, mean_fit, best.fitness, len(reached), rot


def main():
    jobs = [(seed, env) for seed in SEEDS for env in CELLS]
    rows = []
    for job in jobs:
        row = run_cell(job)
        rows.append(row)
        print("cell done:", row, flush=True)
    by_seed = {}
    for seed, label, mean_fit, best_fit, n_reach, rot in rows:
        by_seed.setdefault(seed, {})[label] = (mean_fit, best_fit, n_reach, rot)
    order_ok = 0
    rot_ok = 0
    for seed in SEEDS:
        cells = by_seed[seed]
        f_no = cells["flat/no-obs"][0]
        f_ob = cells["flat/obs"][0]
        b_no = cells["bumpy/no-obs"][0]
        b_ob = cells["bumpy/obs"][0]
        c_ob = cells["combined/obs"][0]
        chain = f_no > f_ob > b_no > b_ob
        comb_min = c_ob < min(f_no, f_ob, b_no, b_ob)
        ok = chain and comb_min
        order_ok += ok
        rot_flat = cells["flat/no-obs"][3]
        rot_bumpy = cells["bumpy/no-obs"][3]
        r_ok = rot_bumpy > rot_flat
        rot_ok += bool(r_ok)
        print(
            f"seed {seed}: f/no={f_no:.3f} f/ob={f_ob:.3f} b/no={b_no:.3f} "
            f"b/ob={b_ob:.3f} c/ob={c_ob:.3f} chain={chain} comb_min={comb_min} "
            f"| rot flat={rot_flat:.1f} bumpy={rot_bumpy:.1f} rot_ok={r_ok} "
            f"| reach f/no={cells['flat/no-obs'][2]} b/no={cells['bumpy/no-obs'][2]} c/ob={cells['combined/obs'][2]}"
        )
    print(f"\nordering ok in {order_ok}/10 seeds; rotations ok in {rot_ok}/10 seeds")


if __name__ == "__main__":
    main()
