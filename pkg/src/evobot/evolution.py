"""Genetic-algorithm engine and its population regimes.

One generational engine drives everything: tournament selection, optional
crossover, mutation, and elitism, all fed from a single seeded random stream
so runs are reproducible bit-for-bit.  Fitness evaluation is the only
parallel part; results are merged back by population index, which makes the
log identical whether one or many workers evaluate.

Genome handling is pluggable through a small ops object (random / mutate /
crossover / copy), with two stock implementations: flat weight vectors with
Gaussian mutation and uniform crossover, and grammar genotypes that reuse the
genotype module's closed operators.  On top of the engine sit three regimes:

* ``coevolve`` pits a controller population against a population of obstacle
  layouts, each side scored against the other's current best.
* ``ecology_run`` drops many robots into one shared world with per-step
  energy accounting; the only selection is survival, with dead robots
  replaced by mutated copies of tournament winners among the living.
* ``GuidedSession`` replaces the fitness function with a human: it evaluates
  a generation, waits for a selection, and breeds the next generation from
  the chosen individuals.
"""

from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import genotype as genotype_mod
from .controller import Controller, PlasticityConfig, PlasticityRule, Topology, random_controller
from .fitness import FitnessConfig, run_trial
from .world import (
    DEFAULT_BODY,
    Obstacle,
    RobotBody,
    RobotState,
    World,
    reached_target,
    sense,
    start_corners,
    step,
)

logger = logging.getLogger(__name__)

__all__ = [
    "Mode",
    "EvoConfig",
    "EcologyConfig",
    "Individual",
    "RunLog",
    "VectorOps",
    "GenotypeOps",
    "LayoutOps",
    "evolve",
    "coevolve",
    "ecology_run",
    "EcologyLog",
    "GuidedSession",
    "InvalidSelection",
    "controller_evaluator",
    "robot_vs_layout_cross_eval",
]


class Mode(Enum):
    STANDARD = "standard"
    COEVOLUTION = "coevolution"
    VIRTUAL_ECOLOGY = "ecology"
    USER_GUIDED = "guided"


@dataclass(frozen=True)
class EvoConfig:
    pop_size: int = 20
    generations: int = 40
    tournament_k: int = 3
    elitism_count: int = 2
    sigma: float = 0.3
    crossover_prob: float = 0.7
    seed: int = 0
    mode: Mode = Mode.STANDARD
    lifetime_learning: bool = False
    workers: int = 1
    stagnation_window: int = 20

    def __post_init__(self):
        if self.pop_size < 2:
            raise ValueError("pop_size must be >= 2")
        if self.elitism_count < 1:
            raise ValueError("elitism_count must be >= 1")
        if self.tournament_k < 1:
            raise ValueError("tournament_k must be >= 1")


@dataclass
class Individual:
    genome: object
    fitness: float | None = None
    id: int = -1
    parents: tuple[int, ...] = ()
    root_ids: frozenset = frozenset()


@dataclass
class GenRecord:
    generation: int
    best: float
    mean: float
    min: float
    evaluations: int


@dataclass
class RunLog:
    records: list[GenRecord] = field(default_factory=list)
    snapshots: list[tuple[int, str]] = field(default_factory=list)  # (generation, best genome)

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("generation,best,mean,min,evaluations\n")
            for r in self.records:
                fh.write(f"{r.generation},{r.best!r},{r.mean!r},{r.min!r},{r.evaluations}\n")

    def write_snapshots(self, path) -> None:
        with open(path, "w") as fh:
            for gen, text in self.snapshots:
                fh.write(f"{gen}\t{text}\n")

    @property
    def best_curve(self) -> list[float]:
        return [r.best for r in self.records]


# ---------------------------------------------------------------------------
# Genome operations


class VectorOps:
    """Flat real vector: uniform [-1, 1] init, Gaussian mutation, uniform
    crossover."""

    def __init__(self, n_genes: int, init_scale: float = 1.0):
        self.n_genes = n_genes
        self.init_scale = init_scale

    def random(self, rng: np.random.Generator):
        return rng.uniform(-self.init_scale, self.init_scale, self.n_genes)

    def mutate(self, genome, rng: np.random.Generator, sigma: float):
        return genome + rng.normal(0.0, sigma, self.n_genes)

    def crossover(self, a, b, rng: np.random.Generator):
        mask = rng.random(self.n_genes) < 0.5
        return np.where(mask, a, b)

    def copy(self, genome):
        return np.array(genome, copy=True)

    def to_text(self, genome) -> str:
        return " ".join(repr(float(g)) for g in genome)


class GenotypeOps:
    """Grammar-genotype genome behind the same interface, reusing the closed
    mutation/crossover operators."""

    def __init__(self, template: str = "X(X,X)", rates: genotype_mod.MutationRates | None = None):
        self.template = template
        self.rates = rates or genotype_mod.MutationRates()

    def random(self, rng: np.random.Generator):
        return genotype_mod.mutate(self.template, self.rates, int(rng.integers(2**31)))

    def mutate(self, genome, rng: np.random.Generator, sigma: float):
        rates = replace(self.rates, weight_sigma=sigma)
        return genotype_mod.mutate(genome, rates, int(rng.integers(2**31)))

    def crossover(self, a, b, rng: np.random.Generator):
        return genotype_mod.crossover(a, b, int(rng.integers(2**31)))

    def copy(self, genome):
        return genome

    def to_text(self, genome) -> str:
        return genome


class LayoutOps:
    """Obstacle-layout genome for co-evolution: a tuple of (x, y, radius)
    circles constrained away from the start corners and the target."""

    def __init__(self, world: World, body: RobotBody = DEFAULT_BODY, max_obstacles: int = 6):
        self.world = world
        self.body = body
        self.max_obstacles = max_obstacles

    def _valid(self, x: float, y: float, r: float) -> bool:
        b = self.world.bounds
        if not b.contains(x, y, margin=r + self.body.body_radius + 0.2):
            return False
        for cx, cy in start_corners(b, self.body):
            if math.hypot(x - cx, y - cy) < r + self.body.body_radius + 0.5:
                return False
        tx, ty = self.world.target.center
        if math.hypot(x - tx, y - ty) < r + self.world.target.radius + 2.0 * self.body.body_radius:
            return False
        return True

    def _random_circle(self, rng: np.random.Generator):
        b = self.world.bounds
        for _ in range(100):
            r = float(rng.uniform(0.5, 1.2))
            x = float(rng.uniform(b.x_min, b.x_max))
            y = float(rng.uniform(b.y_min, b.y_max))
            if self._valid(x, y, r):
                return (x, y, r)
        return None

    def random(self, rng: np.random.Generator):
        n = int(rng.integers(1, self.max_obstacles + 1))
        circles = [self._random_circle(rng) for _ in range(n)]
        return tuple(c for c in circles if c is not None)

    def mutate(self, genome, rng: np.random.Generator, sigma: float):
        out = list(genome)
        for i, (x, y, r) in enumerate(out):
            if rng.random() < 0.8:
                nx = x + float(rng.normal(0.0, sigma * 2.0))
                ny = y + float(rng.normal(0.0, sigma * 2.0))
                if self._valid(nx, ny, r):
                    out[i] = (nx, ny, r)
        if rng.random() < 0.2 and len(out) < self.max_obstacles:
            c = self._random_circle(rng)
            if c is not None:
                out.append(c)
        if rng.random() < 0.2 and len(out) > 1:
            out.pop(int(rng.integers(len(out))))
        return tuple(out)

    def crossover(self, a, b, rng: np.random.Generator):
        pool = list(a) + list(b)
        if not pool:
            return ()
        n = max(1, min(self.max_obstacles, (len(a) + len(b)) // 2))
        idx = rng.permutation(len(pool))[:n]
        return tuple(pool[i] for i in sorted(idx))

    def copy(self, genome):
        return tuple(genome)

    def to_text(self, genome) -> str:
        return ";".join(f"{x!r},{y!r},{r!r}" for x, y, r in genome)

    def to_world(self, genome) -> World:
        obstacles = tuple(Obstacle((x, y), r) for x, y, r in genome)
        return replace(self.world, obstacles=obstacles)


# ---------------------------------------------------------------------------
# Core generational engine


def _evaluate_population(
    population: list[Individual],
    evaluate: Callable[[Individual], float],
    workers: int,
) -> int:
    todo = [ind for ind in population if ind.fitness is None]
    if workers > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, todo))
    else:
        results = [evaluate(ind) for ind in todo]
    for ind, fit in zip(todo, results):
        ind.fitness = float(fit)
    return len(todo)


class _GaState:
    def __init__(self, cfg: EvoConfig, ops, initial_genomes=None):
        self.cfg = cfg
        self.ops = ops
        self.rng = np.random.default_rng(cfg.seed)
        self.next_id = 0
        self.log = RunLog()
        genomes = []
        if initial_genomes is not None:
            genomes = [ops.copy(g) for g in initial_genomes][: cfg.pop_size]
        while len(genomes) < cfg.pop_size:
            genomes.append(ops.random(self.rng))
        self.population = [self._fresh(g) for g in genomes]
        self.generation = 0

    def _fresh(self, genome, parents: tuple[int, ...] = (), roots=None) -> Individual:
        ind = Individual(genome=genome, id=self.next_id, parents=parents)
        ind.root_ids = frozenset([ind.id]) if roots is None else roots
        self.next_id += 1
        return ind

    def best(self) -> Individual:
        return max(self.population, key=lambda i: (i.fitness, -i.id))

    def _tournament(self) -> Individual:
        k = min(self.cfg.tournament_k, len(self.population))
        picks = self.rng.integers(0, len(self.population), k)
        chosen = min(picks, key=lambda j: (-self.population[j].fitness, j))
        return self.population[int(chosen)]

    def record(self, evaluations: int) -> None:
        fits = [i.fitness for i in self.population]
        rec = GenRecord(
            generation=self.generation,
            best=max(fits),
            mean=sum(fits) / len(fits),
            min=min(fits),
            evaluations=evaluations,
        )
        self.log.records.append(rec)
        self.log.snapshots.append((self.generation, self.ops.to_text(self.best().genome)))
        window = self.cfg.stagnation_window
        if window > 0 and len(self.log.records) > window:
            recent = self.log.best_curve[-window - 1 :]
            if max(recent) - min(recent) < 1e-12:
                logger.warning(
                    "stagnation: best fitness flat for %d generations (%.6f)",
                    window,
                    recent[-1],
                )

    def breed(self) -> None:
        cfg = self.cfg
        order = sorted(self.population, key=lambda i: (-i.fitness, i.id))
        elites = order[: cfg.elitism_count]
        offspring: list[Individual] = []
        while len(elites) + len(offspring) < cfg.pop_size:
            a = self._tournament()
            if self.rng.random() < cfg.crossover_prob:
                b = self._tournament()
                genome = self.ops.crossover(a.genome, b.genome, self.rng)
                parents = (a.id, b.id)
                roots = a.root_ids | b.root_ids
            else:
                genome = self.ops.copy(a.genome)
                parents = (a.id,)
                roots = a.root_ids
            genome = self.ops.mutate(genome, self.rng, cfg.sigma)
            offspring.append(self._fresh(genome, parents, roots))
        self.population = elites + offspring
        self.generation += 1


def evolve(
    cfg: EvoConfig,
    evaluate: Callable[[Individual], float],
    ops,
    *,
    initial_genomes=None,
    on_generation: Callable[[_GaState], None] | None = None,
) -> tuple[Individual, RunLog]:
    """Run the generational GA; returns the best individual of the final
    population and the per-generation log.  Deterministic for a given
    (cfg, ops, evaluate) regardless of ``cfg.workers``."""
    state = _GaState(cfg, ops, initial_genomes)
    evals = _evaluate_population(state.population, evaluate, cfg.workers)
    state.record(evals)
    if on_generation:
        on_generation(state)
    for _ in range(cfg.generations):
        state.breed()
        evals = _evaluate_population(state.population, evaluate, cfg.workers)
        state.record(evals)
        if on_generation:
            on_generation(state)
    return state.best(), state.log


# ---------------------------------------------------------------------------
# Controller evaluation plumbing shared by the regimes


def controller_evaluator(
    world: World,
    body: RobotBody,
    fcfg: FitnessConfig,
    n_hidden: int = 2,
    *,
    lifetime_learning: bool = False,
    eta: float = 0.005,
    weight_clip: float = 4.0,
    start: tuple | None = None,
    trial_seeds: tuple[int, ...] = (0,),
    sim=None,
):
    """Build an (evaluate, ops, build) triple for weight-vector controller
    evolution on a fixed world.  ``trial_seeds`` selects the start corners an
    individual is scored on (mean over them); training on more than one
    corner buys controllers that survive relocation."""
    topo = Topology(n_hidden)
    plast = (
        PlasticityConfig(PlasticityRule.HEBBIAN, eta=eta, weight_clip=weight_clip)
        if lifetime_learning
        else PlasticityConfig()
    )

    def build(genome) -> Controller:
        return Controller(topo, np.asarray(genome, float), fcfg.threshold, plast)

    def evaluate(ind: Individual) -> float:
        total = 0.0
        for trial_seed in trial_seeds:
            result, _ = run_trial(
                world, body, build(ind.genome), fcfg, trial_seed, start=start, sim=sim
            )
            total += result.fitness
        return total / len(trial_seeds)

    return evaluate, VectorOps(topo.n_weights), build


# ---------------------------------------------------------------------------
# Co-evolution: controllers vs obstacle layouts


def coevolve(
    cfg_a: EvoConfig,
    cfg_b: EvoConfig,
    cross_eval: Callable[[object, object], tuple[float, float]],
    ops_a,
    ops_b,
    *,
    initial_a=None,
    initial_b=None,
    freeze_b: bool = False,
) -> tuple[Individual, Individual, RunLog, RunLog]:
    """Alternating two-population GA.  Each A individual is scored against
    the current best of B and vice versa; with ``freeze_b`` the B population
    never breeds, which reduces the run to plain ``evolve`` for A."""
    state_a = _GaState(cfg_a, ops_a, initial_a)
    state_b = _GaState(cfg_b, ops_b, initial_b)

    best_b = state_b.population[0]
    evals = _evaluate_population(
        state_a.population, lambda i: cross_eval(i.genome, best_b.genome)[0], cfg_a.workers
    )
    state_a.record(evals)
    best_a = state_a.best()
    evals = _evaluate_population(
        state_b.population, lambda i: cross_eval(best_a.genome, i.genome)[1], cfg_b.workers
    )
    state_b.record(evals)
    best_b = state_b.best()

    for _ in range(cfg_a.generations):
        state_a.breed()
        evals = _evaluate_population(
            state_a.population, lambda i: cross_eval(i.genome, best_b.genome)[0], cfg_a.workers
        )
        state_a.record(evals)
        best_a = state_a.best()

        if not freeze_b:
            state_b.breed()
            for ind in state_b.population:
                ind.fitness = None  # opponent changed; rescore everyone
            evals = _evaluate_population(
                state_b.population, lambda i: cross_eval(best_a.genome, i.genome)[1], cfg_b.workers
            )
            state_b.record(evals)
            best_b = state_b.best()

    return state_a.best(), state_b.best(), state_a.log, state_b.log


def robot_vs_layout_cross_eval(
    base_world: World,
    body: RobotBody,
    fcfg: FitnessConfig,
    layout_ops: LayoutOps,
    n_hidden: int = 2,
):
    """Pairwise scorer: the robot's fitness is its trial score on the
    layout's world; the layout scores the exact complement."""
    topo = Topology(n_hidden)

    def cross_eval(weights, layout) -> tuple[float, float]:
        world = layout_ops.to_world(layout)
        ctrl = Controller(topo, np.asarray(weights, float), fcfg.threshold)
        result, _ = run_trial(world, body, ctrl, fcfg, 0)
        return result.fitness, 1.0 - result.fitness

    return cross_eval


# ---------------------------------------------------------------------------
# Virtual ecology: shared world, energy survival


@dataclass(frozen=True)
class EcologyConfig:
    n_robots: int = 8
    energy_init: float = 100.0
    energy_drain: float = 1.0
    energy_gain: float = 80.0
    tournament_k: int = 2
    mutation_sigma: float = 0.3
    n_hidden: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.n_robots < 2:
            raise ValueError("n_robots must be >= 2")


@dataclass
class _EcoRobot:
    id: int
    brain: object  # Controller or callable(world, body, state, reading) -> motor
    state: RobotState
    energy: float
    parent: int | None
    birth_step: int


@dataclass
class EcologyLog:
    status: str = "completed"
    steps_run: int = 0
    deaths: list[dict] = field(default_factory=list)
    respawns: list[dict] = field(default_factory=list)
    feedings: int = 0
    alive_per_step: list[int] = field(default_factory=list)
    lineages: dict = field(default_factory=dict)  # id -> parent id (None for founders)
    survivors: list[int] = field(default_factory=list)

    def conserved(self, n_robots: int) -> bool:
        """alive + cumulative deaths == founders + cumulative respawns, at
        every recorded step."""
        for s, alive in enumerate(self.alive_per_step):
            deaths = sum(1 for d in self.deaths if d["step"] <= s)
            respawns = sum(1 for r in self.respawns if r["step"] <= s)
            if alive + deaths != n_robots + respawns:
                return False
        return True


def ecology_run(
    cfg: EcologyConfig,
    world: World,
    steps: int,
    *,
    body: RobotBody = DEFAULT_BODY,
    fcfg: FitnessConfig = FitnessConfig(),
    initial_brains: Sequence | None = None,
    initial_poses: Sequence[tuple[float, float, float]] | None = None,
) -> EcologyLog:
    """Concurrent shared-world run with survival selection.

    All robots live in one world and see each other as obstacles.  Energy
    drains every step and refills on reaching the target (the fed robot is
    relocated so it must forage again).  A robot at zero energy dies and is
    replaced by a mutated copy of an energy-tournament winner among the
    living; if everyone dies the run ends in the ``extinct`` state.
    """
    rng = np.random.default_rng(cfg.seed)
    log = EcologyLog()

    def free_pose() -> tuple[float, float, float]:
        b = world.bounds
        for _ in range(200):
            x = float(rng.uniform(b.x_min + 1, b.x_max - 1))
            y = float(rng.uniform(b.y_min + 1, b.y_max - 1))
            if not any(
                math.hypot(x - o.center[0], y - o.center[1]) < o.radius + body.body_radius + 0.2
                for o in world.obstacles
            ):
                return x, y, float(rng.uniform(-math.pi, math.pi))
        return ((b.x_min + b.x_max) / 2, (b.y_min + b.y_max) / 2, 0.0)

    def act(robot: _EcoRobot, reading) -> tuple[float, float]:
        if isinstance(robot.brain, Controller):
            return robot.brain.activate(reading)
        return robot.brain(world, body, robot.state, reading)

    def spawn_brain(parent_brain, seed: int):
        if isinstance(parent_brain, Controller):
            child = parent_brain.clone()
            child.weights = child.weights + np.random.default_rng(seed).normal(
                0.0, cfg.mutation_sigma, child.weights.shape
            )
            return child
        return parent_brain  # scripted brains respawn unchanged

    robots: list[_EcoRobot] = []
    next_id = 0
    for i in range(cfg.n_robots):
        if initial_brains is not None and i < len(initial_brains):
            brain = initial_brains[i]
        else:
            brain = random_controller(cfg.n_hidden, int(rng.integers(2**31)), fcfg.threshold)
        if initial_poses is not None and i < len(initial_poses):
            x, y, heading = initial_poses[i]
        else:
            x, y, heading = free_pose()
        robots.append(
            _EcoRobot(next_id, brain, RobotState(x, y, heading), cfg.energy_init, None, 0)
        )
        log.lineages[next_id] = None
        next_id += 1

    step_cfg = fcfg.step_cfg
    for s in range(steps):
        snapshot = {r.id: (r.state.x, r.state.y) for r in robots}
        for robot in robots:
            others = tuple(
                Obstacle(pos, body.body_radius)
                for rid, pos in snapshot.items()
                if rid != robot.id
            )
            reading = sense(world, body, robot.state, extra_obstacles=others)
            motor = act(robot, reading)
            robot.state = step(world, body, robot.state, motor, step_cfg)
            robot.energy -= cfg.energy_drain
            if reached_target(world, robot.state, body):
                robot.energy += cfg.energy_gain
                log.feedings += 1
                x, y, heading = free_pose()
                robot.state = RobotState(x, y, heading)

        dead = [r for r in robots if r.energy <= 0.0]
        if dead:
            robots = [r for r in robots if r.energy > 0.0]
            for r in dead:
                log.deaths.append(
                    {"id": r.id, "step": s, "lifespan": s - r.birth_step, "parent": r.parent}
                )
            if not robots:
                log.status = "extinct"
                log.steps_run = s + 1
                log.alive_per_step.append(0)
                return log
            for _ in dead:
                k = min(cfg.tournament_k, len(robots))
                picks = rng.integers(0, len(robots), k)
                winner = max((robots[int(j)] for j in picks), key=lambda r: (r.energy, -r.id))
                brain = spawn_brain(winner.brain, int(rng.integers(2**31)))
                x, y, heading = free_pose()
                child = _EcoRobot(
                    next_id, brain, RobotState(x, y, heading), cfg.energy_init, winner.id, s + 1
                )
                log.respawns.append({"id": child.id, "step": s, "parent": winner.id})
                log.lineages[child.id] = winner.id
                next_id += 1
                robots.append(child)
        log.alive_per_step.append(len(robots))

    log.steps_run = steps
    log.survivors = [r.id for r in robots]
    return log


# ---------------------------------------------------------------------------
# User-guided evolution


class InvalidSelection(ValueError):
    """Selection contains ids that are not in the current generation."""


@dataclass
class CandidateView:
    id: int
    fitness: float
    reached: bool
    rotations_l: float
    rotations_r: float
    sensor_performance: float
    trajectory: list[list[float]]
    root_ids: tuple[int, ...]


class GuidedSession:
    """Human-steered evolution: evaluate a generation, wait for a selection,
    breed the next one from the chosen individuals.

    The session is resumable (``save``/``load``), reports per-generation
    history with lineage shares, and pauses (without losing state) when no
    selection arrives within the timeout; the next selection resumes it.
    """

    def __init__(
        self,
        cfg: EvoConfig,
        world: World,
        body: RobotBody = DEFAULT_BODY,
        fcfg: FitnessConfig = FitnessConfig(),
        n_hidden: int = 2,
        session_id: str = "session-0",
        timeout_s: float = 600.0,
        clock: Callable[[], float] = time.monotonic,
        max_trajectory_points: int = 200,
    ):
        self.cfg = cfg
        self.world = world
        self.body = body
        self.fcfg = fcfg
        self.n_hidden = n_hidden
        self.session_id = session_id
        self.timeout_s = timeout_s
        self.clock = clock
        self.max_trajectory_points = max_trajectory_points

        self.topology = Topology(n_hidden)
        self.ops = VectorOps(self.topology.n_weights)
        self.rng = np.random.default_rng(cfg.seed)
        self.generation = 0
        self.status = "evaluating"
        self.next_id = 0
        self.history: list[dict] = []
        self._listeners: list[Callable[[dict], None]] = []
        self._results: dict[int, CandidateView] = {}

        self.population = [self._fresh(self.ops.random(self.rng)) for _ in range(cfg.pop_size)]
        self._evaluate_generation()
        self._last_activity = self.clock()

    # -- internals ----------------------------------------------------------

    def _fresh(self, genome, parents=(), roots=None) -> Individual:
        ind = Individual(genome=genome, id=self.next_id, parents=tuple(parents))
        ind.root_ids = frozenset([ind.id]) if roots is None else roots
        self.next_id += 1
        return ind

    def _emit(self, event: dict) -> None:
        for listener in list(self._listeners):
            listener(event)

    def add_listener(self, listener: Callable[[dict], None]) -> None:
        self._listeners.append(listener)

    def remove_listener(self, listener) -> None:
        if listener in self._listeners:
            self._listeners.remove(listener)

    def _evaluate_one(self, ind: Individual) -> CandidateView:
        ctrl = Controller(self.topology, np.asarray(ind.genome, float), self.fcfg.threshold)
        result, trace = run_trial(self.world, self.body, ctrl, self.fcfg, 0)
        pts = trace.positions()
        if len(pts) > self.max_trajectory_points:
            idx = np.linspace(0, len(pts) - 1, self.max_trajectory_points).astype(int)
            pts = pts[idx]
        return CandidateView(
            id=ind.id,
            fitness=result.fitness,
            reached=result.reached,
            rotations_l=result.rotations_left,
            rotations_r=result.rotations_right,
            sensor_performance=result.sensor_performance,
            trajectory=[[float(x), float(y)] for x, y in pts],
            root_ids=tuple(sorted(ind.root_ids)),
        )

    def _evaluate_generation(self) -> None:
        self.status = "evaluating"
        self._results = {}
        total = len(self.population)
        for done, ind in enumerate(self.population, start=1):
            view = self._evaluate_one(ind)
            ind.fitness = view.fitness
            self._results[ind.id] = view
            self._emit({"event": "evaluation_progress", "done": done, "total": total})
        fits = [i.fitness for i in self.population]
        shares: dict[str, float] = {}
        for ind in self.population:
            for root in ind.root_ids:
                shares[str(root)] = shares.get(str(root), 0.0) + 1.0 / len(self.population)
        self.history.append(
            {
                "generation": self.generation,
                "best": max(fits),
                "mean": sum(fits) / len(fits),
                "lineage_share": shares,
            }
        )
        self.status = "awaiting_selection"
        self._emit({"event": "generation_ready", "generation": self.generation})

    # -- public API ---------------------------------------------------------

    def candidates(self) -> list[CandidateView]:
        return [self._results[ind.id] for ind in self.population]

    def check_timeout(self) -> bool:
        """True if the session is paused for inactivity."""
        if (
            self.status == "awaiting_selection"
            and self.clock() - self._last_activity > self.timeout_s
        ):
            self.status = "paused"
            self._emit({"event": "session_paused"})
        return self.status == "paused"

    def select(self, ids: Sequence[int]) -> int:
        """Advance one generation from the selected candidate ids; returns
        the new generation number."""
        ids = list(ids)
        current = {ind.id for ind in self.population}
        if not ids or any(i not in current for i in ids):
            raise InvalidSelection(f"selection must be non-empty ids from {sorted(current)}")
        self._last_activity = self.clock()
        by_id = {ind.id: ind for ind in self.population}
        selected = [by_id[i] for i in ids]
        elites = sorted(selected, key=lambda i: (-i.fitness, i.id))[: self.cfg.elitism_count]
        new_pop: list[Individual] = list(elites)
        while len(new_pop) < self.cfg.pop_size:
            a = selected[int(self.rng.integers(len(selected)))]
            if self.rng.random() < self.cfg.crossover_prob and len(selected) > 1:
                b = selected[int(self.rng.integers(len(selected)))]
                genome = self.ops.crossover(a.genome, b.genome, self.rng)
                parents = (a.id, b.id)
                roots = a.root_ids | b.root_ids
            else:
                genome = self.ops.copy(a.genome)
                parents = (a.id,)
                roots = a.root_ids
            genome = self.ops.mutate(genome, self.rng, self.cfg.sigma)
            new_pop.append(self._fresh(genome, parents, roots))
        self.population = new_pop
        self.generation += 1
        self._evaluate_generation()
        self._last_activity = self.clock()
        return self.generation

    def info(self) -> dict:
        return {
            "session_id": self.session_id,
            "generation": self.generation,
            "pop_size": self.cfg.pop_size,
            "mode": Mode.USER_GUIDED.value,
            "status": self.status,
        }

    # -- persistence ----------------------------------------------------------

    def save(self, path) -> None:
        blob = {
            "session_id": self.session_id,
            "generation": self.generation,
            "next_id": self.next_id,
            "seed": self.cfg.seed,
            "pop_size": self.cfg.pop_size,
            "elitism_count": self.cfg.elitism_count,
            "sigma": self.cfg.sigma,
            "crossover_prob": self.cfg.crossover_prob,
            "n_hidden": self.n_hidden,
            "history": self.history,
            "rng_state": self.rng.bit_generator.state,
            "population": [
                {
                    "id": ind.id,
                    "genome": [float(g) for g in ind.genome],
                    "fitness": ind.fitness,
                    "parents": list(ind.parents),
                    "root_ids": sorted(ind.root_ids),
                }
                for ind in self.population
            ],
            "world": self.world.describe(),
        }
        with open(path, "w") as fh:
            json.dump(blob, fh)

    @classmethod
    def load(
        cls,
        path,
        world: World,
        body: RobotBody = DEFAULT_BODY,
        fcfg: FitnessConfig = FitnessConfig(),
        **kwargs,
    ) -> "GuidedSession":
        with open(path) as fh:
            blob = json.load(fh)
        cfg = EvoConfig(
            pop_size=blob["pop_size"],
            elitism_count=blob["elitism_count"],
            sigma=blob["sigma"],
            crossover_prob=blob["crossover_prob"],
            seed=blob["seed"],
            mode=Mode.USER_GUIDED,
        )
        session = cls.__new__(cls)
        session.cfg = cfg
        session.world = world
        session.body = body
        session.fcfg = fcfg
        session.n_hidden = blob["n_hidden"]
        session.session_id = blob["session_id"]
        session.timeout_s = kwargs.get("timeout_s", 600.0)
        session.clock = kwargs.get("clock", time.monotonic)
        session.max_trajectory_points = kwargs.get("max_trajectory_points", 200)
        session.topology = Topology(session.n_hidden)
        session.ops = VectorOps(session.topology.n_weights)
        session.rng = np.random.default_rng(cfg.seed)
        session.rng.bit_generator.state = blob["rng_state"]
        session.generation = blob["generation"]
        session.next_id = blob["next_id"]
        session.history = blob["history"]
        session._listeners = []
        session.population = [
            Individual(
                genome=np.array(p["genome"]),
                fitness=p["fitness"],
                id=p["id"],
                parents=tuple(p["parents"]),
                root_ids=frozenset(p["root_ids"]),
            )
            for p in blob["population"]
        ]
        session._results = {ind.id: session._evaluate_one(ind) for ind in session.population}
        session.status = "awaiting_selection"
        session._last_activity = session.clock()
        return session
