"""Simulator identification: explain recorded sensor traces by evolving
simulator parameters, including a failure hypothesis.

The "physical" robot is a second simulator instance with hidden true
parameters.  The loop alternates three moves: the exploration phase evolves a
controller inside the current working simulator; the reference run executes
that controller on the hidden-parameter simulator and records its sensor
trace; the estimation phase then evolves simulator parameters so that
re-simulating the same controller reproduces the recorded readings.

The mismatch score for a candidate parameter set re-simulates every recorded
controller and takes, per controller, the mean absolute difference between
recorded and re-simulated sensor channels, averaged over the controllers.
The absolute value is applied per sample: a signed sum would let errors of
opposite sign cancel and break the identity that the true parameters score
exactly zero.

``diagnose`` turns the estimation phase into a fault classifier: it runs one
parameter search per failure case with the case clamped (and, by default,
the non-failure gains frozen at the working values, since free gains can
imitate a weak or dead motor and make the no-failure hypothesis
indistinguishable).  Cases are ranked by best achieved mismatch; exact ties
go to the hypothesis with fewer tuned parameters, so an undamaged robot
ranks "nothing failed" first.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .controller import Controller, FailureCase, FailureInjection
from .evolution import EvoConfig, Individual, RunLog, controller_evaluator, evolve
from .fitness import FitnessConfig, run_trial
from .world import DEFAULT_BODY, Obstacle, Rect, RobotBody, Target, TerrainKind, Trace, World, make_world

logger = logging.getLogger(__name__)

__all__ = [
    "SimParams",
    "SensorTrace",
    "Discrepancy",
    "TraceMismatchWarning",
    "exploration_phase",
    "run_reference",
    "discrepancy",
    "estimation_phase",
    "diagnose",
    "estimation_cycle",
    "write_trace",
    "read_trace",
    "write_diagnosis_report",
]

GAIN_MIN, GAIN_MAX = 0.0, 2.0

# free parameters each failure hypothesis tunes; ties in mismatch rank the
# leaner hypothesis first
_CASE_FREE_PARAMS = {
    FailureCase.MOTOR_WEAK: 2,  # wheel choice + severity
    FailureCase.LEFT_WHEEL_DAMAGE: 0,
    FailureCase.RIGHT_WHEEL_DAMAGE: 0,
    FailureCase.BODY_DAMAGE: 1,
    FailureCase.WHEEL_NEURON_FAIL: 1,
    FailureCase.SENSOR_FAIL: 1,
    FailureCase.JOINT_FAIL: 0,
    FailureCase.HIDDEN_NEURON_FAIL: 1,
    FailureCase.NOTHING_FAIL: 0,
}


class TraceMismatchWarning(UserWarning):
    """Recorded and re-simulated traces had different lengths."""


@dataclass(frozen=True)
class SimParams:
    motor_gain_left: float = 1.0
    motor_gain_right: float = 1.0
    sensor_gains: tuple[float, ...] = (1.0,) * 10
    slope_gain: float = 1.0
    failure_hypothesis: FailureInjection | None = None

    def clamped(self) -> "SimParams":
        clip = lambda v: min(GAIN_MAX, max(GAIN_MIN, v))
        failure = self.failure_hypothesis
        if failure is not None:
            failure = replace(failure, severity=min(1.0, max(0.0, failure.severity)))
        return SimParams(
            clip(self.motor_gain_left),
            clip(self.motor_gain_right),
            tuple(clip(g) for g in self.sensor_gains),
            clip(self.slope_gain),
            failure,
        )

    def key(self):
        return (
            self.motor_gain_left,
            self.motor_gain_right,
            self.sensor_gains,
            self.slope_gain,
            self.failure_hypothesis,
        )


@dataclass
class SensorTrace:
    """A recorded trial plus everything needed to re-simulate it: the
    controller (without the hidden failure), the world, and the trial
    configuration."""

    trace: Trace
    controller: Controller
    world: World
    body: RobotBody
    fcfg: FitnessConfig
    seed: int
    start: tuple[float, float, float]

    def __len__(self) -> int:
        return len(self.trace)

    def sensors(self) -> np.ndarray:
        return self.trace.sensors()


@dataclass(frozen=True)
class Discrepancy:
    value: float
    per_controller: tuple[float, ...]


# ---------------------------------------------------------------------------
# The three phases


def exploration_phase(
    params: SimParams,
    evo: EvoConfig,
    world: World,
    body: RobotBody = DEFAULT_BODY,
    fcfg: FitnessConfig = FitnessConfig(),
    n_hidden: int = 2,
) -> Controller:
    """Evolve a task controller entirely inside the simulator configured by
    ``params``; returns the best controller."""
    evaluate, ops, build = controller_evaluator(world, body, fcfg, n_hidden, sim=params)
    best, _ = evolve(evo, evaluate, ops)
    return build(best.genome)


def run_reference(
    controller: Controller,
    true_params: SimParams,
    world: World,
    seed: int = 0,
    body: RobotBody = DEFAULT_BODY,
    fcfg: FitnessConfig = FitnessConfig(),
    start: tuple | None = None,
) -> SensorTrace:
    """Execute the controller on the reference ("physical") simulator with
    its hidden parameters and record the sensor trace."""
    working = controller.clone()
    _, trace = run_trial(world, body, working, fcfg, seed, start=start, sim=true_params)
    sx, sy, heading = (float(v) for v in trace.meta["start"].split(","))
    return SensorTrace(
        trace=trace,
        controller=controller.clone(),
        world=world,
        body=body,
        fcfg=fcfg,
        seed=seed,
        start=(sx, sy, heading),
    )


def _resimulate(st: SensorTrace, candidate: SimParams) -> Trace:
    working = st.controller.clone()
    if candidate.failure_hypothesis is None:
        candidate = replace(candidate, failure_hypothesis=FailureInjection())
    _, trace = run_trial(
        st.world,
        st.body,
        working,
        st.fcfg,
        st.seed,
        start=st.start,
        sim=candidate,
        max_steps=len(st.trace),
    )
    return trace


def discrepancy(traces: list[SensorTrace], candidate: SimParams) -> Discrepancy:
    """Mean absolute per-sample sensor mismatch, averaged over controllers.

    Zero exactly when the candidate reproduces every recorded trace.
    """
    if not traces:
        raise ValueError("at least one trace required")
    terms = []
    for st in traces:
        sim_trace = _resimulate(st, candidate)
        rec = st.sensors()
        sim = sim_trace.sensors()
        if len(rec) != len(sim):
            warnings.warn(
                f"recorded {len(rec)} steps but re-simulation produced {len(sim)};"
                " truncating to the shorter run",
                TraceMismatchWarning,
            )
        m = min(len(rec), len(sim))
        if m == 0:
            terms.append(0.0)
            continue
        terms.append(float(np.mean(np.abs(rec[:m] - sim[:m]))))
    return Discrepancy(value=float(sum(terms) / len(terms)), per_controller=tuple(terms))


# ---------------------------------------------------------------------------
# Evolving simulator parameters


class SimParamsOps:
    """Genome operations over ``SimParams``.

    ``clamp_case`` pins the failure case; ``freeze_gains_from`` copies motor,
    sensor, and slope gains from a base parameter set and never mutates them
    (used by diagnosis so that gains cannot imitate motor faults).
    """

    def __init__(
        self,
        clamp_case: FailureCase | None = None,
        freeze_gains_from: SimParams | None = None,
        index_space: int = 16,
    ):
        self.clamp_case = clamp_case
        self.freeze = freeze_gains_from
        self.index_space = index_space

    def _random_failure(self, rng) -> FailureInjection:
        case = self.clamp_case
        if case is None:
            case = list(FailureCase)[int(rng.integers(len(FailureCase)))]
        return FailureInjection(
            case=case,
            onset_step=0,
            severity=float(rng.uniform(0.0, 1.0)),
            rng_seed=int(rng.integers(self.index_space)),
        )

    def random(self, rng: np.random.Generator) -> SimParams:
        if self.freeze is not None:
            base = self.freeze
            return SimParams(
                base.motor_gain_left,
                base.motor_gain_right,
                tuple(base.sensor_gains),
                base.slope_gain,
                self._random_failure(rng),
            ).clamped()
        return SimParams(
            float(rng.uniform(0.5, 1.5)),
            float(rng.uniform(0.5, 1.5)),
            tuple(float(g) for g in rng.uniform(0.5, 1.5, 10)),
            float(rng.uniform(0.5, 1.5)),
            self._random_failure(rng),
        ).clamped()

    def mutate(self, genome: SimParams, rng: np.random.Generator, sigma: float) -> SimParams:
        f = genome.failure_hypothesis or self._random_failure(rng)
        case = f.case
        if self.clamp_case is None and rng.random() < 0.2:
            case = list(FailureCase)[int(rng.integers(len(FailureCase)))]
        severity = f.severity + float(rng.normal(0.0, sigma))
        seed = f.rng_seed
        if rng.random() < 0.3:
            seed = int(rng.integers(self.index_space))
        failure = replace(f, case=case, severity=severity, rng_seed=seed)
        if self.freeze is not None:
            return replace(genome, failure_hypothesis=failure).clamped()
        gains = np.array(genome.sensor_gains) + rng.normal(0.0, sigma, 10)
        return SimParams(
            genome.motor_gain_left + float(rng.normal(0.0, sigma)),
            genome.motor_gain_right + float(rng.normal(0.0, sigma)),
            tuple(float(g) for g in gains),
            genome.slope_gain + float(rng.normal(0.0, sigma)),
            failure,
        ).clamped()

    def crossover(self, a: SimParams, b: SimParams, rng: np.random.Generator) -> SimParams:
        pick = lambda x, y: x if rng.random() < 0.5 else y
        gains = tuple(
            ga if m else gb
            for ga, gb, m in zip(a.sensor_gains, b.sensor_gains, rng.random(10) < 0.5)
        )
        fa, fb = a.failure_hypothesis, b.failure_hypothesis
        failure = pick(fa, fb)
        if fa is not None and fb is not None:
            failure = FailureInjection(
                case=pick(fa.case, fb.case) if self.clamp_case is None else fa.case,
                onset_step=pick(fa.onset_step, fb.onset_step),
                severity=pick(fa.severity, fb.severity),
                rng_seed=pick(fa.rng_seed, fb.rng_seed),
            )
        out = SimParams(
            pick(a.motor_gain_left, b.motor_gain_left),
            pick(a.motor_gain_right, b.motor_gain_right),
            gains,
            pick(a.slope_gain, b.slope_gain),
            failure,
        )
        if self.freeze is not None:
            base = self.freeze
            out = SimParams(
                base.motor_gain_left,
                base.motor_gain_right,
                tuple(base.sensor_gains),
                base.slope_gain,
                failure,
            )
        return out.clamped()

    def copy(self, genome: SimParams) -> SimParams:
        return genome

    def to_text(self, genome: SimParams) -> str:
        f = genome.failure_hypothesis
        failure = "none" if f is None else f"{f.case.value}:{f.severity!r}:{f.rng_seed}"
        gains = ",".join(repr(g) for g in genome.sensor_gains)
        return (
            f"mgl={genome.motor_gain_left!r} mgr={genome.motor_gain_right!r} "
            f"slope={genome.slope_gain!r} sensors={gains} failure={failure}"
        )


def estimation_phase(
    traces: list[SensorTrace],
    evo: EvoConfig,
    *,
    clamp_case: FailureCase | None = None,
    freeze_gains_from: SimParams | None = None,
    initial: list[SimParams] | None = None,
) -> tuple[SimParams, RunLog]:
    """Evolve simulator parameters minimizing the trace mismatch; elitism
    makes the per-generation best mismatch non-increasing."""
    if not traces:
        raise ValueError("at least one trace required")
    ops = SimParamsOps(clamp_case=clamp_case, freeze_gains_from=freeze_gains_from)
    cache: dict[tuple, float] = {}

    def evaluate(ind: Individual) -> float:
        key = ind.genome.key()
        if key not in cache:
            cache[key] = discrepancy(traces, ind.genome).value
        return -cache[key]

    best, log = evolve(evo, evaluate, ops, initial_genomes=initial)
    return best.genome, log


def diagnose(
    traces: list[SensorTrace],
    evo: EvoConfig | None = None,
    base_params: SimParams | None = None,
) -> list[tuple[FailureCase, float]]:
    """Rank all nine failure cases by how well each explains the traces.

    One clamped estimation run per case, gains frozen at the working
    parameters; ascending mismatch, parsimony breaking exact ties.
    """
    if evo is None:
        evo = EvoConfig(pop_size=16, generations=12, seed=0)
    base = (base_params or SimParams()).clamped()
    scored = []
    for idx, case in enumerate(FailureCase):
        case_seed = int(np.random.SeedSequence((evo.seed, idx)).generate_state(1)[0])
        params, _ = estimation_phase(
            traces,
            replace(evo, seed=case_seed),
            clamp_case=case,
            freeze_gains_from=base,
            initial=[replace(base, failure_hypothesis=FailureInjection(case=case))],
        )
        score = discrepancy(traces, params).value
        scored.append((case, score, idx))
    scored.sort(key=lambda t: (t[1], _CASE_FREE_PARAMS[t[0]], t[2]))
    return [(case, score) for case, score, _ in scored]


def estimation_cycle(
    true_params: SimParams,
    working_params: SimParams,
    world: World,
    *,
    evo_explore: EvoConfig,
    evo_estimate: EvoConfig,
    body: RobotBody = DEFAULT_BODY,
    fcfg: FitnessConfig = FitnessConfig(),
    n_hidden: int = 2,
    n_controllers: int = 1,
) -> tuple[SimParams, Discrepancy, Discrepancy]:
    """One full explore -> reference -> estimate cycle.

    Returns (updated params, mismatch of the starting params, mismatch of the
    updated params) against the freshly recorded reference traces.
    """
    traces = []
    for i in range(n_controllers):
        explorer_cfg = replace(
            evo_explore,
            seed=int(np.random.SeedSequence((evo_explore.seed, i)).generate_state(1)[0]),
        )
        controller = exploration_phase(
            working_params, explorer_cfg, world, body, fcfg, n_hidden
        )
        traces.append(run_reference(controller, true_params, world, i, body, fcfg))
    before = discrepancy(traces, working_params)
    estimated, _ = estimation_phase(traces, evo_estimate, initial=[working_params])
    after = discrepancy(traces, estimated)
    return estimated, before, after


# ---------------------------------------------------------------------------
# Trace files and reports


def write_trace(st: SensorTrace, path) -> None:
    meta = dict(st.trace.meta)
    meta["format"] = "evobot-trace v1"
    meta["controller"] = st.controller.to_text().rstrip("\n")
    meta["trial_seed"] = str(st.seed)
    meta["fcfg"] = (
        f"threshold={st.fcfg.threshold!r};w_progress={st.fcfg.w_progress!r};"
        f"reach_bonus={st.fcfg.reach_bonus!r};w_rotation={st.fcfg.w_rotation!r};"
        f"w_penalty={st.fcfg.w_penalty!r};clearance_floor={st.fcfg.clearance_floor!r};"
        f"max_steps={st.fcfg.max_steps};unit_time={st.fcfg.unit_time};"
        f"sensor_noise_sigma={st.fcfg.sensor_noise_sigma!r};"
        f"terrain_interference={st.fcfg.terrain_interference!r};"
        f"coarseness={st.fcfg.step_cfg.coarseness!r};dt_min={st.fcfg.step_cfg.dt_min!r};"
        f"dt_max={st.fcfg.step_cfg.dt_max!r};t_start={st.fcfg.step_cfg.t_start!r};"
        f"t_finish={st.fcfg.step_cfg.t_finish!r}"
    )
    meta["body"] = (
        f"body_radius={st.body.body_radius!r};wheel_base={st.body.wheel_base!r};"
        f"wheel_radius={st.body.wheel_radius!r};nominal_clearance={st.body.nominal_clearance!r};"
        f"sensor_range={st.body.sensor_range!r};omega_max={st.body.omega_max!r}"
    )
    for key, value in st.world.describe().items():
        meta[f"world.{key}"] = value
    trace = Trace(rows=st.trace.rows, meta=meta)
    trace.write_csv(path)


def _parse_kv(text: str) -> dict[str, str]:
    return dict(item.split("=", 1) for item in text.split(";") if item)


def read_trace(path) -> SensorTrace:
    trace = Trace.read_csv(path)
    meta = trace.meta
    if meta.get("format") != "evobot-trace v1":
        raise ValueError(f"{path} is not an evobot-trace v1 file")
    controller = Controller.from_text(meta["controller"])
    body_kv = _parse_kv(meta["body"])
    body = RobotBody(
        body_radius=float(body_kv["body_radius"]),
        wheel_base=float(body_kv["wheel_base"]),
        wheel_radius=float(body_kv["wheel_radius"]),
        nominal_clearance=float(body_kv["nominal_clearance"]),
        sensor_range=float(body_kv["sensor_range"]),
        omega_max=float(body_kv["omega_max"]),
    )
    f = _parse_kv(meta["fcfg"])
    from .world import StepConfig

    fcfg = FitnessConfig(
        threshold=float(f["threshold"]),
        w_progress=float(f["w_progress"]),
        reach_bonus=float(f["reach_bonus"]),
        w_rotation=float(f["w_rotation"]),
        w_penalty=float(f["w_penalty"]),
        clearance_floor=float(f["clearance_floor"]),
        max_steps=int(f["max_steps"]),
        unit_time=int(f["unit_time"]),
        sensor_noise_sigma=float(f["sensor_noise_sigma"]),
        terrain_interference=float(f["terrain_interference"]),
        step_cfg=StepConfig(
            coarseness=float(f["coarseness"]),
            dt_min=float(f["dt_min"]),
            dt_max=float(f["dt_max"]),
            t_start=float(f["t_start"]),
            t_finish=float(f["t_finish"]),
        ),
    )
    width = float(meta["world.width"])
    height = float(meta["world.height"])
    obstacles = tuple(
        Obstacle((float(x), float(y)), float(r))
        for x, y, r in (
            item.split(",") for item in meta.get("world.obstacle_list", "").split(";") if item
        )
    )
    world = make_world(
        meta["world.kind"],
        0,
        int(meta["world.seed"]),
        bounds=Rect(0.0, 0.0, width, height),
        cell_size=float(meta["world.cell_size"]),
        amplitude=float(meta["world.amplitude"]),
        gravity=float(meta["world.gravity"]),
        target=Target(
            (float(meta["world.target_x"]), float(meta["world.target_y"])),
            float(meta["world.target_radius"]),
        ),
        obstacle_list=obstacles,
    )
    sx, sy, heading = (float(v) for v in meta["start"].split(","))
    return SensorTrace(
        trace=trace,
        controller=controller,
        world=world,
        body=body,
        fcfg=fcfg,
        seed=int(meta["trial_seed"]),
        start=(sx, sy, heading),
    )


def write_diagnosis_report(ranking: list[tuple[FailureCase, float]], csv_path, text_path=None) -> None:
    with open(csv_path, "w") as fh:
        fh.write("rank,case,discrepancy\n")
        for rank, (case, score) in enumerate(ranking, start=1):
            fh.write(f"{rank},{case.value},{score!r}\n")
    if text_path is not None:
        with open(text_path, "w") as fh:
            fh.write("failure diagnosis (best explanation first)\n")
            fh.write("------------------------------------------\n")
            for rank, (case, score) in enumerate(ranking, start=1):
                fh.write(f"{rank:>2}. {case.value:<18} mismatch {score:.6f}\n")
