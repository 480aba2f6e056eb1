"""Run one trial and score it.

A trial senses, activates the controller, applies lifetime plasticity,
steps the world, and repeats until the target is reached or the step budget
runs out.  The score blends four terms, clamped to [0, 1]:

    w_progress * (1 - d_final/d_initial)     progress toward the target
  + reach_bonus                              only if the target was reached
  - w_rotation * r / r_budget                wheel effort, r = (r_L + r_R)/2
  - w_penalty * penalty_steps / steps_used   low-clearance step fraction

``r_budget`` is the wheel revolutions a straight-line run to the target
would need, plus fifty percent, which keeps the effort term scale-free
across arena sizes.  A penalty step is any step whose ground clearance falls
below the configured floor (default one unit).

The ten sensor values recorded in the trace are exactly what the network
received, after simulator gains, terrain interference (rough ground corrupts
proximity readings in proportion to local height), optional seeded noise,
and any injected sensor fault.  Sensor performance is the fraction of
(step, sensor) samples where that recorded value still matches the clean
geometric reading at the logged pose, so faulty or noisy channels lower it.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .controller import Controller
from .world import (
    N_SENSORS,
    RobotBody,
    RobotState,
    StepConfig,
    Trace,
    TerrainKind,
    World,
    reached_target,
    sense,
    start_corners,
    step,
    terrain_heights,
)

__all__ = [
    "ConfigError",
    "FitnessConfig",
    "TrialResult",
    "run_trial",
    "evaluate_trial",
    "sensor_performance",
    "append_result_row",
    "RESULT_COLUMNS",
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FitnessConfig:
    threshold: float = 0.5  # Th: alert input trips when summed readings reach it
    w_progress: float = 0.6
    reach_bonus: float = 0.3
    w_rotation: float = 0.05
    w_penalty: float = 0.12
    clearance_floor: float = 1.0
    max_steps: int = 400
    step_cfg: StepConfig = StepConfig()
    unit_time: int = 100  # steps per one unit time, used for rate reporting
    sensor_noise_sigma: float = 0.0
    terrain_interference: float = 0.6

    def __post_init__(self):
        if self.w_progress < 0 or self.w_rotation < 0 or self.w_penalty < 0:
            raise ConfigError("fitness weights must be nonnegative")
        if self.w_progress + self.reach_bonus > 1.0 + 1e-12:
            raise ConfigError("w_progress + reach_bonus must not exceed 1")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        if self.unit_time < 1:
            raise ConfigError("unit_time must be >= 1")

    @property
    def steps(self) -> int:
        return min(self.max_steps, self.step_cfg.max_steps)


@dataclass(frozen=True)
class TrialResult:
    fitness: float
    rotations_left: float
    rotations_right: float
    reached: bool
    steps_used: int
    sensor_performance: float
    penalty_steps: int
    distance_initial: float
    distance_final: float

    def rotation_rate(self, unit_time: int) -> float:
        """Mean wheel revolutions per unit time."""
        r = (self.rotations_left + self.rotations_right) / 2.0
        return r / (self.steps_used / unit_time) if self.steps_used else 0.0


def _start_pose(world: World, body: RobotBody, seed: int,
                start) -> tuple[float, float, float]:
    if start is None:
        corners = start_corners(world.bounds, body)
        sx, sy = corners[seed % len(corners)]
        heading = None
    elif len(start) == 2:
        (sx, sy), heading = start, None
    else:
        sx, sy, heading = start
    if heading is None:
        tx, ty = world.target.center
        heading = math.atan2(ty - sy, tx - sx)
    return sx, sy, heading


def run_trial(
    world: World,
    body: RobotBody,
    controller: Controller,
    cfg: FitnessConfig,
    seed: int = 0,
    *,
    start: tuple | None = None,
    sim=None,
    max_steps: int | None = None,
) -> tuple[TrialResult, Trace]:
    """Execute one trial in place: the controller's internal state is reset
    and its weights move if plasticity is enabled.  Pass a clone to keep the
    genome copy pristine.

    ``sim`` optionally carries simulator-parameter hypotheses (per-wheel
    motor gains, ten sensor gains, a slope gain, and a failure override);
    ``None`` means the ideal simulator.  ``seed`` picks the start corner when
    no explicit start is given and drives optional sensor noise.
    """
    sx, sy, heading = _start_pose(world, body, seed, start)
    tx, ty = world.target.center
    d_initial = math.hypot(tx - sx, ty - sy)
    if d_initial == 0.0:
        raise ConfigError("trial starts on the target center")

    wheel_gains = (1.0, 1.0)
    sensor_gains = None
    slope_gain = 1.0
    if sim is not None:
        wheel_gains = (sim.motor_gain_left, sim.motor_gain_right)
        sensor_gains = np.asarray(sim.sensor_gains, dtype=float)
        slope_gain = sim.slope_gain
        if sim.failure_hypothesis is not None:
            controller.failure = sim.failure_hypothesis

    noise_rng = None
    if cfg.sensor_noise_sigma > 0.0:
        noise_rng = np.random.default_rng(np.random.SeedSequence((seed, 0xA01)))

    interference = (
        cfg.terrain_interference if world.terrain.kind is not TerrainKind.FLAT else 0.0
    )
    probe_dist = body.body_radius + 0.5
    bearings = np.array(body.sensor_bearings)

    controller.reset_state()
    trace = Trace(meta={"seed": str(seed), "start": f"{sx!r},{sy!r},{heading!r}"})
    state = RobotState(sx, sy, heading)
    step_cfg = cfg.step_cfg
    dt = step_cfg.dt
    t = step_cfg.t_start
    budget = cfg.steps if max_steps is None else min(max_steps, cfg.steps)
    penalty = 0
    reached = False
    steps_used = 0
    clean_samples = 0

    for n in range(budget):
        raw = sense(world, body, state)
        fed = raw.proximity
        if sensor_gains is not None:
            fed = fed * sensor_gains
        if interference > 0.0:
            angs = state.heading + bearings
            bump = terrain_heights(
                world,
                state.x + probe_dist * np.cos(angs),
                state.y + probe_dist * np.sin(angs),
            )
            fed = fed + interference * bump
        if noise_rng is not None:
            # intermittent glitches: rate and magnitude both follow sigma
            glitch = noise_rng.random(N_SENSORS) < cfg.sensor_noise_sigma
            kick = noise_rng.normal(0.0, cfg.sensor_noise_sigma, N_SENSORS)
            fed = np.where(glitch, fed + kick, fed)
        if fed is not raw.proximity:
            fed = np.clip(fed, 0.0, 1.0)

        motor = controller.activate(replace(raw, proximity=fed))
        controller.apply_plasticity()
        speed_s, turn_s, clear_s = controller.motion_scales()
        seen = controller.last_inputs
        # what the network saw vs the clean geometric reading at this pose
        clean_samples += int(np.sum(np.abs(seen - raw.proximity) <= 1e-6))
        trace.append(t, state, motor, seen)
        state = step(
            world,
            body,
            state,
            motor,
            step_cfg,
            wheel_gains=wheel_gains,
            speed_scale=speed_s,
            turn_scale=turn_s,
            clearance_scale=clear_s,
            slope_gain=slope_gain,
        )
        t += dt
        steps_used = n + 1
        if state.clearance < cfg.clearance_floor:
            penalty += 1
        if reached_target(world, state, body):
            reached = True
            break

    d_final = math.hypot(tx - state.x, ty - state.y)
    rot_l = state.wheel_angle_left / (2.0 * math.pi)
    rot_r = state.wheel_angle_right / (2.0 * math.pi)
    r_budget = 1.5 * d_initial / (2.0 * math.pi * body.wheel_radius)
    r = (rot_l + rot_r) / 2.0
    progress = 1.0 - d_final / d_initial
    score = (
        cfg.w_progress * progress
        + (cfg.reach_bonus if reached else 0.0)
        - cfg.w_rotation * (r / r_budget if r_budget > 0 else 0.0)
        - cfg.w_penalty * (penalty / steps_used if steps_used else 0.0)
    )
    result = TrialResult(
        fitness=min(1.0, max(0.0, score)),
        rotations_left=rot_l,
        rotations_right=rot_r,
        reached=reached,
        steps_used=steps_used,
        sensor_performance=clean_samples / (steps_used * N_SENSORS) if steps_used else 1.0,
        penalty_steps=penalty,
        distance_initial=d_initial,
        distance_final=d_final,
    )
    return result, trace


def evaluate_trial(
    world: World,
    body: RobotBody,
    controller: Controller,
    cfg: FitnessConfig,
    seed: int = 0,
    *,
    start: tuple | None = None,
    sim=None,
) -> TrialResult:
    """Score a single trial on a working copy of the controller."""
    result, _ = run_trial(world, body, controller.clone(), cfg, seed, start=start, sim=sim)
    return result


def sensor_performance(trace: Trace, world: World, body: RobotBody,
                       tol: float = 1e-6) -> float:
    """Fraction of (step, sensor) samples where the recorded value matches
    the clean geometric reading at the logged pose."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    data = trace.array()
    good = 0
    for row in data:
        state = RobotState(row[1], row[2], row[3])
        clean = sense(world, body, state).proximity
        good += int(np.sum(np.abs(row[7:] - clean) <= tol))
    return good / (len(trace) * N_SENSORS)


RESULT_COLUMNS = [
    "seed",
    "env",
    "fitness",
    "rotations_left",
    "rotations_right",
    "reached",
    "sensor_performance",
    "penalty_steps",
    "steps_used",
]


def append_result_row(path, seed: int, env: str, result: TrialResult) -> None:
    new = not os.path.exists(path)
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if new:
            writer.writerow(RESULT_COLUMNS)
        writer.writerow(
            [
                seed,
                env,
                repr(result.fitness),
                repr(result.rotations_left),
                repr(result.rotations_right),
                int(result.reached),
                repr(result.sensor_performance),
                result.penalty_steps,
                result.steps_used,
            ]
        )
