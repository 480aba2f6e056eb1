import math

import numpy as np
import pytest

from evobot.controller import (
    Controller,
    FailureCase,
    FailureInjection,
    PlasticityConfig,
    PlasticityRule,
    Topology,
    random_controller,
)
from evobot.fitness import (
    ConfigError,
    FitnessConfig,
    TrialResult,
    append_result_row,
    evaluate_trial,
    run_trial,
    sensor_performance,
)
from evobot.world import (
    DEFAULT_BODY,
    Rect,
    RobotState,
    StepConfig,
    TerrainKind,
    make_world,
    sense,
    step,
)

BODY = DEFAULT_BODY
CFG = FitnessConfig()


def constant_drive_controller(left: float = 20.0, right: float = 20.0) -> Controller:
    """Bias-only perceptron: motors are constant regardless of sensors."""
    w = np.zeros((2, 12))
    w[0, 11] = left
    w[1, 11] = right
    return Controller(Topology(0), w.ravel())


def test_zero_controller_scores_zero():
    world = make_world(TerrainKind.FLAT, 0, seed=0)
    ctrl = Controller(Topology(0), np.zeros(24))
    result = evaluate_trial(world, BODY, ctrl, CFG, seed=0)
    assert result.fitness == 0.0
    assert result.rotations_left == 0.0 and result.rotations_right == 0.0
    assert not result.reached


def test_straight_line_reach_matches_hand_computation():
    world = make_world(TerrainKind.FLAT, 0, seed=0)
    ctrl = constant_drive_controller()
    result, trace = run_trial(world, BODY, ctrl, CFG, seed=0)
    assert result.reached

    # independent kinematic derivation for the (1,1) drive from corner (1,1)
    d0 = math.hypot(11.0, 11.0)
    per_step = BODY.wheel_radius * BODY.omega_max * CFG.step_cfg.dt
    n = math.ceil((d0 - 1.5) / per_step)
    d_final = d0 - n * per_step
    rot = n * BODY.omega_max * CFG.step_cfg.dt / (2 * math.pi)
    r_budget = 1.5 * d0 / (2 * math.pi * BODY.wheel_radius)
    expected = 0.6 * (1 - d_final / d0) + 0.3 - 0.05 * rot / r_budget

    assert result.steps_used == n
    assert result.penalty_steps == 0
    assert result.rotations_left == pytest.approx(rot, abs=1e-9)
    assert result.rotations_right == pytest.approx(rot, abs=1e-9)
    assert result.fitness == pytest.approx(expected, abs=1e-6)
    assert len(trace) == n


def test_rotation_accounting_matches_wheel_angles():
    world = make_world(TerrainKind.FLAT, 0, seed=0)
    ctrl = random_controller(2, seed=5)
    result, trace = run_trial(world, BODY, ctrl, FitnessConfig(max_steps=100), seed=1)
    # re-integrate wheel angles from the logged motor commands
    angle_l = sum(abs(row[5]) for row in trace.rows) * BODY.omega_max * CFG.step_cfg.dt
    angle_r = sum(abs(row[6]) for row in trace.rows) * BODY.omega_max * CFG.step_cfg.dt
    assert result.rotations_left == pytest.approx(angle_l / (2 * math.pi), abs=1e-9)
    assert result.rotations_right == pytest.approx(angle_r / (2 * math.pi), abs=1e-9)


def test_body_damage_strictly_lowers_fitness():
    world = make_world(TerrainKind.FLAT, 0, seed=0)
    clean = evaluate_trial(world, BODY, constant_drive_controller(), CFG, seed=0)
    hurt_ctrl = constant_drive_controller()
    hurt_ctrl.failure = FailureInjection(FailureCase.BODY_DAMAGE, onset_step=0, severity=0.5)
    hurt = evaluate_trial(world, BODY, hurt_ctrl, CFG, seed=0)
    assert hurt.penalty_steps == hurt.steps_used  # clearance 0.5 < floor every step
    assert hurt.fitness < clean.fitness


def test_penalty_monotone_in_floor():
    world = make_world(TerrainKind.BUMPY, 0, seed=3)
    last_fit, last_pen = None, None
    for floor in (0.0, 0.7, 1.0):
        cfg = FitnessConfig(clearance_floor=floor, max_steps=150)
        res = evaluate_trial(world, BODY, constant_drive_controller(), cfg, seed=0)
        if last_fit is not None:
            assert res.penalty_steps >= last_pen
            assert res.fitness <= last_fit
        last_fit, last_pen = res.fitness, res.penalty_steps


def test_fitness_always_bounded():
    worlds = [
        make_world(TerrainKind.FLAT, 0, seed=0),
        make_world(TerrainKind.BUMPY, 5, seed=1),
    ]
    rng = np.random.default_rng(0)
    for world in worlds:
        for _ in range(10):
            topo = Topology(3)
            ctrl = Controller(topo, rng.uniform(-40, 40, topo.n_weights))
            res = evaluate_trial(world, BODY, ctrl, FitnessConfig(max_steps=80), seed=2)
            assert 0.0 <= res.fitness <= 1.0


def test_fleeing_robot_clamps_to_zero():
    # drive straight away from the target: progress is negative, clamped
    world = make_world(TerrainKind.FLAT, 0, seed=0)
    ctrl = constant_drive_controller()
    res, _ = run_trial(
        world, BODY, ctrl, FitnessConfig(max_steps=60), seed=0, start=(12.0, 4.0, -math.pi / 2)
    )
    assert res.fitness == 0.0


def test_trial_determinism():
    world = make_world(TerrainKind.BUMPY, 4, seed=9)
    cfg = FitnessConfig(max_steps=120, sensor_noise_sigma=0.1)
    a = evaluate_trial(world, BODY, random_controller(3, 7), cfg, seed=5)
    b = evaluate_trial(world, BODY, random_controller(3, 7), cfg, seed=5)
    assert a == b


def test_evaluate_trial_leaves_controller_untouched():
    world = make_world(TerrainKind.FLAT, 0, seed=0)
    plast = PlasticityConfig(PlasticityRule.HEBBIAN, eta=0.05)
    ctrl = random_controller(2, seed=3, plasticity=plast)
    w0 = ctrl.weights.copy()
    evaluate_trial(world, BODY, ctrl, FitnessConfig(max_steps=50), seed=0)
    assert np.array_equal(ctrl.weights, w0)


def test_start_on_target_is_config_error():
    world = make_world(TerrainKind.FLAT, 0, seed=0)
    with pytest.raises(ConfigError):
        run_trial(world, BODY, constant_drive_controller(), CFG, start=world.target.center)


def small_arena_world():
    # every wall within sensor range so all ten channels read nonzero
    return make_world(TerrainKind.FLAT, 0, seed=0, bounds=Rect(0, 0, 8, 8))


def test_sensor_performance_clean_is_one():
    world = small_arena_world()
    res, trace = run_trial(
        world, BODY, random_controller(0, 3), FitnessConfig(max_steps=60), seed=0
    )
    assert res.sensor_performance == 1.0
    assert sensor_performance(trace, world, BODY) == 1.0


def test_sensor_performance_one_dead_channel():
    from evobot.world import RobotBody, Target

    # every wall within sensor range from the start pose: all channels nonzero
    body = RobotBody(sensor_range=6.0)
    world = make_world(
        TerrainKind.FLAT, 0, seed=0, bounds=Rect(0, 0, 7, 7), target=Target((5.5, 3.5), 0.5)
    )
    ctrl = Controller(Topology(0), np.zeros(24))  # motionless
    ctrl.failure = FailureInjection(FailureCase.SENSOR_FAIL, onset_step=0, rng_seed=4)
    res, trace = run_trial(
        world, body, ctrl, FitnessConfig(max_steps=60), seed=0, start=(2.0, 3.5, 0.0)
    )
    assert res.steps_used == 60
    assert np.all(trace.array()[:, 7:].sum(axis=1) > 0)  # nine live channels read
    assert res.sensor_performance == pytest.approx(0.9, abs=1e-12)


def test_sensor_performance_decreases_with_noise():
    world = small_arena_world()
    perfs = []
    for sigma in (0.0, 0.1, 0.3):
        cfg = FitnessConfig(max_steps=100, sensor_noise_sigma=sigma)
        res = evaluate_trial(world, BODY, Controller(Topology(0), np.zeros(24)), cfg, seed=11)
        perfs.append(res.sensor_performance)
    assert perfs[0] == 1.0
    assert perfs[0] > perfs[1] > perfs[2]


def test_bumpy_terrain_interferes_with_sensors():
    world = make_world(TerrainKind.BUMPY, 0, seed=4)
    res, trace = run_trial(
        world, BODY, constant_drive_controller(), FitnessConfig(max_steps=100), seed=0
    )
    assert res.sensor_performance < 1.0
    # the in-loop accounting equals the standalone trace oracle
    assert res.sensor_performance == sensor_performance(trace, world, BODY)
    clean_cfg = FitnessConfig(max_steps=100, terrain_interference=0.0)
    clean = evaluate_trial(world, BODY, constant_drive_controller(), clean_cfg, seed=0)
    assert clean.sensor_performance == 1.0


def test_trace_replay_reproduces_positions():
    world = make_world(TerrainKind.FLAT, 3, seed=8)
    ctrl = random_controller(0, seed=6)
    _, trace = run_trial(world, BODY, ctrl, FitnessConfig(max_steps=80), seed=2)
    rows = trace.rows
    state = RobotState(rows[0][1], rows[0][2], rows[0][3])
    for i in range(len(rows) - 1):
        state = step(world, BODY, state, (rows[i][5], rows[i][6]), CFG.step_cfg)
        assert state.x == rows[i + 1][1]
        assert state.y == rows[i + 1][2]
        assert state.heading == rows[i + 1][3]


def test_result_csv_appends(tmp_path):
    world = make_world(TerrainKind.FLAT, 0, seed=0)
    res = evaluate_trial(world, BODY, constant_drive_controller(), CFG, seed=0)
    path = tmp_path / "results.csv"
    append_result_row(path, 0, "flat/no-obs", res)
    append_result_row(path, 1, "flat/no-obs", res)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("seed,env,fitness")
