import math
import random

import numpy as np
import pytest

from evobot.controller import (
    N_INPUTS,
    Controller,
    FailureCase,
    FailureInjection,
    PlasticityConfig,
    PlasticityRule,
    Primitive,
    Topology,
    controller_from_bodyplan,
    hebbian_step,
    random_controller,
    run_primitive_sequence,
)
from evobot.fitness import FitnessConfig, run_trial
from evobot.genotype import parse
from evobot.world import (
    DEFAULT_BODY,
    RobotState,
    SensorReading,
    StepConfig,
    TerrainKind,
    make_world,
)
from test_genotype import FULL_GENOTYPE

BODY = DEFAULT_BODY


def reading(prox):
    return SensorReading(np.asarray(prox, dtype=float), False, 0.0, 0.0)


def zeros_reading():
    return reading(np.zeros(10))


def test_zero_weights_give_zero_output():
    c = Controller(Topology(0), np.zeros(Topology(0).n_weights))
    assert c.activate(zeros_reading()) == (0.0, 0.0)
    c2 = Controller(Topology(3), np.zeros(Topology(3).n_weights))
    assert c2.activate(reading(np.linspace(0, 1, 10))) == (0.0, 0.0)


def test_single_edge_matches_scalar_oracle():
    # weight from sensor 0 to the left wheel only; output = tanh(0.5 * w)
    rng = random.Random(3)
    for _ in range(100):
        w = rng.uniform(-5, 5)
        weights = np.zeros(Topology(0).n_weights)
        weights[0] = w  # left row, input 0
        c = Controller(Topology(0), weights, threshold=10.0)  # alert stays off
        left, right = c.activate(reading([0.5] + [0.0] * 9))
        assert left == pytest.approx(math.tanh(0.5 * w), abs=1e-12)
        assert right == 0.0


def test_outputs_always_bounded():
    rng = np.random.default_rng(1)
    for h in (0, 4):
        topo = Topology(h)
        for _ in range(50):
            c = Controller(topo, rng.uniform(-50, 50, topo.n_weights))
            left, right = c.activate(reading(rng.uniform(0, 1, 10)))
            assert -1.0 <= left <= 1.0 and -1.0 <= right <= 1.0


def test_alert_input_trips_at_threshold():
    weights = np.zeros(Topology(0).n_weights)
    weights[10] = 1.0  # left wheel reads the alert input
    c = Controller(Topology(0), weights, threshold=0.5)
    below, _ = c.activate(reading([0.04] * 10))
    at, _ = c.activate(reading([0.05] * 10))
    assert below == 0.0
    assert at == pytest.approx(math.tanh(1.0))


def test_left_right_symmetry():
    # Mirror-symmetric topology: swapping wheel rows and mirrored sensor
    # columns swaps the outputs for mirrored inputs.
    pairs = [(0, 7), (1, 6), (2, 5), (3, 4), (8, 9)]
    rng = np.random.default_rng(7)
    w = np.zeros((2, N_INPUTS))
    base = rng.uniform(-1, 1, N_INPUTS)
    w[0] = base
    w[1] = base.copy()
    for a, b in pairs:
        w[1][a], w[1][b] = base[b], base[a]
    c = Controller(Topology(0), w.ravel(), threshold=0.5)
    prox = rng.uniform(0, 1, 10)
    mirrored = prox.copy()
    for a, b in pairs:
        mirrored[a], mirrored[b] = prox[b], prox[a]
    l1, r1 = c.activate(reading(prox))
    l2, r2 = c.activate(reading(mirrored))
    assert l1 == pytest.approx(r2, abs=1e-12)
    assert r1 == pytest.approx(l2, abs=1e-12)


# -- failure semantics -------------------------------------------------------


def test_nothing_fail_identical_output():
    c1 = random_controller(3, seed=5)
    c2 = random_controller(3, seed=5)
    c2.failure = FailureInjection(FailureCase.NOTHING_FAIL, onset_step=0, severity=1.0)
    rng = np.random.default_rng(0)
    for _ in range(20):
        prox = rng.uniform(0, 1, 10)
        assert c1.activate(reading(prox)) == c2.activate(reading(prox))


def test_sensor_fail_blanks_channel():
    c = random_controller(0, seed=2)
    c.failure = FailureInjection(FailureCase.SENSOR_FAIL, onset_step=0, rng_seed=3)
    c.activate(reading(np.ones(10)))
    assert c.last_inputs[3] == 0.0
    assert np.all(c.last_inputs[:3] == 1.0)


def test_sensor_fail_respects_onset():
    c = random_controller(0, seed=2)
    c.failure = FailureInjection(FailureCase.SENSOR_FAIL, onset_step=5, rng_seed=0)
    for n in range(10):
        c.activate(reading(np.ones(10)))
        if n < 5:
            assert c.last_inputs[0] == 1.0
        else:
            assert c.last_inputs[0] == 0.0


def test_motor_weak_full_severity_equals_wheel_damage():
    prox = np.linspace(0.1, 0.9, 10)
    weak = random_controller(2, seed=9)
    weak.failure = FailureInjection(FailureCase.MOTOR_WEAK, severity=1.0, rng_seed=0)
    dead = random_controller(2, seed=9)
    dead.failure = FailureInjection(FailureCase.LEFT_WHEEL_DAMAGE, severity=0.3)
    assert weak.activate(reading(prox)) == dead.activate(reading(prox))


def test_motor_weak_monotone_in_severity():
    prox = np.linspace(0.1, 0.9, 10)
    last = math.inf
    for sev in (0.0, 0.25, 0.5, 0.75, 1.0):
        c = random_controller(0, seed=11)
        c.failure = FailureInjection(FailureCase.MOTOR_WEAK, severity=sev, rng_seed=1)
        _, right = c.activate(reading(prox))
        assert abs(right) <= last + 1e-12
        last = abs(right)


def test_wheel_neuron_fail_zeroes_output():
    c = random_controller(4, seed=13)
    c.failure = FailureInjection(FailureCase.WHEEL_NEURON_FAIL, rng_seed=1)
    left, right = c.activate(reading(np.full(10, 0.4)))
    assert right == 0.0 and left != 0.0


def test_hidden_neuron_fail_changes_output():
    base = random_controller(4, seed=17)
    hurt = random_controller(4, seed=17)
    hurt.failure = FailureInjection(FailureCase.HIDDEN_NEURON_FAIL, rng_seed=2)
    prox = np.full(10, 0.6)
    assert base.activate(reading(prox)) != hurt.activate(reading(prox))


def test_motion_scales():
    c = random_controller(0, seed=1)
    c.failure = FailureInjection(FailureCase.BODY_DAMAGE, severity=0.6)
    c.activate(zeros_reading())
    assert c.motion_scales() == (1.0 - 0.3, 1.0, 1.0 - 0.6)
    c.failure = FailureInjection(FailureCase.JOINT_FAIL, severity=0.9)
    assert c.motion_scales() == (1.0, 0.5, 1.0)
    c.failure = None
    assert c.motion_scales() == (1.0, 1.0, 1.0)


def run_course(failure, seed=23, steps=120):
    """Fixed obstacle course; returns the trajectory under an injection."""
    world = make_world(TerrainKind.FLAT, 6, seed=41)
    ctrl = random_controller(4, seed=seed)
    ctrl.failure = failure
    cfg = FitnessConfig(max_steps=steps)
    _, trace = run_trial(world, BODY, ctrl, cfg, seed=0)
    return trace.array()


def test_every_real_failure_changes_the_trajectory():
    baseline = run_course(None)
    for case in FailureCase:
        injected = run_course(FailureInjection(case, onset_step=0, severity=0.5, rng_seed=1))
        same = injected.shape == baseline.shape and np.array_equal(injected, baseline)
        if case is FailureCase.NOTHING_FAIL:
            assert same, "ninth case must be bit-identical to baseline"
        else:
            assert not same, f"{case} left the trajectory unchanged"


# -- plasticity ---------------------------------------------------------------


def test_hebbian_step_rule():
    assert hebbian_step(0.0, 1.0, 1.0, 0.1, 4.0) == pytest.approx(0.1)
    assert hebbian_step(3.95, 1.0, 1.0, 0.1, 4.0) == 4.0
    assert hebbian_step(-3.95, 1.0, 1.0, -0.1, 4.0) == -4.0


def test_eta_zero_is_bitwise_noop():
    plast = PlasticityConfig(PlasticityRule.HEBBIAN, eta=0.0)
    c = random_controller(3, seed=19, plasticity=plast)
    w0 = c.weights.copy()
    rng = np.random.default_rng(2)
    for _ in range(200):
        c.activate(reading(rng.uniform(0, 1, 10)))
        c.apply_plasticity()
    assert np.array_equal(c.weights, w0)


def test_plasticity_updates_and_clips():
    plast = PlasticityConfig(PlasticityRule.HEBBIAN, eta=0.5, weight_clip=1.5)
    c = random_controller(3, seed=19, plasticity=plast)
    w0 = c.weights.copy()
    rng = np.random.default_rng(3)
    for _ in range(1000):
        c.activate(reading(rng.uniform(0, 1, 10)))
        c.apply_plasticity()
    assert not np.array_equal(c.weights, w0)
    assert np.all(np.abs(c.weights) <= 1.5 + 1e-12)


# -- primitives ---------------------------------------------------------------


def test_forward_primitive_straight_line():
    world = make_world(TerrainKind.FLAT, 0, seed=0)
    cfg = StepConfig()
    start = RobotState(4.0, 12.0, 0.0)
    final, trace = run_primitive_sequence([(Primitive.FORWARD, 20)], world, BODY, start, cfg)
    expected = 20 * BODY.wheel_radius * BODY.omega_max * cfg.dt
    assert final.x - start.x == pytest.approx(expected, abs=1e-9)
    assert final.y == start.y
    assert len(trace) == 20


def test_turn_left_rotates_without_drift():
    world = make_world(TerrainKind.FLAT, 0, seed=0)
    start = RobotState(12.0, 12.0, 0.0)
    final, _ = run_primitive_sequence([(Primitive.TURN_LEFT, 30)], world, BODY, start)
    assert final.heading > 0.5
    assert math.hypot(final.x - start.x, final.y - start.y) < 1e-9


def test_seek_approaches_target():
    world = make_world(TerrainKind.FLAT, 0, seed=0)
    start = RobotState(3.0, 4.0, 2.5)  # pointing away; seek must steer back
    d0 = math.dist((start.x, start.y), world.target.center)
    final, _ = run_primitive_sequence([(Primitive.SEEK, 60)], world, BODY, start)
    d1 = math.dist((final.x, final.y), world.target.center)
    assert d1 < d0


def test_avoid_turns_away_from_obstacle():
    world = make_world(TerrainKind.FLAT, 0, seed=0)
    from evobot.world import Obstacle

    ob = Obstacle((14.0, 12.6), 0.8)  # ahead-left of the robot
    world = make_world(TerrainKind.FLAT, 0, seed=0, obstacle_list=(ob,))
    start = RobotState(12.0, 12.0, 0.0)
    final, _ = run_primitive_sequence([(Primitive.AVOID, 15)], world, BODY, start)
    assert final.heading < 0.0  # bears right, away from the left-side threat


def test_primitive_duration_validation():
    world = make_world(TerrainKind.FLAT, 0, seed=0)
    with pytest.raises(ValueError):
        run_primitive_sequence([(Primitive.FORWARD, 0)], world, BODY, RobotState(2, 2, 0))


# -- construction -------------------------------------------------------------


def test_from_bodyplan_no_hidden_is_perceptron():
    plan = parse("X")
    c = controller_from_bodyplan(plan, seed=3)
    assert c.topology.n_hidden == 0
    assert c.weights.shape == (Topology(0).n_weights,)


def test_from_bodyplan_full_sample():
    plan = parse(FULL_GENOTYPE)
    c = controller_from_bodyplan(plan, seed=3)
    assert c.topology.n_hidden == plan.hidden_count() == 0
    # touch neurons map to sensor slots 0 and 1, the motor to the left wheel;
    # the sample wires (touch#1 -> motor, w=2) and (touch#0 -> motor, w=-3)
    w0 = c.weights.reshape(2, N_INPUTS)
    assert w0[0, 1] == 2.0
    assert w0[0, 0] == -3.0


def test_from_bodyplan_deterministic():
    plan = parse(FULL_GENOTYPE)
    a = controller_from_bodyplan(plan, seed=8)
    b = controller_from_bodyplan(plan, seed=8)
    assert np.array_equal(a.weights, b.weights)
    c = controller_from_bodyplan(plan, seed=9)
    assert not np.array_equal(a.weights, c.weights)


def test_hidden_neurons_size_hidden_layer():
    plan = parse("X[:1.0]X[:0.5]X[T:1]")
    assert plan.hidden_count() == 2
    c = controller_from_bodyplan(plan, seed=1)
    assert c.topology.n_hidden == 2


def test_save_load_roundtrip(tmp_path):
    plast = PlasticityConfig(PlasticityRule.HEBBIAN, eta=0.01, weight_clip=2.0)
    c = random_controller(3, seed=21, threshold=0.7, plasticity=plast)
    c.failure = FailureInjection(FailureCase.SENSOR_FAIL, onset_step=50, severity=0.8, rng_seed=4)
    path = tmp_path / "ctrl.txt"
    c.save(path)
    back = Controller.load(path)
    assert back.topology == c.topology
    assert np.array_equal(back.weights, c.weights)
    assert back.threshold == c.threshold
    assert back.plasticity == c.plasticity
    assert back.failure == c.failure
    assert back.to_text() == c.to_text()
