"""Neural wheel controllers: feedforward nets with lifetime plasticity,
scripted behavioral primitives, and injectable hardware faults.

The network sees twelve inputs: the ten proximity readings, an "alert" bit
that is 1 when the summed readings reach the threshold ``Th``, and a constant
bias of 1.  Zero or more hidden tanh units feed two tanh outputs, one per
wheel, so commands always land in [-1, 1].  Weight layout in the flat vector:

    n_hidden == 0:  W0 rows (left wheel inputs, then right wheel inputs)
    n_hidden  > 0:  W1 rows (per hidden unit), then W2 rows (per wheel over
                    hidden units), then the two output bias weights

Fault injection covers nine cases.  A weakened motor scales its wheel
command, wheel damage forces a command to zero, body damage cuts top speed
and ground clearance, a failed sensor reads zero from its onset step onward,
joint damage halves turning authority, and failed wheel/hidden neurons emit
zero.  The ninth case injects nothing and is bit-identical to running without
any injection.  Which sensor, wheel, or hidden unit fails is selected by the
injection's seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .world import (
    N_SENSORS,
    RobotBody,
    RobotState,
    SensorReading,
    StepConfig,
    Trace,
    World,
    sense,
    step,
)

__all__ = [
    "FailureCase",
    "FailureInjection",
    "PlasticityRule",
    "PlasticityConfig",
    "Topology",
    "Controller",
    "Primitive",
    "PrimitiveSequence",
    "hebbian_step",
    "run_primitive_sequence",
    "controller_from_bodyplan",
    "random_controller",
    "N_INPUTS",
]

N_INPUTS = N_SENSORS + 2  # sensors + alert + bias
N_OUTPUTS = 2


class FailureCase(Enum):
    MOTOR_WEAK = "MotorWeak"
    LEFT_WHEEL_DAMAGE = "LeftWheelDamage"
    RIGHT_WHEEL_DAMAGE = "RightWheelDamage"
    BODY_DAMAGE = "BodyDamage"
    WHEEL_NEURON_FAIL = "WheelNeuronFail"
    SENSOR_FAIL = "SensorFail"
    JOINT_FAIL = "JointFail"
    HIDDEN_NEURON_FAIL = "HiddenNeuronFail"
    NOTHING_FAIL = "NothingFail"


@dataclass(frozen=True)
class FailureInjection:
    case: FailureCase = FailureCase.NOTHING_FAIL
    onset_step: int = 0
    severity: float = 0.5
    rng_seed: int = 0  # selects which sensor / wheel / hidden unit fails

    def wheel_index(self) -> int:
        return self.rng_seed % N_OUTPUTS

    def sensor_index(self) -> int:
        return self.rng_seed % N_SENSORS

    def hidden_index(self, n_hidden: int) -> int:
        return self.rng_seed % n_hidden if n_hidden > 0 else 0


class PlasticityRule(Enum):
    NONE = "none"
    HEBBIAN = "hebbian"


@dataclass(frozen=True)
class PlasticityConfig:
    rule: PlasticityRule = PlasticityRule.NONE
    eta: float = 0.0
    weight_clip: float = 4.0

    @property
    def enabled(self) -> bool:
        return self.rule is PlasticityRule.HEBBIAN and self.eta != 0.0


@dataclass(frozen=True)
class Topology:
    n_hidden: int = 0

    @property
    def n_weights(self) -> int:
        if self.n_hidden == 0:
            return N_OUTPUTS * N_INPUTS
        return self.n_hidden * N_INPUTS + N_OUTPUTS * self.n_hidden + N_OUTPUTS


def hebbian_step(w: float, pre: float, post: float, eta: float, clip: float) -> float:
    """One Hebbian weight update: w <- clip(w + eta*pre*post, +-clip)."""
    w = w + eta * pre * post
    return min(clip, max(-clip, w))


class Controller:
    """Single-trial-owned network: construction is pure, activation caches
    the activations that plasticity consumes."""

    def __init__(
        self,
        topology: Topology,
        weights: np.ndarray,
        threshold: float = 0.5,
        plasticity: PlasticityConfig = PlasticityConfig(),
        failure: FailureInjection | None = None,
    ):
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (topology.n_weights,):
            raise ValueError(
                f"expected {topology.n_weights} weights for {topology}, got {weights.shape}"
            )
        self.topology = topology
        self.weights = weights.copy()
        self.threshold = threshold
        self.plasticity = plasticity
        self.failure = failure
        self.step_count = 0
        self._x: np.ndarray | None = None
        self._hidden: np.ndarray | None = None
        self._out: np.ndarray | None = None

    # -- housekeeping -------------------------------------------------------

    def clone(self) -> "Controller":
        return Controller(
            self.topology,
            self.weights,
            self.threshold,
            self.plasticity,
            self.failure,
        )

    def reset_state(self) -> None:
        self.step_count = 0
        self._x = self._hidden = self._out = None

    def _matrices(self):
        h = self.topology.n_hidden
        if h == 0:
            return self.weights.reshape(N_OUTPUTS, N_INPUTS), None, None
        w1 = self.weights[: h * N_INPUTS].reshape(h, N_INPUTS)
        w2 = self.weights[h * N_INPUTS : h * N_INPUTS + N_OUTPUTS * h].reshape(N_OUTPUTS, h)
        wb = self.weights[h * N_INPUTS + N_OUTPUTS * h :]
        return w1, w2, wb

    def _failure_active(self) -> bool:
        f = self.failure
        return (
            f is not None
            and f.case is not FailureCase.NOTHING_FAIL
            and self.step_count >= f.onset_step
        )

    # -- forward pass -------------------------------------------------------

    def activate(self, reading: SensorReading) -> tuple[float, float]:
        s = np.asarray(reading.proximity, dtype=float).copy()
        failure = self.failure if self._failure_active() else None
        if failure is not None and failure.case is FailureCase.SENSOR_FAIL:
            s[failure.sensor_index()] = 0.0
        alert = 1.0 if float(s.sum()) >= self.threshold else 0.0
        x = np.empty(N_INPUTS)
        x[:N_SENSORS] = s
        x[N_SENSORS] = alert
        x[N_SENSORS + 1] = 1.0

        h = self.topology.n_hidden
        if h == 0:
            w0, _, _ = self._matrices()
            hidden = np.zeros(0)
            out = np.tanh(w0 @ x)
        else:
            w1, w2, wb = self._matrices()
            hidden = np.tanh(w1 @ x)
            if failure is not None and failure.case is FailureCase.HIDDEN_NEURON_FAIL:
                hidden[failure.hidden_index(h)] = 0.0
            out = np.tanh(w2 @ hidden + wb)

        if failure is not None:
            case = failure.case
            if case is FailureCase.WHEEL_NEURON_FAIL:
                out[failure.wheel_index()] = 0.0
            elif case is FailureCase.MOTOR_WEAK:
                out[failure.wheel_index()] *= 1.0 - failure.severity
            elif case is FailureCase.LEFT_WHEEL_DAMAGE:
                out[0] = 0.0
            elif case is FailureCase.RIGHT_WHEEL_DAMAGE:
                out[1] = 0.0

        self._x, self._hidden, self._out = x, hidden, out
        self.step_count += 1
        return float(out[0]), float(out[1])

    @property
    def last_inputs(self) -> np.ndarray:
        """Sensor values the network actually received on the last activate
        call (after any sensor fault), for trace logging."""
        if self._x is None:
            return np.zeros(N_SENSORS)
        return self._x[:N_SENSORS].copy()

    def motion_scales(self) -> tuple[float, float, float]:
        """(speed, turn, clearance) multipliers from the active failure."""
        if self._failure_active():
            case = self.failure.case
            if case is FailureCase.BODY_DAMAGE:
                return 1.0 - self.failure.severity / 2.0, 1.0, 1.0 - self.failure.severity
            if case is FailureCase.JOINT_FAIL:
                return 1.0, 0.5, 1.0
        return 1.0, 1.0, 1.0

    # -- lifetime plasticity -------------------------------------------------

    def apply_plasticity(self) -> None:
        """Hebbian update from the activations cached by the last
        ``activate`` call; exact no-op when disabled or eta == 0."""
        if not self.plasticity.enabled or self._x is None:
            return
        eta = self.plasticity.eta
        clip = self.plasticity.weight_clip
        h = self.topology.n_hidden
        if h == 0:
            w0 = self.weights.reshape(N_OUTPUTS, N_INPUTS)
            w0 += eta * np.outer(self._out, self._x)
            np.clip(w0, -clip, clip, out=w0)
        else:
            w1, w2, wb = self._matrices()
            w1 += eta * np.outer(self._hidden, self._x)
            w2 += eta * np.outer(self._out, self._hidden)
            wb += eta * self._out
            np.clip(w1, -clip, clip, out=w1)
            np.clip(w2, -clip, clip, out=w2)
            np.clip(wb, -clip, clip, out=wb)

    # -- persistence ---------------------------------------------------------

    def to_text(self) -> str:
        f = self.failure
        failure = (
            "none"
            if f is None
            else f"{f.case.value} severity={f.severity!r} onset={f.onset_step} seed={f.rng_seed}"
        )
        lines = [
            "evobot-controller v1",
            f"n_hidden {self.topology.n_hidden}",
            f"threshold {self.threshold!r}",
            f"plasticity {self.plasticity.rule.value}",
            f"eta {self.plasticity.eta!r}",
            f"weight_clip {self.plasticity.weight_clip!r}",
            f"failure {failure}",
            "weights " + " ".join(repr(w) for w in self.weights.tolist()),
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Controller":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("evobot-controller v1"):
            raise ValueError("not an evobot-controller v1 file")
        fields: dict[str, str] = {}
        for ln in lines[1:]:
            key, _, value = ln.partition(" ")
            fields[key] = value
        failure = None
        if fields.get("failure", "none") != "none":
            parts = fields["failure"].split()
            kv = dict(p.split("=") for p in parts[1:])
            failure = FailureInjection(
                FailureCase(parts[0]),
                onset_step=int(kv["onset"]),
                severity=float(kv["severity"]),
                rng_seed=int(kv["seed"]),
            )
        return cls(
            Topology(int(fields["n_hidden"])),
            np.array([float(v) for v in fields["weights"].split()]),
            threshold=float(fields["threshold"]),
            plasticity=PlasticityConfig(
                PlasticityRule(fields["plasticity"]),
                eta=float(fields["eta"]),
                weight_clip=float(fields["weight_clip"]),
            ),
            failure=failure,
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "Controller":
        with open(path) as fh:
            return cls.from_text(fh.read())


def random_controller(
    n_hidden: int,
    seed: int,
    threshold: float = 0.5,
    plasticity: PlasticityConfig = PlasticityConfig(),
) -> Controller:
    """Weights drawn uniformly from [-1, 1]; same seed, same controller."""
    topo = Topology(n_hidden)
    rng = np.random.default_rng(seed)
    return Controller(topo, rng.uniform(-1.0, 1.0, topo.n_weights), threshold, plasticity)


# ---------------------------------------------------------------------------
# Construction from a parsed body plan


def controller_from_bodyplan(
    plan,
    seed: int,
    threshold: float = 0.5,
    plasticity: PlasticityConfig = PlasticityConfig(),
) -> Controller:
    """Hidden-layer size comes from the plan's hidden neurons; plan
    connections overwrite the seeded random weights wherever a touch/motor/
    hidden neuron maps onto a network slot."""
    from .genotype import NeuronKind

    n_hidden = plan.hidden_count()
    ctrl = random_controller(n_hidden, seed, threshold, plasticity)

    input_slot: dict[int, int] = {}
    output_slot: dict[int, int] = {}
    hidden_slot: dict[int, int] = {}
    for n in plan.neurons:
        if n.kind is NeuronKind.TOUCH and len(input_slot) < N_SENSORS:
            input_slot[n.id] = len(input_slot)
        elif n.kind is NeuronKind.MOTOR and len(output_slot) < N_OUTPUTS:
            output_slot[n.id] = len(output_slot)
        elif n.kind is NeuronKind.HIDDEN:
            hidden_slot[n.id] = len(hidden_slot)

    if n_hidden == 0:
        w0 = ctrl.weights.reshape(N_OUTPUTS, N_INPUTS)
        for c in plan.connections:
            if c.from_id in input_slot and c.to_id in output_slot:
                w0[output_slot[c.to_id], input_slot[c.from_id]] = c.weight
    else:
        w1, w2, _ = ctrl._matrices()
        for c in plan.connections:
            if c.from_id in input_slot and c.to_id in hidden_slot:
                w1[hidden_slot[c.to_id], input_slot[c.from_id]] = c.weight
            elif c.from_id in hidden_slot and c.to_id in output_slot:
                w2[output_slot[c.to_id], hidden_slot[c.from_id]] = c.weight
    return ctrl


# ---------------------------------------------------------------------------
# Behavioral primitives


class Primitive(Enum):
    FORWARD = "forward"
    TURN_LEFT = "turn_left"
    TURN_RIGHT = "turn_right"
    AVOID = "avoid"
    SEEK = "seek"


PrimitiveSequence = list[tuple[Primitive, int]]


def _wrap_angle(a: float) -> float:
    while a > math.pi:
        a -= 2.0 * math.pi
    while a < -math.pi:
        a += 2.0 * math.pi
    return a


def primitive_motor(
    primitive: Primitive,
    world: World,
    body: RobotBody,
    state: RobotState,
    reading: SensorReading,
) -> tuple[float, float]:
    if primitive is Primitive.FORWARD:
        return 1.0, 1.0
    if primitive is Primitive.TURN_LEFT:
        return -0.5, 0.5
    if primitive is Primitive.TURN_RIGHT:
        return 0.5, -0.5
    if primitive is Primitive.AVOID:
        prox = reading.proximity
        peak = int(np.argmax(prox))
        if prox[peak] <= 1e-9:
            return 1.0, 1.0
        if body.sensor_bearings[peak] >= 0.0:  # threat on the left, bear right
            return 0.8, -0.2
        return -0.2, 0.8
    if primitive is Primitive.SEEK:
        tx, ty = world.target.center
        err = _wrap_angle(math.atan2(ty - state.y, tx - state.x) - state.heading)
        left = min(1.0, max(-1.0, 1.0 - err))
        right = min(1.0, max(-1.0, 1.0 + err))
        return left, right
    raise ValueError(f"unknown primitive {primitive}")


def run_primitive_sequence(
    sequence: PrimitiveSequence,
    world: World,
    body: RobotBody,
    state: RobotState,
    cfg: StepConfig = StepConfig(),
) -> tuple[RobotState, Trace]:
    """Execute scripted primitives in order; returns the final state and the
    recorded trajectory."""
    trace = Trace()
    t = cfg.t_start
    for primitive, duration in sequence:
        if duration <= 0:
            raise ValueError("primitive durations must be positive")
        for _ in range(duration):
            reading = sense(world, body, state)
            motor = primitive_motor(primitive, world, body, state, reading)
            state = step(world, body, state, motor, cfg)
            t += cfg.dt
            trace.append(t, state, motor, reading.proximity)
    return state, trace
