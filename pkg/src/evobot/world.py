"""Deterministic fixed-timestep world for a two-wheeled, ten-sensor robot.

The robot is a disc with differential drive.  Wheel commands in [-1, 1] set
wheel angular velocities; per step of length ``dt``:

    v     = wheel_radius * (w_l + w_r) / 2 * slope_factor
    omega = wheel_radius * (w_r - w_l) / wheel_base
    dt    = dt_min + coarseness * (dt_max - dt_min)

Terrain is a height grid.  Flat terrain is all zeros; bumpy terrain is a sum
of eight seeded sinusoids normalized to a target amplitude; the combined kind
is flat on the left half of the arena and bumpy on the right.  Terrain feeds
back into motion in exactly two ways: an uphill grade attenuates forward
speed (``slope_factor``), and local height variation under the body reduces
ground clearance.  A step that would drive the body disc into an obstacle or
outside the arena leaves the position unchanged and raises the touch flag;
heading and wheel angles still integrate, so a blocked robot can turn free.

Ten proximity sensors ray-cast from the body edge at fixed bearings; a
reading is ``max(0, 1 - d/sensor_range)`` where ``d`` is the gap to the
nearest obstacle or wall along the bearing.

Everything here is a pure function of its inputs.  ``World`` and
``RobotBody`` are immutable and shareable across threads; each trial owns its
``RobotState``.
"""

from __future__ import annotations

import csv
import math
import random
from functools import lru_cache as _lru_cache
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "TerrainKind",
    "Terrain",
    "Obstacle",
    "Target",
    "Rect",
    "World",
    "RobotBody",
    "RobotState",
    "SensorReading",
    "StepConfig",
    "PlacementError",
    "make_world",
    "make_terrain",
    "step",
    "sense",
    "reached_target",
    "start_corners",
    "terrain_height",
    "terrain_roughness",
    "Trace",
    "DEFAULT_BODY",
]

N_SENSORS = 10

# Eight side/front bearings plus two rear ones, degrees relative to heading.
SENSOR_BEARINGS_DEG = (-165.0, -90.0, -45.0, -15.0, 15.0, 45.0, 90.0, 165.0, 170.0, -170.0)
SENSOR_BEARINGS = tuple(math.radians(d) for d in SENSOR_BEARINGS_DEG)

STANDARD_GRAVITY = 9.81
SLOPE_ATTENUATION = 3.5  # slope_factor = max(0, 1 - attn*(g/g0)*uphill_grade)
N_TERRAIN_WAVES = 8

# the combined arena's regime boundary carries an uneven transition ridge:
# tall stretches force a crawl, seeded gaps stay passable
RIDGE_HEIGHT_FACTOR = 2.6  # peak height as a multiple of the wave amplitude
RIDGE_SIGMA = 1.6  # ridge half-width (length units)
RIDGE_LANE_PERIOD = 9.0  # spacing of low passes along the seam


class TerrainKind(Enum):
    FLAT = "flat"
    BUMPY = "bumpy"
    COMBINED = "combined"


class PlacementError(RuntimeError):
    """Obstacles could not be placed within the attempt budget."""


@dataclass(frozen=True)
class Rect:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def contains(self, x: float, y: float, margin: float = 0.0) -> bool:
        return (
            self.x_min + margin <= x <= self.x_max - margin
            and self.y_min + margin <= y <= self.y_max - margin
        )


@dataclass(frozen=True)
class Terrain:
    kind: TerrainKind
    heights: np.ndarray  # (ny, nx) grid sampled on the bounds
    cell_size: float
    amplitude: float
    seed: int


@dataclass(frozen=True)
class Obstacle:
    center: tuple[float, float]
    radius: float


@dataclass(frozen=True)
class Target:
    center: tuple[float, float]
    radius: float


@dataclass(frozen=True)
class World:
    terrain: Terrain
    obstacles: tuple[Obstacle, ...]
    target: Target
    bounds: Rect
    gravity: float = STANDARD_GRAVITY

    def describe(self) -> dict[str, str]:
        """Flat key/value view used in config echoes and trace headers."""
        return {
            "kind": self.terrain.kind.value,
            "seed": str(self.terrain.seed),
            "obstacles": str(len(self.obstacles)),
            "obstacle_list": ";".join(
                f"{o.center[0]!r},{o.center[1]!r},{o.radius!r}" for o in self.obstacles
            ),
            "width": repr(self.bounds.width),
            "height": repr(self.bounds.height),
            "cell_size": repr(self.terrain.cell_size),
            "amplitude": repr(self.terrain.amplitude),
            "gravity": repr(self.gravity),
            "target_x": repr(self.target.center[0]),
            "target_y": repr(self.target.center[1]),
            "target_radius": repr(self.target.radius),
        }


@dataclass(frozen=True)
class RobotBody:
    body_radius: float = 0.5
    wheel_base: float = 0.8
    wheel_radius: float = 0.25
    nominal_clearance: float = 1.0
    sensor_bearings: tuple[float, ...] = SENSOR_BEARINGS
    sensor_range: float = 6.0
    omega_max: float = 10.0  # wheel rad/s at |command| = 1

    def __post_init__(self):
        if len(self.sensor_bearings) != N_SENSORS:
            raise ValueError(f"exactly {N_SENSORS} sensor bearings required")
        for name in ("body_radius", "wheel_base", "wheel_radius", "sensor_range"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_BODY = RobotBody()


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    heading: float
    wheel_angle_left: float = 0.0
    wheel_angle_right: float = 0.0
    clearance: float = DEFAULT_BODY.nominal_clearance
    touched: bool = False
    rate_left: float = 0.0
    rate_right: float = 0.0


@dataclass(frozen=True)
class SensorReading:
    proximity: np.ndarray  # (10,), each in [0, 1]
    touch: bool
    rotation_rate_left: float
    rotation_rate_right: float


@dataclass(frozen=True)
class StepConfig:
    coarseness: float = 0.5
    dt_min: float = 0.05
    dt_max: float = 0.2
    t_start: float = 0.0
    t_finish: float = 60.0

    def __post_init__(self):
        if not 0.0 <= self.coarseness <= 1.0:
            raise ValueError("coarseness must be in [0, 1]")
        if not 0 < self.dt_min <= self.dt_max:
            raise ValueError("require 0 < dt_min <= dt_max")
        if self.t_start >= self.t_finish:
            raise ValueError("t_start must be below t_finish")

    @property
    def dt(self) -> float:
        return self.dt_min + self.coarseness * (self.dt_max - self.dt_min)

    @property
    def max_steps(self) -> int:
        return int((self.t_finish - self.t_start) / self.dt)


# ---------------------------------------------------------------------------
# Terrain


def _wave_table(seed: int) -> list[tuple[float, float, float, float, float]]:
    rng = random.Random(seed)
    waves = []
    for _ in range(N_TERRAIN_WAVES):
        theta = rng.uniform(0.0, 2.0 * math.pi)
        wavelength = rng.uniform(2.5, 7.0)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        amp = rng.uniform(0.5, 1.0)
        waves.append((math.cos(theta), math.sin(theta), 2.0 * math.pi / wavelength, phase, amp))
    return waves


def make_terrain(kind: TerrainKind, bounds: Rect, cell_size: float = 0.5,
                 amplitude: float = 0.3, seed: int = 0) -> Terrain:
    nx = int(round(bounds.width / cell_size)) + 1
    ny = int(round(bounds.height / cell_size)) + 1
    heights = np.zeros((ny, nx))
    if kind is not TerrainKind.FLAT and amplitude > 0.0:
        xs = bounds.x_min + cell_size * np.arange(nx)
        ys = bounds.y_min + cell_size * np.arange(ny)
        gx, gy = np.meshgrid(xs, ys)
        raw = np.zeros_like(gx)
        total = 0.0
        for cx, sy, freq, phase, amp in _wave_table(seed):
            raw += amp * np.sin(freq * (cx * gx + sy * gy) + phase)
            total += amp
        bump = amplitude * raw / total
        if kind is TerrainKind.BUMPY:
            heights = bump
        else:  # combined: flat left half, bumpy right half, ridge at the seam
            mid = bounds.x_min + bounds.width / 2.0
            heights = np.where(gx >= mid, bump, 0.0)
            phase = random.Random(seed ^ 0xB39).uniform(0.0, 2.0 * math.pi)
            lane = 0.5 + 0.5 * np.sin(2.0 * math.pi * gy / RIDGE_LANE_PERIOD + phase)
            ridge = (
                RIDGE_HEIGHT_FACTOR
                * amplitude
                * np.exp(-((gx - mid) ** 2) / (2.0 * RIDGE_SIGMA**2))
                * (0.35 + 0.65 * lane)
            )
            ridge[np.abs(gx - mid) > 3.0 * RIDGE_SIGMA] = 0.0
            heights = heights + ridge
    return Terrain(kind, heights, cell_size, amplitude, seed)


def terrain_height(world: World, x: float, y: float) -> float:
    terrain = world.terrain
    if terrain.kind is TerrainKind.FLAT:
        return 0.0
    h = terrain.heights
    fx = (x - world.bounds.x_min) / terrain.cell_size
    fy = (y - world.bounds.y_min) / terrain.cell_size
    fx = min(max(fx, 0.0), h.shape[1] - 1.000001)
    fy = min(max(fy, 0.0), h.shape[0] - 1.000001)
    ix, iy = int(fx), int(fy)
    tx, ty = fx - ix, fy - iy
    return float(
        h[iy, ix] * (1 - tx) * (1 - ty)
        + h[iy, ix + 1] * tx * (1 - ty)
        + h[iy + 1, ix] * (1 - tx) * ty
        + h[iy + 1, ix + 1] * tx * ty
    )


def terrain_heights(world: World, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized bilinear height lookup for a batch of points."""
    terrain = world.terrain
    if terrain.kind is TerrainKind.FLAT:
        return np.zeros(len(xs))
    h = terrain.heights
    fx = np.clip((xs - world.bounds.x_min) / terrain.cell_size, 0.0, h.shape[1] - 1.000001)
    fy = np.clip((ys - world.bounds.y_min) / terrain.cell_size, 0.0, h.shape[0] - 1.000001)
    ix = fx.astype(int)
    iy = fy.astype(int)
    tx = fx - ix
    ty = fy - iy
    return (
        h[iy, ix] * (1 - tx) * (1 - ty)
        + h[iy, ix + 1] * tx * (1 - ty)
        + h[iy + 1, ix] * (1 - tx) * ty
        + h[iy + 1, ix + 1] * tx * ty
    )


def terrain_roughness(world: World, x: float, y: float, body: RobotBody) -> float:
    """Height spread sampled under the body disc; zero on flat ground."""
    if world.terrain.kind is TerrainKind.FLAT:
        return 0.0
    r = body.body_radius
    hs = (
        terrain_height(world, x, y),
        terrain_height(world, x + r, y),
        terrain_height(world, x - r, y),
        terrain_height(world, x, y + r),
        terrain_height(world, x, y - r),
    )
    return max(hs) - min(hs)


def _uphill_grade(world: World, x: float, y: float, heading: float) -> float:
    if world.terrain.kind is TerrainKind.FLAT:
        return 0.0
    eps = world.terrain.cell_size * 0.5
    ahead = terrain_height(world, x + eps * math.cos(heading), y + eps * math.sin(heading))
    here = terrain_height(world, x, y)
    return max(0.0, (ahead - here) / eps)


# ---------------------------------------------------------------------------
# World construction


def start_corners(bounds: Rect, body: RobotBody) -> list[tuple[float, float]]:
    """The four start poses used when trials relocate the robot, each inset
    two body radii from a corner."""
    inset = 2.0 * body.body_radius
    return [
        (bounds.x_min + inset, bounds.y_min + inset),
        (bounds.x_max - inset, bounds.y_min + inset),
        (bounds.x_max - inset, bounds.y_max - inset),
        (bounds.x_min + inset, bounds.y_max - inset),
    ]


def make_world(
    kind: TerrainKind | str,
    obstacles: int,
    seed: int,
    *,
    bounds: Rect = Rect(0.0, 0.0, 24.0, 24.0),
    cell_size: float = 0.5,
    amplitude: float = 0.3,
    gravity: float = STANDARD_GRAVITY,
    target: Target | None = None,
    body: RobotBody = DEFAULT_BODY,
    obstacle_list: tuple[Obstacle, ...] | None = None,
) -> World:
    """Build a world deterministically from (kind, obstacle count, seed).

    Obstacles never overlap each other, any of the four start corners, or the
    target approach.  The combined arena puts the target inside its bumpy
    half so every crossing trial has to change terrain regimes.
    """
    if isinstance(kind, str):
        kind = TerrainKind(kind.lower())
    if obstacles < 0:
        raise ValueError("obstacle count must be >= 0")
    terrain = make_terrain(kind, bounds, cell_size, amplitude, seed)
    if target is None:
        if kind is TerrainKind.COMBINED:
            cx = bounds.x_min + 0.8 * bounds.width  # deep in the rough half
        else:
            cx = bounds.x_min + 0.5 * bounds.width
        target = Target((cx, bounds.y_min + 0.5 * bounds.height), 1.0)

    placed: list[Obstacle] = []
    if obstacle_list is not None:
        placed = list(obstacle_list)
    elif obstacles > 0:
        rng = random.Random(seed ^ 0x5EED)
        corners = start_corners(bounds, body)
        for _ in range(obstacles):
            ok = None
            for _attempt in range(1000):
                radius = rng.uniform(0.6, 1.2)
                margin = radius + body.body_radius + 0.2
                x = rng.uniform(bounds.x_min + margin, bounds.x_max - margin)
                y = rng.uniform(bounds.y_min + margin, bounds.y_max - margin)
                if any(
                    math.hypot(x - cx, y - cy) < radius + body.body_radius + 0.5
                    for cx, cy in corners
                ):
                    continue
                tx, ty = target.center
                if math.hypot(x - tx, y - ty) < radius + target.radius + 2.0 * body.body_radius:
                    continue
                if any(
                    math.hypot(x - o.center[0], y - o.center[1]) < radius + o.radius + 0.2
                    for o in placed
                ):
                    continue
                ok = Obstacle((x, y), radius)
                break
            if ok is None:
                raise PlacementError(
                    f"could not place obstacle {len(placed) + 1} of {obstacles} in 1000 attempts"
                )
            placed.append(ok)
    return World(terrain, tuple(placed), target, bounds, gravity)


# ---------------------------------------------------------------------------
# Kinematics


def _collides(world: World, x: float, y: float, body_radius: float) -> bool:
    b = world.bounds
    if not b.contains(x, y, margin=body_radius):
        return True
    for o in world.obstacles:
        dx, dy = x - o.center[0], y - o.center[1]
        r = o.radius + body_radius
        if dx * dx + dy * dy < r * r:
            return True
    return False


def step(
    world: World,
    body: RobotBody,
    state: RobotState,
    motor: tuple[float, float],
    cfg: StepConfig,
    *,
    wheel_gains: tuple[float, float] = (1.0, 1.0),
    speed_scale: float = 1.0,
    turn_scale: float = 1.0,
    clearance_scale: float = 1.0,
    slope_gain: float = 1.0,
) -> RobotState:
    """Advance one timestep; returns a fresh state.

    Keyword scales are neutral by default; they are how failure semantics and
    simulator-parameter hypotheses reach the kinematics without changing the
    core update rule.
    """
    dt = cfg.dt
    ml = min(1.0, max(-1.0, motor[0]))
    mr = min(1.0, max(-1.0, motor[1]))
    wl = ml * body.omega_max * wheel_gains[0]
    wr = mr * body.omega_max * wheel_gains[1]

    grade = _uphill_grade(world, state.x, state.y, state.heading)
    attn = SLOPE_ATTENUATION * (world.gravity / STANDARD_GRAVITY) * slope_gain
    slope_factor = max(0.0, 1.0 - attn * grade)

    v = body.wheel_radius * (wl + wr) / 2.0 * slope_factor * speed_scale
    omega = body.wheel_radius * (wr - wl) / body.wheel_base * turn_scale

    nx = state.x + v * dt * math.cos(state.heading)
    ny = state.y + v * dt * math.sin(state.heading)
    touched = False
    if v != 0.0 and _collides(world, nx, ny, body.body_radius):
        nx, ny = state.x, state.y
        touched = True

    clearance = max(
        0.0,
        body.nominal_clearance * clearance_scale - terrain_roughness(world, nx, ny, body),
    )
    return RobotState(
        x=nx,
        y=ny,
        heading=state.heading + omega * dt,
        wheel_angle_left=state.wheel_angle_left + abs(wl) * dt,
        wheel_angle_right=state.wheel_angle_right + abs(wr) * dt,
        clearance=clearance,
        touched=touched,
        rate_left=wl,
        rate_right=wr,
    )


# ---------------------------------------------------------------------------
# Sensing


@_lru_cache(maxsize=8)
def _bearing_vectors(bearings: tuple[float, ...]) -> np.ndarray:
    return np.array(bearings)


def sense(
    world: World,
    body: RobotBody,
    state: RobotState,
    extra_obstacles: tuple[Obstacle, ...] = (),
) -> SensorReading:
    """Ray-cast all ten sensors; readings hit 1.0 at contact and fade to 0 at
    ``sensor_range`` past the body edge."""
    angs = state.heading + _bearing_vectors(body.sensor_bearings)
    dx = np.cos(angs)
    dy = np.sin(angs)
    b = world.bounds
    eps = 1e-12
    with np.errstate(divide="ignore"):
        tx = np.where(
            dx > eps, (b.x_max - state.x) / dx,
            np.where(dx < -eps, (b.x_min - state.x) / dx, math.inf),
        )
        ty = np.where(
            dy > eps, (b.y_max - state.y) / dy,
            np.where(dy < -eps, (b.y_min - state.y) / dy, math.inf),
        )
    t_hit = np.minimum(tx, ty)
    for o in world.obstacles + tuple(extra_obstacles):
        ox = o.center[0] - state.x
        oy = o.center[1] - state.y
        proj = ox * dx + oy * dy
        disc = o.radius * o.radius - (ox * ox + oy * oy - proj * proj)
        valid = (proj > 0.0) & (disc >= 0.0)
        t = proj - np.sqrt(np.where(valid, disc, 0.0))
        t_hit = np.where(valid & (t >= 0.0) & (t < t_hit), t, t_hit)
    gap = t_hit - body.body_radius
    touch = state.touched or bool(np.any(gap <= 1e-9))
    gap = np.maximum(gap, 0.0)
    prox = np.where(
        gap < body.sensor_range, np.maximum(0.0, 1.0 - gap / body.sensor_range), 0.0
    )
    return SensorReading(
        proximity=prox,
        touch=touch,
        rotation_rate_left=state.rate_left,
        rotation_rate_right=state.rate_right,
    )


def reached_target(world: World, state: RobotState, body: RobotBody = DEFAULT_BODY) -> bool:
    dx = state.x - world.target.center[0]
    dy = state.y - world.target.center[1]
    reach = world.target.radius + body.body_radius
    return dx * dx + dy * dy <= reach * reach


# ---------------------------------------------------------------------------
# Trajectory recording

TRACE_COLUMNS = ["t", "x", "y", "heading", "clearance", "motor_l", "motor_r"] + [
    f"s{i}" for i in range(N_SENSORS)
]


@dataclass
class Trace:
    """Row-per-step trajectory: time, pose, clearance, motor commands, and
    the ten sensor values the controller saw."""

    rows: list[list[float]] = field(default_factory=list)
    meta: dict[str, str] = field(default_factory=dict)

    def append(self, t: float, state: RobotState, motor: tuple[float, float],
               sensors: np.ndarray) -> None:
        self.rows.append(
            [t, state.x, state.y, state.heading, state.clearance, motor[0], motor[1]]
            + [float(s) for s in sensors]
        )

    def __len__(self) -> int:
        return len(self.rows)

    def array(self) -> np.ndarray:
        return np.array(self.rows) if self.rows else np.zeros((0, len(TRACE_COLUMNS)))

    def sensors(self) -> np.ndarray:
        return self.array()[:, 7:]

    def positions(self) -> np.ndarray:
        return self.array()[:, 1:3]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            for key in sorted(self.meta):
                for line in str(self.meta[key]).splitlines() or [""]:
                    fh.write(f"# {key}: {line}\n")
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for row in self.rows:
                writer.writerow([repr(v) for v in row])

    @classmethod
    def read_csv(cls, path) -> "Trace":
        meta: dict[str, str] = {}
        rows: list[list[float]] = []
        with open(path, newline="") as fh:
            header_seen = False
            for line in fh:
                if line.startswith("#"):
                    body = line[1:].strip()
                    key, _, value = body.partition(":")
                    key = key.strip()
                    value = value.strip()
                    meta[key] = value if key not in meta else meta[key] + "\n" + value
                    continue
                if not line.strip():
                    continue
                if not header_seen:
                    header_seen = True  # column header
                    continue
                rows.append([float(v) for v in line.strip().split(",")])
        return cls(rows=rows, meta=meta)
