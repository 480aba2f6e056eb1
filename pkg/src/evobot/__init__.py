"""evobot: a deterministic evolutionary-robotics sandbox.

A two-wheeled, ten-sensor robot drives through parametric worlds (flat,
bumpy, or half-and-half, with circular obstacles and a target disc).  Neural
controllers map sensor readings to wheel commands and can be evolved under
several regimes: a standard generational GA, competitive co-evolution against
obstacle layouts, a shared-world ecology with energy-based survival, lifetime
Hebbian learning layered under evolution, and human-in-the-loop selection.
Hardware faults (weak motors, dead wheels, failed sensors and neurons, body
and joint damage) can be injected into any trial, and the estimation loop
evolves simulator parameters against recorded sensor traces to identify which
fault best explains a robot's behavior.

Everything is seeded: identical inputs and seeds give bit-identical outputs,
regardless of evaluation parallelism.
"""

from . import controller, estimation, evolution, experiments, fitness, genotype, world

__all__ = [
    "genotype",
    "world",
    "controller",
    "fitness",
    "evolution",
    "estimation",
    "experiments",
]

__version__ = "0.1.0"
