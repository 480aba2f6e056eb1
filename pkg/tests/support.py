"""Shared harness pieces for estimation and acceptance tests."""

import numpy as np

from evobot.controller import Controller, Topology
from evobot.fitness import FitnessConfig
from evobot.world import Rect, StepConfig, Target, TerrainKind, make_world


def steering_controller(forward: float = 1.0) -> Controller:
    """Hand-built obstacle-avoiding driver with three live hidden units.

    hidden0 watches the front pair, hidden1 the left flank, hidden2 the
    right flank; wheels get a forward bias and differential corrections, so
    every sensor group, hidden unit, and wheel genuinely shapes the
    trajectory (which is what makes injected faults observable).
    """
    topo = Topology(3)
    w1 = np.zeros((3, 12))
    w1[0, 3] = w1[0, 4] = 2.0  # front: -15 / +15 degrees
    w1[1, 5] = w1[1, 6] = 2.0  # left flank: 45 / 90 degrees
    w1[2, 1] = w1[2, 2] = 2.0  # right flank: -90 / -45 degrees
    w2 = np.array(
        [
            [-0.4, 1.0, -1.0],  # left wheel: slow for front, push past left threat
            [-0.8, -1.0, 1.0],  # right wheel: mirrored, stronger front braking
        ]
    )
    wb = np.array([forward, forward])
    weights = np.concatenate([w1.ravel(), w2.ravel(), wb])
    return Controller(topo, weights, threshold=0.5)


def diagnosis_world(seed: int):
    """Compact flat obstacle course whose crossing brushes the obstacles."""
    return make_world(
        TerrainKind.FLAT,
        5,
        seed=seed,
        bounds=Rect(0.0, 0.0, 16.0, 16.0),
        target=Target((8.0, 8.0), 1.0),
    )


def diagnosis_fcfg(max_steps: int = 160) -> FitnessConfig:
    return FitnessConfig(max_steps=max_steps, step_cfg=StepConfig(coarseness=0.5))
