#!/usr/bin/env python3
"""Drive the robot with scripted primitives and watch the sensors work."""

import math

from evobot.controller import Primitive, run_primitive_sequence
from evobot.world import DEFAULT_BODY, RobotState, TerrainKind, make_world, sense

world = make_world(TerrainKind.FLAT, obstacles=2, seed=11)
body = DEFAULT_BODY
print(f"arena {world.bounds.width:.0f}x{world.bounds.height:.0f}, "
      f"{len(world.obstacles)} obstacles, target at {world.target.center}")

# seek the target, pause to turn, then seek again
sequence = [(Primitive.SEEK, 25), (Primitive.AVOID, 12)] * 4 + [(Primitive.SEEK, 40)]
start = RobotState(1.0, 1.0, 0.0)  # corner starts are kept clear of obstacles
final, trace = run_primitive_sequence(sequence, world, body, start)

d0 = math.dist((start.x, start.y), world.target.center)
d1 = math.dist((final.x, final.y), world.target.center)
print(f"start {d0:.1f} units from target, finished {d1:.1f} units away "
      f"after {len(trace)} steps")

reading = sense(world, body, final)
print("final proximity readings (1 = touching):")
for bearing_deg, value in zip(
    (-165, -90, -45, -15, 15, 45, 90, 165, 170, -170), reading.proximity
):
    bar = "#" * int(20 * value)
    print(f"  {bearing_deg:>5} deg  {value:0.2f} {bar}")

trace.write_csv("primitive_run.csv")
print("trajectory written to primitive_run.csv (t,x,y,heading,clearance,motors,s0..s9)")
