#!/usr/bin/env python3
"""Tour of the stick-genotype grammar: parsing, round-trips, and the closed
genetic operators."""

from evobot.genotype import MutationRates, crossover, mutate, parse, serialize

SAMPLES = [
    "X",                       # one stick
    "X(X,X)",                  # a stick with two branches
    "sslX[T:1]",               # smaller, shorter stick with a touch sensor
    "X[:0.5]X[|1:2,-1:-3]X[T:1]",  # hidden unit + motor wired to its neighbours
    # every grammar feature at once: nested branches, empty branches, stacked
    # modifiers, touch sensors, a motor with relative connections
    "(rrX(IX(ISSSEEX[T:1]),lmXMMMMEEEX[|1:2,-1:-3]rrSEEX[T:-0.407](SSISSLIEEX,,SSISSLIEEX),))",
]

for text in SAMPLES:
    plan = parse(text)
    print(f"{text}")
    print(
        f"  -> {len(plan.parts)} parts, {len(plan.joints)} joints, "
        f"{len(plan.neurons)} neurons ({plan.hidden_count()} hidden), "
        f"{len(plan.connections)} connections"
    )
    print(f"  canonical: {serialize(plan)}")

print("\nerror reporting is positional:")
for bad in ("rrQ", "X(X", "X[9:1.0]"):
    try:
        parse(bad)
    except Exception as err:
        print(f"  {bad!r}: {err}")

print("\nmutation and crossover stay inside the grammar:")
g = SAMPLES[-1]
rates = MutationRates()
for seed in range(4):
    child = mutate(g, rates, seed)
    parse(child)  # always valid
    print(f"  mutate(seed={seed}): {child[:60]}{'...' if len(child) > 60 else ''}")
cross = crossover(SAMPLES[-1], "X(X,X)", 7)
parse(cross)
print(f"  crossover: {cross[:60]}{'...' if len(cross) > 60 else ''}")
