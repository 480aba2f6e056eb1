import random

import pytest

from evobot.genotype import (
    BodyPlan,
    GenotypeSemanticError,
    GenotypeSyntaxError,
    MutationRates,
    NeuronKind,
    bodyplans_isomorphic,
    crossover,
    mutate,
    parse,
    random_genotype,
    serialize,
)

# Kitchen-sink sample: nested branches, empty branches, stacked modifiers,
# touch and motor neurons, relative connections in both directions.
FULL_GENOTYPE = (
    "(rrX(IX(ISSSEEX[T:1]),lmXMMMMEEEX[|1:2,-1:-3]rrSEEX[T:-0.407]"
    "(SSISSLIEEX,,SSISSLIEEX),))"
)


def test_single_stick():
    plan = parse("X")
    assert len(plan.parts) == 2
    assert len(plan.joints) == 1
    assert len(plan.neurons) == 0


def test_two_branches():
    plan = parse("X(X,X)")
    assert len(plan.parts) == 4
    assert len(plan.joints) == 3
    assert len(plan.neurons) == 0


def test_full_sample_counts():
    # Hand-traced: 8 sticks (9 parts, 8 joints), two touch sensors and one
    # motor, whose +1/-1 entries resolve to the neighbouring sensors.
    plan = parse(FULL_GENOTYPE)
    assert len(plan.parts) == 9
    assert len(plan.joints) == 8
    assert len(plan.neurons) == 3
    kinds = [n.kind for n in plan.neurons]
    assert kinds == [NeuronKind.TOUCH, NeuronKind.MOTOR, NeuronKind.TOUCH]
    assert plan.hidden_count() == 0
    assert len(plan.connections) == 2
    assert {(c.from_id, c.to_id, c.weight) for c in plan.connections} == {
        (2, 1, 2.0),
        (0, 1, -3.0),
    }
    assert plan.neurons[0].params == [1.0]
    assert plan.neurons[2].params == [-0.407]


def test_full_sample_tree_shape():
    plan = parse(FULL_GENOTYPE)
    children = {}
    for j in plan.joints:
        children.setdefault(j.part_a, []).append(j.part_b)
    # root -> A -> {B -> C, D -> E -> F -> {G, H}}
    assert children[0] == [1]
    assert children[1] == [2, 4]
    assert children[2] == [3]
    assert children[4] == [5]
    assert children[5] == [6]
    assert children[6] == [7, 8]


def test_tree_invariants_hold_for_fuzzed_genotypes():
    for seed in range(200):
        plan = parse(random_genotype(seed))
        plan.validate()
        assert len(plan.parts) == len(plan.joints) + 1


@pytest.mark.parametrize(
    "text,kind",
    [
        ("", GenotypeSyntaxError),
        ("Z", GenotypeSyntaxError),
        ("X(X", GenotypeSyntaxError),
        ("X)", GenotypeSyntaxError),
        ("rr", GenotypeSyntaxError),
        ("rr(X)", GenotypeSyntaxError),
        ("[T:1]", GenotypeSyntaxError),
        ("X[T", GenotypeSyntaxError),
        ("X(X,X)X", GenotypeSyntaxError),
        ("X[5:1.0]", GenotypeSemanticError),
        ("X[T:1]X[-2:1]", GenotypeSemanticError),
    ],
)
def test_parse_errors(text, kind):
    with pytest.raises(kind):
        parse(text)


def test_error_positions_are_one_based():
    with pytest.raises(GenotypeSyntaxError) as err:
        parse("Xq")
    assert err.value.position == 2
    with pytest.raises(GenotypeSemanticError) as err:
        parse("X[3:1.0]")
    assert err.value.position == 3


def test_serialize_single_stick():
    assert serialize(parse("X")) == "X"


def test_serialize_preserves_modifiers():
    assert serialize(parse("rrX")) == "rrX"
    assert serialize(parse("SSiX")) == "SSiX"  # canonical letter order r l m s i e


def test_serialize_roundtrip_full_sample():
    plan = parse(FULL_GENOTYPE)
    text = serialize(plan)
    again = parse(text)
    assert bodyplans_isomorphic(plan, again)
    # canonical text is a fixed point
    assert serialize(again) == text


def test_serialize_roundtrip_fuzzed():
    for seed in range(300):
        g = random_genotype(seed)
        plan = parse(g)
        again = parse(serialize(plan))
        assert bodyplans_isomorphic(plan, again), g


def test_empty_branches_do_not_affect_plan():
    assert bodyplans_isomorphic(parse("X(X,,X)"), parse("X(X,X)"))


def test_mutate_zero_rates_is_identity():
    rates = MutationRates(0.0, 0.0, 0.0, 0.0, 0.0)
    assert mutate(FULL_GENOTYPE, rates, 1234) == FULL_GENOTYPE


def test_mutate_point_change_on_single_stick():
    rates = MutationRates(point_change=1.0, segment_insert=0.0, segment_delete=0.0, weight_perturb=0.0)
    out = mutate("X", rates, 7)
    assert out != "X"
    parse(out)


def test_mutate_same_seed_same_output():
    rates = MutationRates()
    a = mutate(FULL_GENOTYPE, rates, 99)
    b = mutate(FULL_GENOTYPE, rates, 99)
    assert a == b


def test_mutation_closure_fuzz():
    rates = MutationRates()
    for seed in range(1000):
        out = mutate(FULL_GENOTYPE, rates, seed)
        parse(out)


def test_crossover_single_stick_parents():
    assert crossover("X", "X", 0) == "X"


def test_crossover_self_cross_part_bound():
    n = len(parse(FULL_GENOTYPE).parts)
    for seed in range(50):
        child = parse(crossover(FULL_GENOTYPE, FULL_GENOTYPE, seed))
        assert 1 <= len(child.parts) <= 2 * n


def test_crossover_closure_fuzz():
    rng = random.Random(42)
    pool = [random_genotype(s) for s in range(60)] + [FULL_GENOTYPE, "X", "X(X,X)"]
    for seed in range(1000):
        a, b = rng.choice(pool), rng.choice(pool)
        parse(crossover(a, b, seed))


def test_crossover_deterministic():
    assert crossover(FULL_GENOTYPE, "X(X,X)", 5) == crossover(FULL_GENOTYPE, "X(X,X)", 5)


def test_root_only_plan_roundtrip():
    plan = parse("(,)")
    assert len(plan.parts) == 1 and len(plan.joints) == 0
    assert bodyplans_isomorphic(plan, parse(serialize(plan)))
