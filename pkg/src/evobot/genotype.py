"""Stick-creature genotype grammar: parsing, canonical serialization, and
grammar-closed genetic operators.

A genotype is a plain string over a small alphabet.  ``X`` appends a stick
(one new part plus the joint connecting it), parentheses open a branch group
whose comma-separated branches all grow from the part in front of the ``(``,
modifier letters tune the next stick's properties, and square brackets attach
a neuron to the end part of the preceding stick:

    ``X``            one stick: two parts, one joint
    ``X(X,X)``       a stick with two branches fanning from its tip
    ``sslX[T:1]``    a smaller, shorter stick carrying a touch sensor

Modifier letters are multiplicative steps (uppercase = x1.1, lowercase =
x1/1.1, net effect clamped to [0.2, 5.0]):

    r/R rotation   l/L length   m/M muscle   s/S size   i/I stiffness
    e/E energy (friction)

Neuron brackets hold an optional type letter (``T`` touch, ``|`` motor,
nothing = hidden) followed by either a single ``:w`` bias entry or
comma-separated ``offset:weight`` input connections, offsets being relative
indices in the textual order of neurons (``[|1:2,-1:-3]`` wires the motor to
the next neuron with weight 2 and the previous one with weight -3).

A branch group must be the last element of its sequence, and empty branches
are legal and contribute nothing.  Parsing is total and deterministic;
mutation and crossover operate on the parsed tree and re-emit canonical text,
so their outputs always parse.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from enum import Enum

__all__ = [
    "Genotype",
    "BodyPlan",
    "Part",
    "Joint",
    "NeuronKind",
    "NeuronSpec",
    "Connection",
    "MutationRates",
    "GenotypeSyntaxError",
    "GenotypeSemanticError",
    "parse",
    "serialize",
    "mutate",
    "crossover",
    "bodyplans_isomorphic",
    "random_genotype",
]

Genotype = str

MODIFIER_LETTERS = "rlmsie"
MODIFIER_STEP = 1.1
MODIFIER_MIN, MODIFIER_MAX = 0.2, 5.0
BASE_LENGTH = 1.0
BASE_STIFFNESS = 0.5
ROTATION_STEP_RAD = 0.15
BRANCH_FAN_HALF_RAD = math.pi / 4

_ALPHABET = set("X()[]|T:,.+-0123456789" + MODIFIER_LETTERS + MODIFIER_LETTERS.upper())

_INT_RE = re.compile(r"[+-]?\d+")
_FLOAT_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


class GenotypeSyntaxError(ValueError):
    """Illegal character, unbalanced delimiter, or dangling modifier.

    ``position`` is the 1-based character index of the offending token.
    """

    def __init__(self, position: int, expected: str):
        self.position = position
        self.expected = expected
        super().__init__(f"syntax error at char {position}: expected {expected}")


class GenotypeSemanticError(ValueError):
    """Structurally valid text whose neuron wiring is inconsistent."""

    def __init__(self, position: int, message: str):
        self.position = position
        super().__init__(f"semantic error at char {position}: {message}")


def _clamp_mult(net: int) -> float:
    return min(MODIFIER_MAX, max(MODIFIER_MIN, MODIFIER_STEP**net))


# ---------------------------------------------------------------------------
# Domain types


@dataclass
class Part:
    id: int
    position: tuple[float, float, float]
    size_modifier: float = 1.0
    friction_modifier: float = 1.0
    # Net modifier letter counts for this stick (uppercase minus lowercase),
    # kept so canonical serialization is exact rather than recovered from the
    # clamped derived fields.
    modifiers: dict[str, int] = field(default_factory=dict)


@dataclass
class Joint:
    id: int
    part_a: int
    part_b: int
    stiffness: float = BASE_STIFFNESS
    rest_angle: float = 0.0


class NeuronKind(Enum):
    TOUCH = "touch"
    MOTOR = "motor"
    HIDDEN = "hidden"


@dataclass
class NeuronSpec:
    id: int
    kind: NeuronKind
    attachment: int
    params: list[float] = field(default_factory=list)


@dataclass
class Connection:
    from_id: int
    to_id: int
    weight: float


@dataclass
class BodyPlan:
    parts: list[Part]
    joints: list[Joint]
    neurons: list[NeuronSpec]
    connections: list[Connection]

    def validate(self) -> None:
        if len(self.parts) != len(self.joints) + 1:
            raise ValueError("part count must equal joint count + 1")
        ids = {p.id for p in self.parts}
        seen = {self.parts[0].id} if self.parts else set()
        for j in self.joints:
            if j.part_a not in ids or j.part_b not in ids:
                raise ValueError(f"joint {j.id} references unknown part")
            if j.part_a not in seen:
                raise ValueError("part-joint graph is not a connected tree")
            seen.add(j.part_b)
        if seen != ids:
            raise ValueError("part-joint graph is not a connected tree")
        nids = {n.id for n in self.neurons}
        for c in self.connections:
            if c.from_id not in nids or c.to_id not in nids:
                raise ValueError("connection references unknown neuron")

    def hidden_count(self) -> int:
        return sum(1 for n in self.neurons if n.kind is NeuronKind.HIDDEN)


@dataclass
class MutationRates:
    point_change: float = 0.2
    segment_insert: float = 0.1
    segment_delete: float = 0.1
    weight_perturb: float = 0.3
    weight_sigma: float = 0.3


# ---------------------------------------------------------------------------
# Parse tree.  Mutation and crossover edit this tree and re-emit text, which
# is what guarantees grammar closure.


@dataclass(eq=False)
class _NeuronNode:
    kind: NeuronKind
    bias: float | None = None
    # (target neuron node, weight); resolved from relative offsets after the
    # whole text is read so forward references work.
    entries: list[tuple["_NeuronNode", float]] = field(default_factory=list)


@dataclass(eq=False)
class _Node:
    mods: dict[str, int] = field(default_factory=dict)
    neurons: list[_NeuronNode] = field(default_factory=list)
    children: list["_Node"] = field(default_factory=list)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0  # 0-based cursor; errors report 1-based positions
        self.neurons: list[_NeuronNode] = []
        self.raw_entries: list[tuple[_NeuronNode, int, float, int]] = []

    def fail(self, expected: str, at: int | None = None):
        raise GenotypeSyntaxError((self.pos if at is None else at) + 1, expected)

    def peek(self) -> str | None:
        return self.text[self.pos] if self.pos < len(self.text) else None

    def parse(self) -> _Node:
        if not self.text:
            self.fail("non-empty genotype")
        for i, ch in enumerate(self.text):
            if ch not in _ALPHABET:
                raise GenotypeSyntaxError(i + 1, f"grammar character, got {ch!r}")
        root = _Node()
        self._sequence(root, top=True)
        if self.pos != len(self.text):
            self.fail("end of genotype")
        self._resolve_entries()
        return root

    def _sequence(self, attach: _Node, top: bool = False) -> None:
        """Parse one sequence growing from ``attach``: a chain of stick items
        optionally terminated by a branch group."""
        current = attach
        last_stick: _Node | None = None
        pending: dict[str, int] = {}
        pending_at = self.pos
        group_done = False
        while True:
            ch = self.peek()
            if ch is None or ch in ",)":
                if pending:
                    self.fail("'X' after modifier letters", at=pending_at)
                if ch is None and not top:
                    self.fail("')' closing branch group")
                if ch is not None and top:
                    self.fail("stick, branch, or end of genotype")
                return
            if group_done:
                self.fail("',' or ')' after branch group")
            if ch in MODIFIER_LETTERS or ch.lower() in MODIFIER_LETTERS:
                if not pending:
                    pending_at = self.pos
                letter = ch.lower()
                pending[letter] = pending.get(letter, 0) + (1 if ch.isupper() else -1)
                self.pos += 1
            elif ch == "X":
                node = _Node(mods={k: v for k, v in pending.items() if v})
                pending = {}
                current.children.append(node)
                current = node
                last_stick = node
                self.pos += 1
            elif ch == "[":
                if pending:
                    self.fail("'X' after modifier letters", at=pending_at)
                if last_stick is None:
                    self.fail("a stick before a neuron bracket")
                last_stick.neurons.append(self._neuron())
            elif ch == "(":
                if pending:
                    self.fail("'X' after modifier letters", at=pending_at)
                self.pos += 1
                while True:
                    self._sequence(current)
                    nxt = self.peek()
                    if nxt == ",":
                        self.pos += 1
                    elif nxt == ")":
                        self.pos += 1
                        break
                    else:
                        self.fail("',' or ')' in branch group")
                group_done = True
            else:
                self.fail("stick, modifier, branch, or neuron")

    def _neuron(self) -> _NeuronNode:
        self.pos += 1  # consume '['
        ch = self.peek()
        if ch == "T":
            kind = NeuronKind.TOUCH
            self.pos += 1
        elif ch == "|":
            kind = NeuronKind.MOTOR
            self.pos += 1
        else:
            kind = NeuronKind.HIDDEN
        neuron = _NeuronNode(kind)
        self.neurons.append(neuron)
        ch = self.peek()
        if ch == ":":
            self.pos += 1
            neuron.bias = self._number(_FLOAT_RE, "bias value")
        elif ch != "]":
            while True:
                at = self.pos
                offset = int(self._number(_INT_RE, "connection offset"))
                if self.peek() != ":":
                    self.fail("':' between offset and weight")
                self.pos += 1
                weight = self._number(_FLOAT_RE, "connection weight")
                self.raw_entries.append((neuron, offset, weight, at))
                if self.peek() == ",":
                    self.pos += 1
                else:
                    break
        if self.peek() != "]":
            self.fail("']' closing neuron")
        self.pos += 1
        return neuron

    def _number(self, pattern: re.Pattern, what: str) -> float:
        m = pattern.match(self.text, self.pos)
        if not m:
            self.fail(what)
        self.pos = m.end()
        return float(m.group())

    def _resolve_entries(self) -> None:
        index = {id(n): i for i, n in enumerate(self.neurons)}
        for neuron, offset, weight, at in self.raw_entries:
            target = index[id(neuron)] + offset
            if not 0 <= target < len(self.neurons):
                raise GenotypeSemanticError(
                    at + 1, f"connection offset {offset} references no neuron"
                )
            neuron.entries.append((self.neurons[target], weight))


def _parse_tree(text: Genotype) -> _Node:
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Tree -> BodyPlan compilation


def _compile(root: _Node) -> BodyPlan:
    parts = [Part(0, (0.0, 0.0, 0.0))]
    joints: list[Joint] = []
    neurons: list[NeuronSpec] = []
    connections: list[Connection] = []
    node_neuron_ids: dict[int, int] = {}

    def grow(node: _Node, parent_id: int, heading: float) -> None:
        k = len(node.children)
        for j, child in enumerate(node.children):
            fan = 0.0
            if k > 1:
                fan = BRANCH_FAN_HALF_RAD * (2.0 * j / (k - 1) - 1.0)
            rest = fan + ROTATION_STEP_RAD * child.mods.get("r", 0)
            direction = heading + rest
            length = BASE_LENGTH * _clamp_mult(child.mods.get("l", 0))
            px, py, _ = parts[parent_id].position
            part = Part(
                id=len(parts),
                position=(
                    px + length * math.cos(direction),
                    py + length * math.sin(direction),
                    0.0,
                ),
                size_modifier=_clamp_mult(child.mods.get("s", 0)),
                friction_modifier=_clamp_mult(child.mods.get("e", 0)),
                modifiers=dict(child.mods),
            )
            parts.append(part)
            joints.append(
                Joint(
                    id=len(joints),
                    part_a=parent_id,
                    part_b=part.id,
                    stiffness=min(1.0, max(0.0, BASE_STIFFNESS * MODIFIER_STEP ** child.mods.get("i", 0))),
                    rest_angle=rest,
                )
            )
            for nn in child.neurons:
                spec = NeuronSpec(
                    id=len(neurons),
                    kind=nn.kind,
                    attachment=part.id,
                    params=[] if nn.bias is None else [nn.bias],
                )
                node_neuron_ids[id(nn)] = spec.id
                neurons.append(spec)
            grow(child, part.id, direction)

    grow(root, 0, 0.0)
    for node in root.walk():
        for nn in node.neurons:
            for target, weight in nn.entries:
                connections.append(
                    Connection(node_neuron_ids[id(target)], node_neuron_ids[id(nn)], weight)
                )
    plan = BodyPlan(parts, joints, neurons, connections)
    plan.validate()
    return plan


def parse(genotype: Genotype) -> BodyPlan:
    """Compile genotype text into a body plan.

    Raises :class:`GenotypeSyntaxError` or :class:`GenotypeSemanticError` on
    malformed input; never returns a plan violating the tree invariants.
    """
    return _compile(_parse_tree(genotype))


# ---------------------------------------------------------------------------
# Canonical serialization


def _fmt(x: float) -> str:
    return repr(float(x))


def _emit(root: _Node) -> Genotype:
    order = {id(n): i for i, n in enumerate(_collect_neurons(root))}

    def mods_text(node: _Node) -> str:
        out = []
        for letter in MODIFIER_LETTERS:
            net = node.mods.get(letter, 0)
            out.append((letter.upper() if net > 0 else letter) * abs(net))
        return "".join(out)

    def neuron_text(nn: _NeuronNode) -> str:
        head = {NeuronKind.TOUCH: "T", NeuronKind.MOTOR: "|", NeuronKind.HIDDEN: ""}[nn.kind]
        if nn.entries:
            me = order[id(nn)]
            body = ",".join(
                f"{order[id(t)] - me}:{_fmt(w)}" for t, w in nn.entries if id(t) in order
            )
        elif nn.bias is not None:
            body = f":{_fmt(nn.bias)}"
        else:
            body = ""
        return f"[{head}{body}]"

    def seq(node: _Node) -> str:
        out = []
        cur = node
        while True:
            out.append(mods_text(cur) + "X" + "".join(neuron_text(n) for n in cur.neurons))
            if len(cur.children) == 1:
                cur = cur.children[0]
            elif len(cur.children) > 1:
                out.append("(" + ",".join(seq(c) for c in cur.children) + ")")
                return "".join(out)
            else:
                return "".join(out)

    if not root.children:
        return "(,)"  # root-only plan: two empty branches keep the text non-empty
    if len(root.children) == 1:
        return seq(root.children[0])
    return "(" + ",".join(seq(c) for c in root.children) + ")"


def _collect_neurons(root: _Node) -> list[_NeuronNode]:
    out: list[_NeuronNode] = []
    for node in root.walk():
        out.extend(node.neurons)
    return out


def _tree_from_plan(plan: BodyPlan) -> _Node:
    children: dict[int, list[Joint]] = {}
    for j in plan.joints:
        children.setdefault(j.part_a, []).append(j)
    id_to_node: dict[int, _Node] = {}
    neuron_nodes: dict[int, _NeuronNode] = {}

    def build(part_id: int) -> _Node:
        part = plan.parts[part_id]
        node = _Node(mods={k: v for k, v in part.modifiers.items() if v})
        id_to_node[part_id] = node
        for spec in plan.neurons:
            if spec.attachment == part_id:
                nn = _NeuronNode(spec.kind, bias=spec.params[0] if spec.params else None)
                neuron_nodes[spec.id] = nn
                node.neurons.append(nn)
        for j in sorted(children.get(part_id, []), key=lambda j: j.id):
            node.children.append(build(j.part_b))
        return node

    root_id = plan.parts[0].id
    root = _Node()
    tree_root = build(root_id)
    root.children = tree_root.children
    root.neurons = tree_root.neurons  # neurons on the root part cannot be expressed; keep none
    for c in plan.connections:
        if c.from_id in neuron_nodes and c.to_id in neuron_nodes:
            bias = neuron_nodes[c.to_id]
            bias.entries.append((neuron_nodes[c.from_id], c.weight))
    return root


def serialize(plan: BodyPlan) -> Genotype:
    """Emit canonical genotype text for a valid body plan.

    Canonical form inlines single-branch groups as chains, drops empty
    branches, orders modifier letters ``r l m s i e``, and formats numbers
    with shortest round-trip ``repr``.  ``parse(serialize(p))`` is isomorphic
    to ``p``.
    """
    plan.validate()
    return _emit(_tree_from_plan(plan))


# ---------------------------------------------------------------------------
# Plan isomorphism (used by tests and the round-trip contract)


def bodyplans_isomorphic(a: BodyPlan, b: BodyPlan, tol: float = 1e-9) -> bool:
    """Structural equality up to float tolerance.

    Parts are created in preorder in both plans, so index-by-index comparison
    is the canonical bijection.
    """
    if (
        len(a.parts) != len(b.parts)
        or len(a.joints) != len(b.joints)
        or len(a.neurons) != len(b.neurons)
        or len(a.connections) != len(b.connections)
    ):
        return False
    for pa, pb in zip(a.parts, b.parts):
        if any(abs(x - y) > tol for x, y in zip(pa.position, pb.position)):
            return False
        if abs(pa.size_modifier - pb.size_modifier) > tol:
            return False
        if abs(pa.friction_modifier - pb.friction_modifier) > tol:
            return False
        ma = {k: v for k, v in pa.modifiers.items() if v}
        mb = {k: v for k, v in pb.modifiers.items() if v}
        if ma != mb:
            return False
    for ja, jb in zip(a.joints, b.joints):
        if (ja.part_a, ja.part_b) != (jb.part_a, jb.part_b):
            return False
        if abs(ja.stiffness - jb.stiffness) > tol or abs(ja.rest_angle - jb.rest_angle) > tol:
            return False
    for na, nb in zip(a.neurons, b.neurons):
        if na.kind is not nb.kind or na.attachment != nb.attachment:
            return False
        if len(na.params) != len(nb.params):
            return False
        if any(abs(x - y) > tol for x, y in zip(na.params, nb.params)):
            return False
    ca = sorted((c.from_id, c.to_id, round(c.weight, 9)) for c in a.connections)
    cb = sorted((c.from_id, c.to_id, round(c.weight, 9)) for c in b.connections)
    return ca == cb


# ---------------------------------------------------------------------------
# Genetic operators.  Both parse to a tree, edit the tree, and re-emit
# canonical text, so outputs always parse (grammar closure).


def _clone_tree(node: _Node, mapping: dict[int, _NeuronNode]) -> _Node:
    copy = _Node(mods=dict(node.mods))
    for nn in node.neurons:
        cn = _NeuronNode(nn.kind, nn.bias)
        mapping[id(nn)] = cn
        copy.neurons.append(cn)
    copy.children = [_clone_tree(c, mapping) for c in node.children]
    return copy


def _remap_entries(original: _Node, mapping: dict[int, _NeuronNode]) -> None:
    for node in original.walk():
        for nn in node.neurons:
            clone = mapping[id(nn)]
            for target, weight in nn.entries:
                if id(target) in mapping:
                    clone.entries.append((mapping[id(target)], weight))


def _clone(root: _Node) -> _Node:
    mapping: dict[int, _NeuronNode] = {}
    copy = _clone_tree(root, mapping)
    _remap_entries(root, mapping)
    return copy


def _prune_cross_entries(root: _Node) -> None:
    present = {id(n) for n in _collect_neurons(root)}
    for node in root.walk():
        for nn in node.neurons:
            nn.entries = [(t, w) for t, w in nn.entries if id(t) in present]


def mutate(genotype: Genotype, rates: MutationRates, rng_seed: int) -> Genotype:
    """Seeded, grammar-closed mutation.

    With all rates zero the input text is returned unchanged; otherwise the
    result is canonical text of the edited tree and always parses.
    """
    rng = random.Random(rng_seed)
    tree = _clone(_parse_tree(genotype))
    sticks = [n for n in tree.walk() if n is not tree]
    changed = False

    if rng.random() < rates.point_change and sticks:
        node = rng.choice(sticks)
        letter = rng.choice(MODIFIER_LETTERS)
        node.mods[letter] = node.mods.get(letter, 0) + rng.choice((-1, 1))
        changed = True
    if rng.random() < rates.segment_insert:
        parent = rng.choice([tree] + sticks)
        parent.children.insert(rng.randrange(len(parent.children) + 1), _Node())
        changed = True
    if rng.random() < rates.segment_delete:
        leaves = [n for n in sticks if not n.children]
        if len(sticks) > 1 and leaves:
            victim = rng.choice(leaves)
            for node in tree.walk():
                if victim in node.children:
                    node.children.remove(victim)
                    break
            _prune_cross_entries(tree)
            changed = True
    for nn in _collect_neurons(tree):
        if nn.bias is not None and rng.random() < rates.weight_perturb:
            nn.bias += rng.gauss(0.0, rates.weight_sigma)
            changed = True
        for i, (target, weight) in enumerate(nn.entries):
            if rng.random() < rates.weight_perturb:
                nn.entries[i] = (target, weight + rng.gauss(0.0, rates.weight_sigma))
                changed = True

    return _emit(tree) if changed else genotype


def crossover(a: Genotype, b: Genotype, rng_seed: int) -> Genotype:
    """Subtree exchange at stick boundaries; deterministic per seed.

    A random stick of ``a`` (with its whole subtree) is replaced by a random
    subtree of ``b``.  Connections that would cross the splice are dropped.
    """
    rng = random.Random(rng_seed)
    ta = _clone(_parse_tree(a))
    tb = _clone(_parse_tree(b))
    sticks_a = [n for n in ta.walk() if n is not ta]
    sticks_b = [n for n in tb.walk() if n is not tb]
    if not sticks_a or not sticks_b:
        return a
    cut = rng.choice(sticks_a)
    donor = rng.choice(sticks_b)
    for node in ta.walk():
        if cut in node.children:
            node.children[node.children.index(cut)] = donor
            break
    _prune_cross_entries(ta)
    return _emit(ta)


def random_genotype(rng_seed: int, max_sticks: int = 6) -> Genotype:
    """Small random valid genotype, handy for fuzzing and demos."""
    rng = random.Random(rng_seed)
    root = _Node()
    nodes = [root]
    for _ in range(rng.randint(1, max_sticks)):
        parent = rng.choice(nodes)
        child = _Node()
        if rng.random() < 0.5:
            letter = rng.choice(MODIFIER_LETTERS)
            child.mods[letter] = rng.choice((-2, -1, 1, 2))
        parent.children.append(child)
        nodes.append(child)
    sticks = [n for n in nodes if n is not root]
    neurons: list[_NeuronNode] = []
    for node in sticks:
        if rng.random() < 0.4:
            kind = rng.choice((NeuronKind.TOUCH, NeuronKind.MOTOR, NeuronKind.HIDDEN))
            nn = _NeuronNode(kind, bias=round(rng.uniform(-2, 2), 3))
            node.neurons.append(nn)
            neurons.append(nn)
    for nn in neurons:
        if len(neurons) > 1 and rng.random() < 0.5:
            target = rng.choice([m for m in neurons if m is not nn])
            nn.bias = None
            nn.entries.append((target, round(rng.uniform(-3, 3), 3)))
    return _emit(root)
