"""Stochastic decision forests: scenario-indexed forests plus random moves.

A stochastic decision forest consists of a forest F over outcomes W, a
surjection assigning one scenario to every outcome such that each scenario's
fiber is a tree (one root), and a family of "random moves": partial sections
mapping scenarios to moves of their trees, jointly covering all moves.

Exogenous information is modelled by finite partition algebras on the
domains of random moves.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from ._base import (
    InputInvalid,
    PreconditionViolated,
    ValidationReport,
    atom_key,
    node_key,
    set_key,
    sorted_atoms,
    sorted_nodes,
)
from .order_core import Forest, validate_decision_forest


# ---------------------------------------------------------------------------
# Partition algebras (finite sigma-algebras presented by their atoms)


class PartitionAlgebra:
    """A finite sigma-algebra on a carrier set, given by its partition blocks."""

    def __init__(self, carrier, blocks):
        self.carrier = frozenset(carrier)
        blks = [frozenset(b) for b in blocks]
        if any(not b for b in blks):
            raise InputInvalid("partition blocks must be nonempty")
        union = frozenset(itertools.chain.from_iterable(blks))
        if union != self.carrier or sum(len(b) for b in blks) != len(self.carrier):
            raise InputInvalid("blocks must partition the carrier")
        self.blocks = tuple(sorted_nodes(blks))

    # -- constructors -------------------------------------------------------

    @classmethod
    def powerset(cls, carrier):
        return cls(carrier, [{w} for w in carrier])

    @classmethod
    def trivial(cls, carrier):
        carrier = frozenset(carrier)
        return cls(carrier, [carrier] if carrier else [])

    @classmethod
    def from_labels(cls, carrier, label):
        groups = {}
        for w in carrier:
            groups.setdefault(label(w), set()).add(w)
        return cls(carrier, groups.values())

    # -- queries ------------------------------------------------------------

    def block_of(self, w) -> frozenset:
        for b in self.blocks:
            if w in b:
                return b
        raise KeyError(w)

    def contains(self, event) -> bool:
        """Whether the event is measurable (a union of blocks)."""
        event = frozenset(event)
        if not event <= self.carrier:
            return False
        hit = [b for b in self.blocks if b & event]
        return frozenset(itertools.chain.from_iterable(hit)) == event

    def events(self):
        """All measurable sets, including the empty set."""
        for r in range(len(self.blocks) + 1):
            for combo in itertools.combinations(self.blocks, r):
                yield frozenset(itertools.chain.from_iterable(combo))

    def restrict(self, sub) -> "PartitionAlgebra":
        """Trace algebra on a subset of the carrier."""
        sub = frozenset(sub)
        if not sub <= self.carrier:
            raise InputInvalid("restriction beyond the carrier")
        return PartitionAlgebra(sub, [b & sub for b in self.blocks if b & sub])

    def refines(self, other: "PartitionAlgebra") -> bool:
        if self.carrier != other.carrier:
            return False
        return all(any(b <= ob for ob in other.blocks) for b in self.blocks)

    def join(self, other: "PartitionAlgebra") -> "PartitionAlgebra":
        """Common refinement (the sigma-algebra generated by both)."""
        if self.carrier != other.carrier:
            raise InputInvalid("join requires equal carriers")
        blocks = [
            b & c for b in self.blocks for c in other.blocks if b & c
        ]
        return PartitionAlgebra(self.carrier, blocks)

    @property
    def key(self):
        return (set_key(self.carrier), tuple(set_key(b) for b in self.blocks))

    def __eq__(self, other):
        return isinstance(other, PartitionAlgebra) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"PartitionAlgebra({len(self.carrier)} elements, {len(self.blocks)} blocks)"


# ---------------------------------------------------------------------------
# Random moves


@dataclass(frozen=True)
class RandomMove:
    """A partial section: scenario -> move of that scenario's tree."""

    items: tuple  # tuple of (scenario, frozenset-node), canonically sorted

    @classmethod
    def from_map(cls, mapping) -> "RandomMove":
        items = tuple(
            sorted(
                ((s, frozenset(x)) for s, x in dict(mapping).items()),
                key=lambda it: atom_key(it[0]),
            )
        )
        if not items:
            raise InputInvalid("a random move needs a nonempty domain")
        return cls(items)

    @cached_property
    def domain(self) -> frozenset:
        return frozenset(s for s, _ in self.items)

    @cached_property
    def image(self) -> frozenset:
        return frozenset(x for _, x in self.items)

    @cached_property
    def image_union(self) -> frozenset:
        return frozenset(itertools.chain.from_iterable(self.image))

    def __call__(self, scenario) -> frozenset:
        for s, x in self.items:
            if s == scenario:
                return x
        raise KeyError(scenario)

    def get(self, scenario):
        for s, x in self.items:
            if s == scenario:
                return x
        return None

    @cached_property
    def key(self):
        return tuple((atom_key(s), node_key(x)) for s, x in self.items)

    def restricted(self, sub) -> "RandomMove":
        sub = frozenset(sub)
        return RandomMove.from_map({s: x for s, x in self.items if s in sub})

    def union(self, other: "RandomMove") -> "RandomMove":
        if self.domain & other.domain:
            raise InputInvalid("union requires disjoint domains")
        return RandomMove.from_map(dict(self.items) | dict(other.items))

    def __repr__(self):
        parts = ", ".join(f"{s!r}->{sorted_atoms(x)}" for s, x in self.items)
        return f"RandomMove({parts})"


def sorted_random_moves(moves):
    return sorted(moves, key=lambda m: m.key)


# ---------------------------------------------------------------------------
# The SDF container


class SDF:
    """Forest + scenario fibration + random moves (+ scenario event algebra)."""

    def __init__(self, forest: Forest, scenario_of, random_moves, scenarios=None,
                 algebra: PartitionAlgebra | None = None):
        self.forest = forest
        self.scenario_of = dict(scenario_of)
        if scenarios is None:
            scenarios = frozenset(self.scenario_of.values())
        self.scenarios = frozenset(scenarios)
        if algebra is None:
            algebra = PartitionAlgebra.powerset(self.scenarios)
        self.algebra = algebra
        uniq = {m.key: m for m in random_moves}
        self.random_moves = tuple(sorted_random_moves(uniq.values()))

    # -- fibration ----------------------------------------------------------

    @cached_property
    def trees(self) -> dict:
        out = {s: set() for s in self.scenarios}
        for x in self.forest.nodes:
            scen = {self.scenario_of.get(w) for w in x}
            if len(scen) == 1:
                out[next(iter(scen))].add(x)
        return {s: frozenset(nodes) for s, nodes in out.items()}

    def tree(self, scenario) -> frozenset:
        return self.trees[scenario]

    def tree_outcomes(self, scenario) -> frozenset:
        return frozenset(
            w for w, s in self.scenario_of.items() if s == scenario
        )

    def root(self, scenario) -> frozenset:
        """The root node of the scenario's tree (its full outcome set)."""
        return frozenset(self.tree_outcomes(scenario))

    def node_scenario(self, x):
        scen = {self.scenario_of[w] for w in x}
        if len(scen) != 1:
            raise PreconditionViolated("node crosses scenario fibers")
        return next(iter(scen))

    # -- convenience --------------------------------------------------------

    def moves_at(self, node):
        """Random moves whose section somewhere equals the given node."""
        node = frozenset(node)
        return [m for m in self.random_moves if node in m.image]


def validate_sdf(sdf: SDF) -> ValidationReport:
    """Validate the SDF axioms on top of forest validity.

    Error codes (beyond the forest codes): FiberMismatch, NotSurjective,
    SectionNotMove, SectionScenarioMismatch, DomainNotEvent, CoverageGap.
    """
    report = validate_decision_forest(sdf.forest.nodes)
    # The scenario map must be total on outcomes and surjective onto scenarios.
    for w in sorted_atoms(sdf.forest.outcomes):
        if w not in sdf.scenario_of:
            report.add("FiberMismatch", f"outcome {w!r} has no scenario")
    used = frozenset(sdf.scenario_of.get(w) for w in sdf.forest.outcomes)
    for s in sorted_atoms(sdf.scenarios - used):
        report.add("NotSurjective", f"scenario {s!r} owns no outcome")
    if not report.ok:
        return report
    # Every node must lie in a single fiber, and each fiber is a tree: its
    # maximal node is unique (the full fiber outcome set must be a node).
    for x in sdf.forest.node_list:
        scen = {sdf.scenario_of[w] for w in x}
        if len(scen) != 1:
            report.add(
                "FiberMismatch",
                f"node of size {len(x)} crosses scenarios {sorted_atoms(scen)}",
            )
    if not report.ok:
        return report
    for s in sorted_atoms(sdf.scenarios):
        fiber = sdf.tree_outcomes(s)
        maximal = [x for x in sdf.trees[s] if not any(y > x for y in sdf.trees[s])]
        if len(maximal) != 1 or next(iter(maximal)) != fiber:
            report.add(
                "FiberMismatch",
                f"scenario {s!r} fiber is not a tree rooted at its outcome set",
            )
    # Random moves: sections into moves of the right fiber, domains events.
    for m in sdf.random_moves:
        if not sdf.algebra.contains(m.domain):
            report.add(
                "DomainNotEvent",
                f"domain {sorted_atoms(m.domain)} is not an event",
            )
        for s, x in m.items:
            if s not in sdf.scenarios:
                report.add("SectionScenarioMismatch", f"unknown scenario {s!r}")
                continue
            if x not in sdf.forest.nodes or x in sdf.forest.terminals:
                report.add(
                    "SectionNotMove",
                    f"section at {s!r} is not a move of the forest",
                )
            elif sdf.node_scenario(x) != s:
                report.add(
                    "SectionScenarioMismatch",
                    f"section at {s!r} lies in another scenario's tree",
                )
    # Coverage: every move is hit by some section.
    covered = set()
    for m in sdf.random_moves:
        covered.update(m.image)
    for x in sdf.forest.moves:
        if x not in covered:
            report.add(
                "CoverageGap",
                f"move of size {len(x)} is not in the image of any random move",
            )
    return report


# ---------------------------------------------------------------------------
# Order consistency and maximality


def order_ge(m1: RandomMove, m2: RandomMove) -> bool:
    """m1 >= m2 iff D_1 ⊇ D_2 and m1(ω) ⊇ m2(ω) for all ω in D_2."""
    if not m1.domain >= m2.domain:
        return False
    return all(m1(s) >= x for s, x in m2.items)


def _family_order_consistent(moves) -> tuple:
    """Return (ok, witness) for order consistency of a family of sections."""
    moves = list(moves)
    for m1, m2 in itertools.permutations(moves, 2):
        common = m1.domain & m2.domain
        if any(m1(s) >= m2(s) for s in common):
            if not order_ge(m1, m2):
                return False, (m1, m2)
    return True, None


def check_order_consistency(sdf: SDF) -> ValidationReport:
    """One scenariowise comparison must force the global comparison."""
    report = ValidationReport()
    ok, witness = _family_order_consistent(sdf.random_moves)
    if not ok:
        m1, m2 = witness
        report.add(
            "OrderInconsistent",
            f"sections compare at some scenario but {m1!r} is not >= {m2!r}",
        )
    return report


def surely_nontrivial(sdf: SDF) -> bool:
    """Every scenario's root is a move (at least two outcomes per tree)."""
    return all(len(sdf.root(s)) >= 2 for s in sdf.scenarios)


def check_maximality(sdf: SDF) -> ValidationReport:
    """No coarser order-consistent family arises by gluing random moves.

    Repeatedly tries to union pairs with disjoint domains whenever the glued
    section keeps the family order-consistent and its domain is an event; if
    the closure adds anything, the family was not maximal.
    """
    report = ValidationReport()
    family = list(sdf.random_moves)
    glued_any = False
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(list(family), 2):
            if a.domain & b.domain:
                continue
            u = a.union(b)
            if not sdf.algebra.contains(u.domain):
                continue
            candidate = [m for m in family if m not in (a, b)] + [u]
            ok, _ = _family_order_consistent(candidate)
            if ok:
                family = candidate
                glued_any = True
                changed = True
                break
    if glued_any:
        report.add(
            "NotMaximal",
            f"{len(sdf.random_moves) - len(family)} gluing step(s) possible",
        )
    return report


# ---------------------------------------------------------------------------
# Exogenous information structures


def eis_admits_recall(sdf: SDF, eis: dict) -> tuple:
    """(ok, witness): events known at a later move restrict to earlier ones.

    `eis` maps each random move to a PartitionAlgebra on its domain.  The
    structure admits recall iff for all m >= m', every event of the algebra
    at m traces to an event of the algebra at m'.  It suffices to check the
    blocks (general events are unions of blocks).
    """
    moves = sorted_random_moves(eis)
    for m1 in moves:
        for m2 in moves:
            if m1 is m2 or not order_ge(m1, m2):
                continue
            alg1, alg2 = eis[m1], eis[m2]
            for block in alg1.blocks:
                trace = block & m2.domain
                if trace and not alg2.contains(trace):
                    return False, (m1, m2, block)
    return True, None


# ---------------------------------------------------------------------------
# Choice predicates


def is_choice(forest: Forest, c) -> bool:
    """A choice is a nonempty union of nodes."""
    c = frozenset(c)
    if not c:
        return False
    return frozenset(itertools.chain.from_iterable(forest.down_nodes(c))) == c


def choice_predicates(sdf: SDF, c, reference_moves) -> dict:
    """Evaluate non-redundancy, completeness and availability of c.

    reference_moves: the family of random moves the completeness/availability
    notions are relative to (usually an agent's move family).
    """
    from .order_core import immediate_predecessors

    c = frozenset(c)
    preds = immediate_predecessors(sdf.forest, c)
    # Non-redundant: if P(c) misses the tree of ω entirely, then c must not
    # meet that tree's outcomes.
    non_redundant = True
    for s in sdf.scenarios:
        if not any(sdf.node_scenario(x) == s for x in preds):
            if c & sdf.tree_outcomes(s):
                non_redundant = False
                break
    complete = True
    available_at = []
    for m in sorted_random_moves(reference_moves):
        hit = frozenset(s for s, x in m.items if x in preds)
        if hit not in (frozenset(), m.domain):
            complete = False
        if hit == m.domain:
            available_at.append(m)
    return {
        "predecessors": preds,
        "non_redundant": non_redundant,
        "complete": complete,
        "available_at": tuple(available_at),
    }


def is_adapted_choice(sdf: SDF, c, eis: dict, ref_choices: dict,
                      reference_moves=None, strict: bool = True) -> bool:
    """Whether c is adapted to the exogenous information and reference choices.

    c must be non-redundant and complete (precondition; with strict=True a
    violation raises, otherwise returns False), and for every random move m
    it is available at and every reference choice c' of m, the set of
    scenarios where m's section leads into c ∩ c' must be measurable at m.
    """
    from .order_core import immediate_predecessors

    if reference_moves is None:
        reference_moves = list(eis)
    preds_cache = {}

    def preds_of(outcome_set):
        key = set_key(outcome_set)
        if key not in preds_cache:
            preds_cache[key] = immediate_predecessors(sdf.forest, outcome_set)
        return preds_cache[key]

    info = choice_predicates(sdf, c, reference_moves)
    if not (info["non_redundant"] and info["complete"]):
        if strict:
            raise PreconditionViolated(
                "adaptedness requires a non-redundant, complete choice"
            )
        return False
    c = frozenset(c)
    for m in info["available_at"]:
        for cref in ref_choices.get(m, ()):
            inter = c & frozenset(cref)
            preds = preds_of(inter) if inter else frozenset()
            event = frozenset(s for s, x in m.items if x in preds)
            if not eis[m].contains(event):
                return False
    return True


# ---------------------------------------------------------------------------
# Induced tree of random moves


@dataclass(frozen=True)
class InducedTreeReport:
    is_poset: bool
    is_forest: bool
    evaluation_injective: bool
    evaluation_surjective: bool
    order_embedding: bool

    @property
    def is_decision_tree_order(self) -> bool:
        return self.is_poset and self.is_forest


class InducedTree:
    """Random moves plus singleton terminal sections, ordered like the forest.

    y <= y' iff D_y ⊇ D_{y'} and y(ω) ⊇ y'(ω) for all ω in D_{y'} (earlier
    positions are smaller).
    """

    def __init__(self, sdf: SDF):
        self.sdf = sdf
        terminals = []
        for x in sorted_nodes(sdf.forest.terminals):
            s = sdf.node_scenario(x)
            terminals.append(RandomMove.from_map({s: x}))
        self.elements = tuple(sorted_random_moves(list(sdf.random_moves) + terminals))

    def le(self, a: RandomMove, b: RandomMove) -> bool:
        return order_ge(a, b)

    def evaluation_pairs(self):
        for y in self.elements:
            for s, x in y.items:
                yield (y, s, x)

    def report(self) -> InducedTreeReport:
        els = self.elements
        # Antisymmetry (reflexivity and transitivity hold by construction of
        # the componentwise superset order).
        is_poset = not any(
            a is not b and self.le(a, b) and self.le(b, a)
            for a, b in itertools.combinations(els, 2)
        )
        # Forest: the predecessors of every element form a chain.
        is_forest = True
        for a in els:
            up = [b for b in els if self.le(b, a)]
            for b1, b2 in itertools.combinations(up, 2):
                if not (self.le(b1, b2) or self.le(b2, b1)):
                    is_forest = False
        # Evaluation (y, ω) -> y(ω) is a bijection onto the forest nodes.
        values = [x for _, _, x in self.evaluation_pairs()]
        evaluation_injective = len(values) == len(set(values))
        evaluation_surjective = set(values) == set(self.sdf.forest.nodes)
        # Order embedding scenariowise: comparability in the tree matches
        # node inclusion wherever both sections are defined.
        order_embedding = True
        for a, b in itertools.permutations(els, 2):
            common = a.domain & b.domain
            if any(a(s) >= b(s) for s in common) and not self.le(a, b):
                order_embedding = False
        return InducedTreeReport(
            is_poset, is_forest, evaluation_injective,
            evaluation_surjective, order_embedding,
        )


def induced_tree(sdf: SDF) -> InducedTree:
    return InducedTree(sdf)
