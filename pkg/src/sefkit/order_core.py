"""Finite forests of outcome sets ordered by reverse inclusion.

A forest is a family of nonempty outcome sets ("nodes") such that

  * the up-set of every node (its supersets within the family) is a chain
    with a greatest element (a root), and
  * outcomes correspond bijectively to maximal chains: for every outcome w,
    the nodes containing w form a maximal chain, and distinct outcomes have
    distinct chains.

This module also provides immediate predecessors of an outcome set,
histories (nonempty, non-maximal, upward-closed chains), their closures,
and the four order-theoretic flags used by the well-posedness analysis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from ._base import (
    ValidationReport,
    atom_key,
    charge_budget,
    node_key,
    set_key,
    sorted_atoms,
    sorted_nodes,
)


def _fmt_set(values):
    return "{" + ", ".join(repr(v) for v in sorted_atoms(values)) + "}"


class Forest:
    """An immutable family of nodes (frozensets of outcomes) under ⊇."""

    def __init__(self, nodes):
        node_list = [frozenset(n) for n in nodes]
        self.nodes = frozenset(node_list)
        self.node_list = tuple(sorted_nodes(self.nodes))
        self.outcomes = frozenset(itertools.chain.from_iterable(self.nodes))

    # -- basic structure ---------------------------------------------------

    def chain_of(self, w) -> frozenset:
        """All nodes containing the outcome w."""
        return frozenset(x for x in self.nodes if w in x)

    def up_set(self, x) -> frozenset:
        """Nodes weakly preceding x (supersets of x within the forest)."""
        return frozenset(y for y in self.nodes if y >= x)

    def down_nodes(self, c) -> frozenset:
        """Nodes contained in the outcome set c (c need not be a node)."""
        c = frozenset(c)
        return frozenset(x for x in self.nodes if x <= c)

    @cached_property
    def terminals(self) -> frozenset:
        """Minimal nodes (no proper subset in the forest)."""
        return frozenset(
            x for x in self.nodes if not any(y < x for y in self.nodes)
        )

    @cached_property
    def moves(self) -> tuple:
        """Non-minimal nodes, canonically ordered."""
        return tuple(x for x in self.node_list if x not in self.terminals)

    @cached_property
    def roots(self) -> frozenset:
        """Maximal nodes."""
        return frozenset(
            x for x in self.nodes if not any(y > x for y in self.nodes)
        )

    def is_move(self, x) -> bool:
        return frozenset(x) in self.nodes and frozenset(x) not in self.terminals

    def parent(self, x):
        """Immediate proper superset of x, or None for a root."""
        strict = [y for y in self.nodes if y > x]
        if not strict:
            return None
        return min(strict, key=len)

    def children(self, x) -> tuple:
        """Immediate proper subsets of x, canonically ordered."""
        x = frozenset(x)
        strict = [y for y in self.nodes if y < x]
        out = [y for y in strict if not any(z > y and z < x for z in strict)]
        return tuple(sorted_nodes(out))

    def successor_toward(self, x, w):
        """The child of move x whose outcome set contains w."""
        for y in self.children(x):
            if w in y:
                return y
        return None


def _is_chain(nodes) -> bool:
    nodes = list(nodes)
    for a, b in itertools.combinations(nodes, 2):
        if not (a >= b or b >= a):
            return False
    return True


def validate_decision_forest(nodes, outcomes=None) -> ValidationReport:
    """Validate the forest axioms; empty report means valid.

    Error codes: EmptyNode, DuplicateNode, UnknownOutcome, NotRooted,
    ChainNotMaximal, NotSeparated.
    """
    report = ValidationReport()
    raw = list(nodes)
    seen = set()
    for n in raw:
        fs = frozenset(n)
        if not fs:
            report.add("EmptyNode", "the empty set is not a valid node")
        if fs in seen:
            report.add("DuplicateNode", f"node {_fmt_set(fs)} appears more than once")
        seen.add(fs)
    forest = Forest(n for n in raw if n)
    if outcomes is not None:
        declared = frozenset(outcomes)
        for w in sorted_atoms(forest.outcomes - declared):
            report.add("UnknownOutcome", f"outcome {w!r} is not declared")
        for w in sorted_atoms(declared - forest.outcomes):
            report.add(
                "ChainNotMaximal",
                f"outcome {w!r} belongs to no node (its chain is empty)",
            )
    if not report.ok and any(c in ("EmptyNode", "DuplicateNode") for c in report.codes()):
        # Structural duplicates/empties already reported; still continue with
        # the de-duplicated nonempty family so further findings are useful.
        pass
    # Rooted-forest property: every up-set is a chain (it then automatically
    # has a greatest element, the family being finite).
    for x in forest.node_list:
        up = forest.up_set(x)
        if not _is_chain(up):
            report.add(
                "NotRooted",
                f"the supersets of node {_fmt_set(x)} are not totally ordered",
            )
    # Per-outcome chains: comparability and maximality.
    chains_seen = {}
    for w in sorted_atoms(forest.outcomes):
        chain = forest.chain_of(w)
        if not _is_chain(chain):
            report.add(
                "ChainNotMaximal",
                f"the nodes containing outcome {w!r} are not totally ordered",
            )
            continue
        for y in forest.node_list:
            if y in chain:
                continue
            if all(y >= x or x >= y for x in chain):
                report.add(
                    "ChainNotMaximal",
                    f"the chain of outcome {w!r} extends by node {_fmt_set(y)}",
                )
                break
        key = set_key(chain)
        if key in chains_seen:
            report.add(
                "NotSeparated",
                f"outcomes {chains_seen[key]!r} and {w!r} lie in exactly the same nodes",
            )
        else:
            chains_seen[key] = w
    return report


def maximal_chains(forest: Forest) -> list:
    """Maximal chains of a valid forest, one per outcome.

    Chains are returned root-first, listed in the canonical order of their
    generating outcome.
    """
    out = []
    done = set()
    for w in sorted_atoms(forest.outcomes):
        chain = forest.chain_of(w)
        key = set_key(chain)
        if key in done:
            continue
        done.add(key)
        out.append(tuple(sorted(chain, key=node_key, reverse=True)))
    return out


def immediate_predecessors(forest: Forest, c) -> frozenset:
    """Moves from which the outcome set c is immediately reachable.

    P(c) = {x in F | exists y in F, y ⊆ c, with ↑x = ↑y \\ {z in F : z ⊆ c}}.
    """
    c = frozenset(c)
    down = forest.down_nodes(c)
    preds = set()
    targets = {}
    for y in down:
        targets.setdefault(frozenset(forest.up_set(y) - down), None)
    for x in forest.nodes:
        if frozenset(forest.up_set(x)) in targets:
            preds.add(x)
    return frozenset(preds)


# ---------------------------------------------------------------------------
# Histories


def is_history(forest: Forest, h) -> bool:
    """A history is a nonempty, non-maximal, upward-closed chain of nodes."""
    h = frozenset(frozenset(x) for x in h)
    if not h or not h <= forest.nodes:
        return False
    if not _is_chain(h):
        return False
    for x in h:
        if not forest.up_set(x) <= h:
            return False
    # Non-maximal: some chain strictly extends it.
    extendable = any(
        y not in h and all(y >= x or x >= y for x in h) for y in forest.nodes
    )
    return extendable


def histories(forest: Forest) -> list:
    """All histories of a finite valid forest: the principal up-sets ↑x of moves.

    Every finite history contains its minimum x, is upward closed, hence
    equals ↑x; it is non-maximal exactly if x is a move (a chain through a
    child of x extends it).
    """
    charge_budget("histories", len(forest.moves))
    return [forest.up_set(x) for x in forest.moves]


def chain_intersection(h) -> frozenset:
    """⋂h as an outcome set."""
    h = list(h)
    out = frozenset(h[0])
    for x in h[1:]:
        out &= frozenset(x)
    return out


def infimum(forest: Forest, h):
    """Greatest lower bound of the chain h within the forest, or None."""
    h = [frozenset(x) for x in h]
    lower = [z for z in forest.nodes if all(x >= z for x in h)]
    for z in lower:
        if all(z >= other for other in lower):
            return z
    return None


def closure(forest: Forest, h) -> frozenset:
    """h together with its infimum when the infimum exists."""
    h = frozenset(frozenset(x) for x in h)
    inf = infimum(forest, h)
    if inf is None:
        return h
    return h | {inf}


# ---------------------------------------------------------------------------
# Order flags


@dataclass(frozen=True)
class OrderFlags:
    weakly_up_discrete: bool
    up_discrete: bool
    coherent: bool
    regular: bool

    @property
    def all_true(self) -> bool:
        return (
            self.weakly_up_discrete
            and self.up_discrete
            and self.coherent
            and self.regular
        )

    def to_dict(self):
        return {
            "weakly_up_discrete": self.weakly_up_discrete,
            "up_discrete": self.up_discrete,
            "coherent": self.coherent,
            "regular": self.regular,
        }


def _maximal_chains_within(nodes) -> list:
    """Maximal chains of an arbitrary finite sub-family under ⊇."""
    nodes = list(nodes)
    chains = []

    def extend(chain, candidates):
        ext = [y for y in candidates if all(y >= x or x >= y for x in chain)]
        if not ext:
            chains.append(frozenset(chain))
            return
        for y in ext:
            remaining = [z for z in ext if z != y]
            extend(chain + [y], remaining)

    if not nodes:
        return []
    extend([], nodes)
    # De-duplicate and keep only maximal ones.
    uniq = {set_key(c): c for c in chains}
    out = []
    for c in uniq.values():
        if not any(o > c for o in uniq.values()):
            out.append(c)
    seen = set()
    result = []
    for c in sorted(out, key=set_key):
        k = set_key(c)
        if k not in seen:
            seen.add(k)
            result.append(c)
    return result


def _has_maximum(chain) -> bool:
    chain = list(chain)
    return any(all(m >= x for x in chain) for m in chain)


def order_flags(forest: Forest) -> OrderFlags:
    """Evaluate the four order-theoretic properties literally.

    On finite forests all four hold; they are still computed rather than
    assumed, so the flags double as a structural sanity check.
    """
    # Weakly up-discrete: for every node x, every maximal chain of the strict
    # down-set of x has a greatest element.
    weakly = True
    for x in forest.node_list:
        below = [y for y in forest.nodes if y < x]
        for chain in _maximal_chains_within(below):
            if chain and not _has_maximum(chain):
                weakly = False
    # Up-discrete: every nonempty chain has a greatest element.  All chains
    # arise as nonempty subsets of maximal chains.
    up = True
    seen = set()
    total = 0
    for mc in maximal_chains(forest):
        total += 2 ** len(mc) - 1
        charge_budget("chains", total)
        for r in range(1, len(mc) + 1):
            for sub in itertools.combinations(mc, r):
                k = set_key(sub)
                if k in seen:
                    continue
                seen.add(k)
                if not _has_maximum(sub):
                    up = False
    # Coherent: every history without a minimum admits a continuation chain
    # with a greatest element.  Finite histories always contain their
    # minimum, so the condition is vacuously scanned.
    coherent = True
    for h in histories(forest):
        has_min = any(all(x >= m for x in h) for m in h)
        if has_min:
            continue
        continuations = []
        for mc in maximal_chains(forest):
            if h <= frozenset(mc):
                cont = frozenset(mc) - h
                if cont:
                    continuations.append(cont)
        if not any(_has_maximum(c) for c in continuations):
            coherent = False
    # Regular: for every non-maximal node x, the strict up-set of x has an
    # infimum within the forest.
    regular = True
    for x in forest.node_list:
        strict_up = forest.up_set(x) - {x}
        if not strict_up:
            continue
        if infimum(forest, strict_up) is None:
            regular = False
    return OrderFlags(weakly, up, coherent, regular)
