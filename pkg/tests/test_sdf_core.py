"""Scenario structure: random moves, information algebras, choice predicates."""

import pytest

from sefkit import (
    Forest,
    InducedTree,
    PartitionAlgebra,
    RandomMove,
    SDF,
    check_maximality,
    check_order_consistency,
    choice_predicates,
    eis_admits_recall,
    is_adapted_choice,
    surely_nontrivial,
    validate_sdf,
)
from sefkit.sdf_core import is_choice, order_ge


SCEN = ("w1", "w2")
W = [(o, a, b) for o in SCEN for a in (1, 2) for b in (1, 2)]


def x0(o):
    return frozenset(w for w in W if w[0] == o)


def xk(o, k):
    return frozenset(w for w in W if w[0] == o and w[1] == k)


def cdot(k):
    return frozenset(w for w in W if w[1] == k)


def ckm(k, m):
    return frozenset(w for w in W if w[1] == k and w[2] == m)


def cdotg(g):
    return frozenset(w for w in W if w[2] == g[w[0]])


def ckg(k, g):
    return frozenset(w for w in W if w[1] == k and w[2] == g[w[0]])


@pytest.fixture(scope="module")
def sdf():
    nodes = (
        [x0(o) for o in SCEN]
        + [xk(o, k) for o in SCEN for k in (1, 2)]
        + [frozenset([w]) for w in W]
    )
    forest = Forest(nodes)
    moves = [
        RandomMove.from_map({o: x0(o) for o in SCEN}),
        RandomMove.from_map({o: xk(o, 1) for o in SCEN}),
        RandomMove.from_map({o: xk(o, 2) for o in SCEN}),
    ]
    return SDF(forest, {w: w[0] for w in W}, moves)


def moves_of(sdf):
    m0 = next(m for m in sdf.random_moves if m("w1") == x0("w1"))
    m1 = next(m for m in sdf.random_moves if m("w1") == xk("w1", 1))
    m2 = next(m for m in sdf.random_moves if m("w1") == xk("w1", 2))
    return m0, m1, m2


def test_sdf_validates(sdf):
    assert validate_sdf(sdf).ok
    assert check_order_consistency(sdf).ok
    assert check_maximality(sdf).ok
    assert surely_nontrivial(sdf)


def test_random_move_order(sdf):
    m0, m1, m2 = moves_of(sdf)
    assert order_ge(m0, m1) and order_ge(m0, m2)
    assert not order_ge(m1, m2) and not order_ge(m2, m1)


def test_induced_tree(sdf):
    rep = InducedTree(sdf).report()
    assert rep.is_decision_tree_order
    assert rep.evaluation_injective and rep.evaluation_surjective
    assert rep.order_embedding


def test_eis_recall(sdf):
    m0, m1, m2 = moves_of(sdf)
    pw = PartitionAlgebra.powerset(SCEN)
    triv = PartitionAlgebra.trivial(SCEN)
    # Revelation at the later moves only: recall holds.
    ok, _ = eis_admits_recall(sdf, {m0: triv, m1: pw, m2: triv})
    assert ok
    # Revelation at the root, forgotten at the later move: recall fails.
    ok, witness = eis_admits_recall(sdf, {m0: pw, m1: triv, m2: triv})
    assert not ok and witness is not None


def test_choice_predicates(sdf):
    m0, m1, m2 = moves_of(sdf)
    Xi = sdf.random_moves
    info = choice_predicates(sdf, cdot(1), Xi)
    assert info["non_redundant"] and info["complete"]
    assert set(info["available_at"]) == {m0}
    # The full outcome set has no predecessors: not non-redundant.
    info2 = choice_predicates(sdf, frozenset(W), Xi)
    assert not info2["non_redundant"]


def test_is_choice(sdf):
    assert is_choice(sdf.forest, cdot(1))
    assert not is_choice(sdf.forest, frozenset())
    # A set missing one outcome of a terminal-free node is not a node union.
    broken = cdot(1) - {("w1", 1, 1)} | {("w1", 1, 1)}
    assert is_choice(sdf.forest, broken)


def test_adaptedness_under_revealing_second_period(sdf):
    # Information: scenario revealed at the first-period move x1 only.
    m0, m1, m2 = moves_of(sdf)
    eis = {
        m0: PartitionAlgebra.trivial(SCEN),
        m1: PartitionAlgebra.powerset(SCEN),
        m2: PartitionAlgebra.trivial(SCEN),
    }
    refs = {
        m0: (cdot(1), cdot(2)),
        m1: (cdotg({"w1": 1, "w2": 1}), cdotg({"w1": 2, "w2": 2})),
        m2: (cdotg({"w1": 1, "w2": 1}), cdotg({"w1": 2, "w2": 2})),
    }
    Xi = sdf.random_moves
    maps = [dict(zip(SCEN, v)) for v in [(1, 1), (1, 2), (2, 1), (2, 2)]]
    # After the revealing move, any scenario-dependent continuation adapts.
    for g in maps:
        assert is_adapted_choice(sdf, ckg(1, g), eis, refs, reference_moves=Xi)
    # After the uninformed move, only constant continuations adapt.
    assert is_adapted_choice(
        sdf, ckg(2, {"w1": 1, "w2": 1}), eis, refs, reference_moves=Xi
    )
    assert not is_adapted_choice(
        sdf, ckg(2, {"w1": 1, "w2": 2}), eis, refs, reference_moves=Xi
    )


def test_adaptedness_trivial_information(sdf):
    m0, m1, m2 = moves_of(sdf)
    eis = {m: PartitionAlgebra.trivial(SCEN) for m in (m0, m1, m2)}
    refs = {
        m0: (cdot(1), cdot(2)),
        m1: (cdotg({"w1": 1, "w2": 1}), cdotg({"w1": 2, "w2": 2})),
        m2: (cdotg({"w1": 1, "w2": 1}), cdotg({"w1": 2, "w2": 2})),
    }
    Xi = sdf.random_moves
    # Reference choices themselves are adapted.
    assert is_adapted_choice(sdf, cdot(1), eis, refs, reference_moves=Xi)
    # A scenario-dependent second-period plan is not.
    assert not is_adapted_choice(
        sdf, cdotg({"w1": 1, "w2": 2}), eis, refs, reference_moves=Xi
    )
