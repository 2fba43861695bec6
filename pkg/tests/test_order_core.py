"""Forest structure: validation, chains, histories, closures, order flags."""

import pytest

from sefkit import (
    Forest,
    closure,
    histories,
    immediate_predecessors,
    infimum,
    maximal_chains,
    order_flags,
    validate_decision_forest,
)
from sefkit.order_core import chain_intersection, is_history


SCEN = ("w1", "w2")
W = [(o, a, b) for o in SCEN for a in (1, 2) for b in (1, 2)]


def x0(o):
    return frozenset(w for w in W if w[0] == o)


def xk(o, k):
    return frozenset(w for w in W if w[0] == o and w[1] == k)


def two_stage_nodes():
    return (
        [x0(o) for o in SCEN]
        + [xk(o, k) for o in SCEN for k in (1, 2)]
        + [frozenset([w]) for w in W]
    )


@pytest.fixture(scope="module")
def forest():
    return Forest(two_stage_nodes())


def test_valid_forest(forest):
    assert validate_decision_forest(two_stage_nodes()).ok


def test_duplicate_and_empty_nodes_rejected():
    rep = validate_decision_forest(two_stage_nodes() + [frozenset()])
    assert not rep.ok


def test_non_forest_family_rejected():
    # Two overlapping, non-nested sets cannot both lie on one chain.
    a = frozenset(W[:3])
    b = frozenset(W[2:5])
    rep = validate_decision_forest([a, b] + [frozenset([w]) for w in W[:5]])
    assert not rep.ok


def test_roots_terminals_moves(forest):
    assert forest.roots == frozenset({x0("w1"), x0("w2")})
    assert forest.terminals == frozenset(frozenset([w]) for w in W)
    assert set(forest.moves) == set(forest.nodes) - forest.terminals


def test_parent_children(forest):
    assert forest.parent(xk("w1", 1)) == x0("w1")
    assert forest.parent(x0("w1")) is None
    assert set(forest.children(x0("w1"))) == {xk("w1", 1), xk("w1", 2)}
    assert forest.successor_toward(x0("w1"), ("w1", 2, 1)) == xk("w1", 2)


def test_maximal_chains_one_per_outcome(forest):
    chains = maximal_chains(forest)
    assert len(chains) == len(W)
    for chain in chains:
        # Root-first and strictly decreasing.
        assert all(a > b for a, b in zip(chain, chain[1:]))
        assert len(chain[0]) == 4 and len(chain[-1]) == 1


def test_immediate_predecessors(forest):
    c = frozenset(w for w in W if w[1] == 1)  # the union of the x1 nodes
    assert immediate_predecessors(forest, c) == frozenset({x0(o) for o in SCEN})
    c2 = frozenset(w for w in W if w[1] == 1 and w[2] == 1)
    assert immediate_predecessors(forest, c2) == frozenset(
        {xk(o, 1) for o in SCEN}
    )


def test_histories_are_principal_up_sets(forest):
    hs = histories(forest)
    assert len(hs) == len(forest.moves)
    for h in hs:
        assert is_history(forest, h)
    # A maximal chain is not a history (it cannot be extended).
    full = forest.chain_of(W[0])
    assert not is_history(forest, full)


def test_closure_adjoins_infimum(forest):
    h = frozenset({x0("w1")})
    assert infimum(forest, h) == x0("w1")
    assert closure(forest, h) == h | {x0("w1")}
    h2 = frozenset({x0("w1"), xk("w1", 1)})
    assert infimum(forest, h2) == xk("w1", 1)
    assert closure(forest, h2) == h2
    assert chain_intersection(h2) == xk("w1", 1)


def test_order_flags_all_true(forest):
    flags = order_flags(forest)
    assert flags.all_true
    assert all(dict(flags.to_dict()).values())
