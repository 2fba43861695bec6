"""Strategies, induced outcomes, random histories, well-posedness."""

import pytest

from sefkit import (
    RandomHistory,
    enumerate_strategies,
    from_node_strategy,
    game_io,
    induced_outcome,
    minimum_of_closed,
    profile_space,
    random_histories,
    restriction_set,
    strategy_from_choices,
    to_tree_history,
    wellposedness_by_scenarios,
    wellposedness_direct,
)
from sefkit.order_core import closure
from sefkit.play import (
    NodeProfile,
    is_compatible,
    profile_key,
    random_history_closure,
    to_node_strategy,
    to_random_move_strategy,
    from_random_move_strategy,
)


@pytest.fixture(scope="module")
def row1(simple_bundles):
    return simple_bundles[1]


def test_strategy_enumeration_counts(row1):
    # Three information sets with 2, 2, 2 available choices.
    strats = enumerate_strategies(row1.sef, "i")
    assert len(strats) == 8
    assert len(profile_space(row1.sef)) == 8
    assert len({s.key for s in strats}) == 8


def test_strategy_from_choices_validates(row1):
    sef = row1.sef
    s = enumerate_strategies(sef, "i")[0]
    picks = [ch for _, ch in s.assignment]
    assert strategy_from_choices(sef, "i", picks).key == s.key
    with pytest.raises(Exception):
        strategy_from_choices(sef, "i", picks[:1])


def test_strategy_form_round_trips(row1):
    sef = row1.sef
    for s in enumerate_strategies(sef, "i"):
        assert from_node_strategy(sef, "i", to_node_strategy(sef, s)).key == s.key
        rm = to_random_move_strategy(sef, s)
        assert from_random_move_strategy(sef, "i", rm).key == s.key


def test_induced_outcome(row1):
    sef = row1.sef
    profile = profile_space(sef)[0]
    root = next(x for x in sef.forest.roots
                if sef.sdf.node_scenario(x) == "w1")
    h = sef.forest.up_set(root)
    w = induced_outcome(sef, profile, h)
    assert row1.outcome_label[w] == "w1.1.1"
    assert is_compatible(sef, w, profile, h)


def test_restriction_set_closure_invariance(row1):
    sef = row1.sef
    profile = NodeProfile(sef, profile_space(sef)[3])
    for x in sef.forest.moves:
        h = sef.forest.up_set(x)
        hc = closure(sef.forest, h)
        for w in sorted(x, key=str):
            assert restriction_set(sef, w, profile, h) == \
                restriction_set(sef, w, profile, hc)


def test_wellposedness_methods_agree(row1):
    d = wellposedness_direct(row1.sef)
    s = wellposedness_by_scenarios(row1.sef)
    assert d.well_posed and s.well_posed
    assert (d.attainability, d.existence, d.uniqueness) == \
        (s.attainability, s.existence, s.uniqueness)


def test_random_histories(row1):
    sef = row1.sef
    rhs = random_histories(sef)
    assert len(rhs) == 9
    m0 = next(m for m in sef.sdf.random_moves
              if all(x in sef.forest.roots for _, x in m.items))
    h0 = RandomHistory.from_map({s: frozenset([m0(s)]) for s in m0.domain})
    tree = to_tree_history(sef, h0)
    assert minimum_of_closed(sef, random_history_closure(sef, h0)).key == m0.key
    assert all(isinstance(x, frozenset) or x for x in tree)


def test_profile_key_stable(row1):
    sef = row1.sef
    profiles = profile_space(sef)
    keys = [profile_key(p) for p in profiles]
    assert len(set(keys)) == len(keys)
    assert keys == [profile_key(p) for p in profile_space(sef)]
