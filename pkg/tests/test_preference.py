"""Beliefs, tastes, expected payoffs, rationality and equilibrium search."""

from fractions import Fraction

import pytest

from sefkit import (
    EuStructure,
    PartitionAlgebra,
    RationalProb,
    TasteSystem,
    bayes_belief_builder,
    dynamic_consistency,
    equilibrium_search,
    expected_payoff,
    info_sets,
    is_dynamically_rational,
    is_equilibrium,
    multiple_selves,
    profile_space,
    validate_axioms,
)
from sefkit.action_path import ApData, ApSefData, build_sef
from sefkit.preference import PayoffEngine, taste_consistency, validate_eu


@pytest.fixture(scope="module")
def tiny():
    # One agent, two scenarios, two periods, binary actions each period.
    data = ApData(
        ["i"], {"i": [1, 2]}, [0, 1],
        [(w, ((a,), (b,)))
         for w in ("w1", "w2") for a in (1, 2) for b in (1, 2)],
    )
    cell0 = frozenset({()})
    cell1a = frozenset({((1,),)})
    cell1b = frozenset({((2,),)})
    hist = {"i": {0: (cell0,), 1: (cell1a, cell1b)}}
    eis = {"i": {
        (0, cell0): PartitionAlgebra.trivial(data.d_set(())),
        (1, cell1a): PartitionAlgebra.trivial(data.d_set(((1,),))),
        (1, cell1b): PartitionAlgebra.trivial(data.d_set(((2,),))),
    }}
    sef = build_sef(ApSefData(data, hist, eis)).sef

    def u(w):
        _, f = w
        if f == ((1,), (2,)):
            return Fraction(2)
        return Fraction(1 if f[0] == (1,) else 0)

    tastes = TasteSystem.shared(
        sef, {"i": {w: u(w) for w in sef.forest.outcomes}}
    )
    prior = RationalProb.uniform(["w1", "w2"])
    return sef, tastes, prior


def test_rational_prob_basics():
    p = RationalProb.from_weights({"a": "1/4", "b": "3/4"})
    assert p("a") == Fraction(1, 4)
    assert p.mass({"a", "b"}) == 1
    cond = p.condition({"b"})
    assert cond("b") == 1
    assert p.condition(set()) is None
    with pytest.raises(Exception):
        RationalProb.from_weights({"a": "1/2", "b": "1/4"})


def test_belief_builder_produces_valid_eu(tiny):
    sef, tastes, prior = tiny
    profile = profile_space(sef)[0]
    beliefs = bayes_belief_builder(sef, prior, profile)
    eu = EuStructure(beliefs, tastes)
    assert validate_eu(sef, eu) == []
    assert taste_consistency(tastes)
    assert dynamic_consistency(sef, beliefs, profile, model_prior=prior).ok


def test_on_path_posteriors_follow_the_prior(tiny):
    sef, tastes, prior = tiny
    profile = profile_space(sef)[0]
    beliefs = bayes_belief_builder(sef, prior, profile)
    # The root information set is reached with probability one under any
    # profile, so its posterior is the prior itself.
    root_cell = next(c for c in beliefs.cells if len(c.cell.members) == 1
                     and len(c.cell.domain) == 2
                     and not c.unconstrained
                     and all(x in sef.forest.roots
                             for m in c.cell.members for _, x in m.items))
    assert dict(root_cell.posterior.items) == dict(prior.items)


def test_rationality_and_search(tiny):
    sef, tastes, prior = tiny
    profiles = profile_space(sef)
    assert len(profiles) == 8
    p0 = profiles[0]
    beliefs = bayes_belief_builder(sef, prior, p0)
    eu = EuStructure(beliefs, tastes)
    # The first profile never plays the rewarded continuation.
    assert not is_dynamically_rational(sef, eu, p0)
    assert not is_equilibrium(sef, eu, p0, model_prior=prior)
    results = equilibrium_search(sef, tastes, prior)
    assert len(results) == 2
    engine = PayoffEngine(sef)
    for profile, bel in results:
        eu_star = EuStructure(bel, tastes)
        assert is_equilibrium(sef, eu_star, profile, model_prior=prior)
        # An equilibrium plays first action 1, then the rewarded switch.
        cell0 = next(c for c in info_sets(sef, "i")
                     if all(x in sef.forest.roots
                            for m in c.members for _, x in m.items))
        values = expected_payoff(sef, eu_star, profile, "i", cell0)
        assert set(values.values()) == {Fraction(2)}
        values2 = engine.expected_payoff(eu_star, profile, "i", cell0)
        assert values == values2


def test_multiple_selves(tiny):
    sef, tastes, prior = tiny
    profile = profile_space(sef)[0]
    beliefs = bayes_belief_builder(sef, prior, profile)
    eu = EuStructure(beliefs, tastes)
    new_sef, new_eu, labels = multiple_selves(sef, eu)
    assert len(new_sef.agents) == len(info_sets(sef, "i"))
    assert validate_axioms(new_sef, mode="full").ok
