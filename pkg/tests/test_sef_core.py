"""Instance axioms, information sets, classification, completion, truncation."""

import copy
import itertools
import json

import pytest

from sefkit import (
    all_info_sets,
    availability_partition_report,
    available_choices,
    classify_information,
    complete_choices,
    game_io,
    heraclitus_check,
    info_sets,
    truncate,
    validate_axioms,
)


def engine_for(data: dict):
    return game_io.to_engine(game_io.parse_spec(json.dumps(data)))


@pytest.mark.parametrize("row", range(1, 9))
def test_two_stage_rows_validate(simple_bundles, row):
    rep = validate_axioms(simple_bundles[row].sef, mode="full")
    assert rep.ok, rep


@pytest.mark.parametrize("row", range(1, 4))
def test_variant_rows_validate(variant_bundles, row):
    rep = validate_axioms(variant_bundles[row].sef, mode="full")
    assert rep.ok, rep


def test_full_ok_implies_pseudo_ok(simple_bundles):
    for row, bundle in simple_bundles.items():
        full = validate_axioms(bundle.sef, mode="full")
        pseudo = validate_axioms(bundle.sef, mode="pseudo")
        assert full.ok and pseudo.ok


def test_shared_availability_with_unequal_information_fails_axiom5(
    simple_bundles,
):
    # Second-period choices shared across both later moves, but the
    # scenario is revealed at one of them only.
    data = copy.deepcopy(game_io.fixture("simple", {"row": 2}).data)
    data["eis"]["i"]["m1"] = [["w1"], ["w2"]]
    rep = validate_axioms(engine_for(data).sef, mode="full")
    assert not rep.ok
    assert rep.failing() == ["axiom5"]


@pytest.mark.parametrize("row", (2, 3))
@pytest.mark.parametrize("g", list(itertools.product((1, 2), repeat=2)))
def test_scenario_dependent_plan_in_unbalanced_tree_fails_axiom5(row, g):
    # In the variant one scenario ends after the first period; a plan
    # choosing the second coordinate in both trees straddles moves with
    # different domains.
    data = copy.deepcopy(game_io.fixture("simple_variant", {"row": row}).data)
    gm = dict(zip(("w1", "w2"), g))
    outs = [o["id"] for o in data["outcomes"]]
    extra = sorted(
        o for o in outs
        if len(o.split(".")) == 3 and int(o.split(".")[2]) == gm[o.split(".")[0]]
    )
    data["choices"]["i"]["c900"] = extra
    rep = validate_axioms(engine_for(data).sef, mode="full")
    assert not rep.ok
    assert "axiom5" in rep.failing()


def test_info_sets_row1_singletons(simple_bundles):
    cells = info_sets(simple_bundles[1].sef, "i")
    assert len(cells) == 3
    assert all(len(c.members) == 1 for c in cells)


def test_info_sets_row2_pools_second_period(simple_bundles):
    cells = info_sets(simple_bundles[2].sef, "i")
    sizes = sorted(len(c.members) for c in cells)
    assert sizes == [1, 2]
    assert all_info_sets(simple_bundles[2].sef) == cells


def test_available_choices_at_root(simple_bundles):
    sef = simple_bundles[1].sef
    root = next(x for x in sef.forest.roots
                if sef.sdf.node_scenario(x) == "w1")
    avail = available_choices(sef, "i", root)
    assert len(avail) == 2
    assert all(root <= frozenset().union(*[c]) or (c & root) for c in avail)


def test_classification(simple_bundles):
    cls1 = classify_information(simple_bundles[1].sef)
    assert cls1["perfect_endogenous_information"]
    assert not cls1["perfect_exogenous_information"]
    cls7 = classify_information(simple_bundles[7].sef)
    assert cls7["perfect_information"] and cls7["perfect_recall"]


def test_classification_absent_minded():
    bundle = game_io.to_engine(game_io.fixture("absent_minded", {"n": 2}))
    cls = classify_information(bundle.sef)
    assert cls["perfect_recall"]
    assert not cls["perfect_information"]


def test_heraclitus_and_partition_laws(simple_bundles, variant_bundles):
    for bundle in list(simple_bundles.values()) + list(variant_bundles.values()):
        assert heraclitus_check(bundle.sef).ok
        assert availability_partition_report(bundle.sef).ok


def test_complete_choices_row1_reaches_row_with_full_family(simple_bundles):
    # Completion under trivial information adds nothing new beyond what is
    # already adapted; the result still validates and contains the input.
    sef = simple_bundles[1].sef
    comp = complete_choices(sef)
    assert validate_axioms(comp, mode="full").ok
    for i in sef.agents:
        assert set(sef.choices[i]) <= set(comp.choices[i])


def test_truncations_validate(simple_bundles):
    sef = simple_bundles[3].sef
    for s in ("w1", "w2"):
        sub = truncate(sef, s)
        assert validate_axioms(sub, mode="full").ok
        assert set(sub.sdf.scenarios) == {s}
