"""Action-path data: validation, generation, and the derived-structure laws."""

import itertools

import pytest

from sefkit import PartitionAlgebra, validate_axioms
from sefkit.action_path import (
    ApData,
    ApSefData,
    adaptedness_equiv,
    ap_info_sets,
    ap_recall,
    build_sdf,
    build_sef,
    divergence_sets,
    validate_ap_sdf,
    validate_ap_sef,
    wellposed_wellordered,
)
from sefkit.sef_core import availability_partition_report


def two_stage_data():
    return ApData(
        ["i"], {"i": [1, 2]}, [0, 1],
        [(w, ((a,), (b,)))
         for w in ("w1", "w2") for a in (1, 2) for b in (1, 2)],
    )


def two_stage_ap(data):
    cell0 = frozenset({()})
    cell1a = frozenset({((1,),)})
    cell1b = frozenset({((2,),)})
    hist = {"i": {0: (cell0,), 1: (cell1a, cell1b)}}
    eis = {"i": {
        (0, cell0): PartitionAlgebra.trivial(data.d_set(())),
        (1, cell1a): PartitionAlgebra.trivial(data.d_set(((1,),))),
        (1, cell1b): PartitionAlgebra.trivial(data.d_set(((2,),))),
    }}
    return ApSefData(data, hist, eis)


@pytest.fixture(scope="module")
def build():
    data = two_stage_data()
    return build_sef(two_stage_ap(data))


def test_data_validates():
    data = two_stage_data()
    assert validate_ap_sdf(data).ok
    assert validate_ap_sef(two_stage_ap(data)).ok


def test_build_sdf_shape():
    data = two_stage_data()
    sdf, tmap, rm_index = build_sdf(data)
    # 2 roots + 4 first-period nodes + 8 singletons.
    assert len(sdf.forest.nodes) == 14
    assert len(rm_index) == 3
    ds = divergence_sets(data, 0, ())
    assert ds.d == frozenset({"w1", "w2"}) == ds.d_hat
    assert ds.per_agent["i"] == ds.d


def test_build_validates_fully(build):
    assert build.axiom_report is not None and build.axiom_report.ok
    assert validate_axioms(build.sef, mode="full").ok
    assert availability_partition_report(build.sef).ok


def test_info_set_bijection(build):
    iso = ap_info_sets(build, "i")
    assert len(iso) == 3
    for (t, cell), info in iso.items():
        assert len(info.members) == len(cell)


def test_recall_criteria(build):
    rec = ap_recall(build.ap, "i")
    assert rec["perfect_endogenous_recall"]
    assert rec["perfect_endogenous_information"]


def test_adaptedness_equivalence(build):
    for c in build.choice_meta["i"]:
        assert adaptedness_equiv(build, "i", c) in (True, False)


def test_wellposed(build):
    assert wellposed_wellordered(build).well_posed


def test_second_period_choices_are_prefix_sections(build):
    # The generated time-1 choices are exactly the time-independent plans
    # cut down by the first-period cylinder of their cell.
    data = build.ap.data
    outcomes = set(data.outcomes)
    for k in (1, 2):
        generated = {
            c for c, (t, cell, g) in build.choice_meta["i"].items()
            if t == 1 and cell == frozenset({((k,),)})
        }
        expected = set()
        for m in (1, 2):
            plan = frozenset(
                (w, f) for w, f in outcomes if f[1] == (m,)
            )
            cylinder = frozenset(
                (w, f) for w, f in outcomes if f[0] == (k,)
            )
            expected.add(plan & cylinder)
        assert generated == expected


def test_pooled_history_cell_builds():
    # Pooling the two first-period prefixes into one cell is legal when
    # they share the divergence event; the build then has a non-singleton
    # information set.
    data = two_stage_data()
    cell_mixed = frozenset({((1,),), ((2,),)})
    hist = {"i": {0: (frozenset({()}),), 1: (cell_mixed,)}}
    eis = {"i": {
        (0, frozenset({()})): PartitionAlgebra.trivial(data.d_set(())),
        (1, cell_mixed): PartitionAlgebra.trivial(data.d_set(((1,),))),
    }}
    pooled = build_sef(ApSefData(data, hist, eis))
    iso = ap_info_sets(pooled, "i")
    assert sorted(len(info.members) for info in iso.values()) == [1, 2]


def test_mixed_divergence_cell_rejected():
    # A cell mixing prefixes with different divergence events is invalid.
    outcomes = [("w1", ((a,), (b,))) for a in (1, 2) for b in (1, 2)]
    outcomes += [("w2", ((1,), (b,))) for b in (1, 2)]
    outcomes += [("w2", ((2,), (1,)))]
    data = ApData(["i"], {"i": [1, 2]}, [0, 1], outcomes)
    cell_mixed = frozenset({((1,),), ((2,),)})
    hist = {"i": {0: (frozenset({()}),), 1: (cell_mixed,)}}
    eis = {"i": {
        (0, frozenset({()})): PartitionAlgebra.trivial(data.d_set(())),
        (1, cell_mixed): PartitionAlgebra.trivial(data.d_set(((1,),))),
    }}
    with pytest.raises(Exception):
        build_sef(ApSefData(data, hist, eis))


def test_dead_branch_shrinks_divergence():
    # Scenario w2 stops branching after first action 2.
    outcomes = [("w1", ((a,), (b,))) for a in (1, 2) for b in (1, 2)]
    outcomes += [("w2", ((1,), (b,))) for b in (1, 2)]
    outcomes += [("w2", ((2,), (1,)))]
    data = ApData(["i"], {"i": [1, 2]}, [0, 1], outcomes)
    assert validate_ap_sdf(data).ok
    assert data.d_set(((2,),)) == frozenset({"w1"})
    assert data.d_set(((1,),)) == frozenset({"w1", "w2"})
