"""Finite engine for scenario-indexed decision forests and extensive forms."""

from ._base import (
    BudgetExceeded,
    EngineError,
    Finding,
    InputInvalid,
    MultipleCompatibleOutcomes,
    NoCompatibleOutcome,
    NotClosed,
    NotOrderConsistent,
    NotWellPosed,
    PreconditionViolated,
    ValidationReport,
)
from .order_core import (
    Forest,
    closure,
    histories,
    immediate_predecessors,
    infimum,
    maximal_chains,
    order_flags,
    validate_decision_forest,
)
from .sdf_core import (
    SDF,
    InducedTree,
    PartitionAlgebra,
    RandomMove,
    check_maximality,
    check_order_consistency,
    choice_predicates,
    eis_admits_recall,
    is_adapted_choice,
    is_choice,
    surely_nontrivial,
    validate_sdf,
)
from .sef_core import (
    SEF,
    InfoSet,
    all_info_sets,
    availability_partition_report,
    available_choices,
    classify_information,
    complete_choices,
    heraclitus_check,
    info_sets,
    selves_split,
    truncate,
    validate_axioms,
)
from .play import (
    NodeProfile,
    RandomHistory,
    Strategy,
    enumerate_strategies,
    from_node_strategy,
    from_random_move_strategy,
    induced_outcome,
    is_compatible,
    minimum_of_closed,
    profile_key,
    profile_space,
    random_histories,
    random_history_closure,
    restriction_set,
    strategy_from_choices,
    to_node_strategy,
    to_random_move_strategy,
    to_tree_history,
    wellposedness_by_scenarios,
    wellposedness_direct,
)
from .preference import (
    BeliefSystem,
    EuStructure,
    RationalProb,
    TasteSystem,
    bayes_belief_builder,
    dynamic_consistency,
    equilibrium_search,
    expected_payoff,
    is_dynamically_rational,
    is_equilibrium,
    multiple_selves,
    taste_consistency,
)
from .game_io import (
    DanglingReference,
    EngineBundle,
    GameSpecDocument,
    InvalidParam,
    SchemaError,
    UnknownFixture,
    document_from_engine,
    emit_spec,
    fixture,
    main,
    parse_spec,
    to_engine,
)
from .action_path import (
    ApBuild,
    ApData,
    ApSefData,
    build_sdf as build_ap_sdf,
    build_sef as build_ap_sef,
    validate_ap_sdf,
    validate_ap_sef,
)

__version__ = "1.0.0"
