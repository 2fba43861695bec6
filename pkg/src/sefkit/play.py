"""Strategies, outcome induction and well-posedness.

A strategy assigns to each of an agent's endogenous information sets one of
its available choices.  Restriction sets, induced outcomes, and the two
well-posedness evaluations (direct, and scenario-by-scenario through
truncations) live here, together with random histories.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from ._base import (
    InputInvalid,
    MultipleCompatibleOutcomes,
    NoCompatibleOutcome,
    NotClosed,
    NotOrderConsistent,
    PreconditionViolated,
    atom_key,
    charge_budget,
    set_key,
    sorted_atoms,
    sorted_nodes,
)
from .order_core import (
    chain_intersection,
    closure,
    histories,
)
from .sdf_core import RandomMove, check_order_consistency, order_ge, sorted_random_moves
from .sef_core import SEF, InfoSet, info_sets, truncate


# ---------------------------------------------------------------------------
# Strategies in three equivalent forms


@dataclass(frozen=True)
class Strategy:
    """A map from the agent's info sets to available choices."""

    agent: object
    assignment: tuple  # ((info_set, choice), ...) in canonical info-set order

    def choice_at(self, cell: InfoSet):
        for c, ch in self.assignment:
            if c.key == cell.key:
                return ch
        raise KeyError(cell)

    @cached_property
    def key(self):
        return (atom_key(self.agent), tuple(set_key(ch) for _, ch in self.assignment))


def strategy_from_choices(sef: SEF, agent, picks) -> Strategy:
    cells = info_sets(sef, agent)
    picks = list(picks)
    if len(picks) != len(cells):
        raise InputInvalid("one choice per info set required")
    assignment = []
    for cell, ch in zip(cells, picks):
        ch = frozenset(ch)
        if ch not in cell.available:
            raise InputInvalid("strategy assigns an unavailable choice")
        assignment.append((cell, ch))
    return Strategy(agent, tuple(assignment))


def enumerate_strategies(sef: SEF, agent) -> list:
    cells = info_sets(sef, agent)
    count = 1
    for cell in cells:
        count *= max(len(cell.available), 1)
    charge_budget("strategies", count)
    out = []
    for combo in itertools.product(*[cell.available for cell in cells]):
        out.append(Strategy(agent, tuple(zip(cells, combo))))
    return out


def profile_space(sef: SEF) -> list:
    """All strategy profiles as {agent: Strategy} dicts, canonical order."""
    per_agent = [enumerate_strategies(sef, i) for i in sef.agents]
    count = 1
    for s in per_agent:
        count *= max(len(s), 1)
    charge_budget("strategies", count)
    out = []
    for combo in itertools.product(*per_agent):
        out.append(dict(zip(sef.agents, combo)))
    return out


def profile_key(profile: dict):
    return tuple(profile[i].key for i in sorted(profile, key=atom_key))


# -- conversions (info-set form <-> random-move form <-> node form) ----------


def to_random_move_strategy(sef: SEF, strategy: Strategy) -> dict:
    out = {}
    for cell, ch in strategy.assignment:
        for m in cell.members:
            out[m] = ch
    return out


def to_node_strategy(sef: SEF, strategy: Strategy) -> dict:
    out = {}
    for cell, ch in strategy.assignment:
        for m in cell.members:
            for _, x in m.items:
                out[x] = ch
    return out


def from_node_strategy(sef: SEF, agent, node_map: dict) -> Strategy:
    """Rebuild the info-set form; the map must be constant on cells."""
    cells = info_sets(sef, agent)
    assignment = []
    for cell in cells:
        values = {
            frozenset(node_map[x]) for m in cell.members for _, x in m.items
        }
        if len(values) != 1:
            raise InputInvalid("node strategy is not constant on an info set")
        ch = next(iter(values))
        if ch not in cell.available:
            raise InputInvalid("node strategy assigns an unavailable choice")
        assignment.append((cell, ch))
    return Strategy(agent, tuple(assignment))


def from_random_move_strategy(sef: SEF, agent, rm_map: dict) -> Strategy:
    cells = info_sets(sef, agent)
    assignment = []
    for cell in cells:
        values = {frozenset(rm_map[m]) for m in cell.members}
        if len(values) != 1:
            raise InputInvalid("random-move strategy is not constant on an info set")
        ch = next(iter(values))
        if ch not in cell.available:
            raise InputInvalid("assigned choice is unavailable")
        assignment.append((cell, ch))
    return Strategy(agent, tuple(assignment))


class NodeProfile:
    """Profile flattened to (agent, node) -> choice for fast induction."""

    def __init__(self, sef: SEF, profile: dict):
        self.sef = sef
        self.by_node = {}
        for i, strat in profile.items():
            for x, ch in to_node_strategy(sef, strat).items():
                self.by_node[(i, x)] = ch

    def choice(self, agent, node):
        return self.by_node.get((agent, frozenset(node)))


# ---------------------------------------------------------------------------
# Restriction sets and induced outcomes


def restriction_set(sef: SEF, w, profile, h) -> frozenset:
    """Outcomes left undiscarded at w by the profile along the history h.

    Intersects the chosen choices over all moves x with w ∈ x ⊆ ⋂h and all
    agents active there; the empty constraint family yields all outcomes.
    """
    node_profile = profile if isinstance(profile, NodeProfile) else NodeProfile(sef, profile)
    cap = chain_intersection(h)
    result = None
    for x in sef.forest.moves:
        if w in x and x <= cap:
            for i in sef.agents:
                ch = node_profile.choice(i, x)
                if ch is None:
                    continue
                result = ch if result is None else (result & ch)
    if result is None:
        return frozenset(sef.forest.outcomes)
    return result


def is_compatible(sef: SEF, w, profile, h) -> bool:
    return w in restriction_set(sef, w, profile, h)


def induced_outcome(sef: SEF, profile, h):
    """The unique outcome compatible with the profile along h."""
    node_profile = profile if isinstance(profile, NodeProfile) else NodeProfile(sef, profile)
    cap = chain_intersection(h)
    hits = [w for w in sorted_atoms(cap) if is_compatible(sef, w, node_profile, h)]
    if not hits:
        raise NoCompatibleOutcome("no outcome compatible with the profile")
    if len(hits) > 1:
        raise MultipleCompatibleOutcomes(f"{len(hits)} compatible outcomes")
    return hits[0]


# ---------------------------------------------------------------------------
# Well-posedness


@dataclass
class WellPosednessReport:
    attainability: bool  # every undiscarded outcome attainable by some profile
    existence: bool      # every (profile, history) admits a compatible outcome
    uniqueness: bool     # ... at most one, with restriction set {w}
    witnesses: dict
    flags: object = None

    @property
    def well_posed(self) -> bool:
        return self.attainability and self.existence and self.uniqueness

    def to_dict(self):
        return {
            "attainability": self.attainability,
            "existence": self.existence,
            "uniqueness": self.uniqueness,
            "well_posed": self.well_posed,
            "witnesses": {k: str(v) for k, v in self.witnesses.items()},
            "flags": self.flags.to_dict() if self.flags is not None else None,
        }


def _attaining_profile(sef: SEF, h, w, base_profile: dict):
    """Construct a profile compatible with (w, h) by the extension recipe.

    At each info set containing a constraining move x (w ∈ x ⊆ ⋂h), pick an
    available choice containing the successor of x toward w; keep the base
    profile elsewhere.
    """
    cap = chain_intersection(h)
    constraining = [x for x in sef.forest.moves if w in x and x <= cap]
    new_profile = {}
    for i in sef.agents:
        assignment = []
        for cell, ch in base_profile[i].assignment:
            hits = [
                x for m in cell.members for _, x in m.items if x in constraining
            ]
            pick = ch
            if hits:
                x = hits[0]
                y = sef.forest.successor_toward(x, w)
                for cand in cell.available:
                    if x in sef.predecessors(cand) and y is not None and y <= cand:
                        pick = cand
                        break
                else:
                    return None
            assignment.append((cell, pick))
        new_profile[i] = Strategy(i, tuple(assignment))
    return new_profile


def wellposedness_direct(sef: SEF, closed_only: bool = False,
                         profiles=None) -> WellPosednessReport:
    """Exhaustive evaluation of the three outcome-induction conditions."""
    hs = histories(sef.forest)
    if closed_only:
        hs = [h for h in hs if closure(sef.forest, h) == h]
    if profiles is None:
        profiles = profile_space(sef)
    charge_budget("pairs", len(hs) * max(len(profiles), 1))
    witnesses = {}
    existence = True
    uniqueness = True
    node_profiles = [(p, NodeProfile(sef, p)) for p in profiles]
    for h in hs:
        cap = chain_intersection(h)
        # A chain lives inside a single scenario tree; restriction sets are
        # only meaningful within that tree's outcome set.
        fiber = next(
            sef.tree_outcomes(s)
            for s in sorted_atoms(sef.sdf.scenarios)
            if cap <= sef.tree_outcomes(s)
        )
        for p, np_ in node_profiles:
            hits = [w for w in cap if w in restriction_set(sef, w, np_, h)]
            if not hits:
                existence = False
                witnesses.setdefault("existence", (h, profile_key(p)))
            elif len(hits) > 1:
                uniqueness = False
                witnesses.setdefault("uniqueness", (h, profile_key(p)))
            else:
                w = hits[0]
                if restriction_set(sef, w, np_, h) & fiber != frozenset({w}):
                    uniqueness = False
                    witnesses.setdefault("uniqueness_set", (h, w))
    attainability = True
    base = profiles[0] if profiles else None
    for h in hs:
        cap = chain_intersection(h)
        for w in sorted_atoms(cap):
            candidate = None
            if base is not None:
                candidate = _attaining_profile(sef, h, w, base)
            if candidate is not None and is_compatible(sef, w, candidate, h):
                continue
            # Fall back to a full scan (pseudo instances may need it).
            if any(is_compatible(sef, w, np_, h) for _, np_ in node_profiles):
                continue
            attainability = False
            witnesses.setdefault("attainability", (h, w))
    return WellPosednessReport(attainability, existence, uniqueness, witnesses)


def wellposedness_by_scenarios(sef: SEF) -> WellPosednessReport:
    """Conjoin the direct evaluation over all single-scenario truncations."""
    from .order_core import order_flags

    attainability = existence = uniqueness = True
    witnesses = {}
    for s in sorted_atoms(sef.sdf.scenarios):
        sub = truncate(sef, s)
        rep = wellposedness_direct(sub)
        attainability &= rep.attainability
        existence &= rep.existence
        uniqueness &= rep.uniqueness
        for k, v in rep.witnesses.items():
            witnesses.setdefault(f"{s!r}:{k}", v)
    flags = order_flags(sef.forest)
    return WellPosednessReport(attainability, existence, uniqueness, witnesses, flags)


# ---------------------------------------------------------------------------
# Random histories


@dataclass(frozen=True)
class RandomHistory:
    """A scenario-indexed family of per-tree histories with saturation."""

    items: tuple  # ((scenario, frozenset-of-nodes chain), ...) sorted

    @classmethod
    def from_map(cls, mapping) -> "RandomHistory":
        items = tuple(
            sorted(
                (
                    (s, frozenset(frozenset(x) for x in hs))
                    for s, hs in dict(mapping).items()
                ),
                key=lambda it: atom_key(it[0]),
            )
        )
        if not items:
            raise InputInvalid("a random history needs a nonempty domain")
        return cls(items)

    @cached_property
    def domain(self) -> frozenset:
        return frozenset(s for s, _ in self.items)

    def __call__(self, scenario) -> frozenset:
        for s, hs in self.items:
            if s == scenario:
                return hs
        raise KeyError(scenario)

    @property
    def key(self):
        return tuple(
            (atom_key(s), tuple(sorted(set_key(x) for x in hs)))
            for s, hs in self.items
        )


def _tree_histories(sef: SEF, scenario) -> list:
    """Histories of one scenario's tree (principal up-sets of its moves)."""
    tree = sef.sdf.trees[scenario]
    moves = [x for x in sorted_nodes(tree) if any(y < x for y in tree)]
    return [frozenset(y for y in tree if y >= x) for x in moves]


def _saturated(sef: SEF, mapping: dict) -> bool:
    dom = frozenset(mapping)
    for m in sef.sdf.random_moves:
        touched = any(
            s in m.domain and m(s) in mapping[s] for s in dom
        )
        if touched:
            if not m.domain >= dom:
                return False
            if not all(m(s) in mapping[s] for s in dom):
                return False
    return True


def random_histories(sef: SEF) -> list:
    """Enumerate every random history of the instance."""
    rep = check_order_consistency(sef.sdf)
    if not rep.ok:
        raise NotOrderConsistent(str(rep))
    scenarios = sorted_atoms(sef.sdf.scenarios)
    per_scenario = {s: _tree_histories(sef, s) for s in scenarios}
    out = []
    count = 0
    for r in range(1, len(scenarios) + 1):
        for dom in itertools.combinations(scenarios, r):
            pools = [per_scenario[s] for s in dom]
            size = 1
            for p in pools:
                size *= max(len(p), 1)
            count += size
            charge_budget("histories", count)
            for combo in itertools.product(*pools):
                mapping = dict(zip(dom, combo))
                if _saturated(sef, mapping):
                    out.append(RandomHistory.from_map(mapping))
    return sorted(out, key=lambda rh: rh.key)


def to_tree_history(sef: SEF, rh: RandomHistory) -> frozenset:
    """Image of a random history in the induced tree of random moves."""
    return frozenset(
        m for m in sef.sdf.random_moves
        if any(s in rh.domain and m(s) in rh(s) for s in m.domain)
    )


def random_history_closure(sef: SEF, rh: RandomHistory) -> RandomHistory:
    return RandomHistory.from_map(
        {s: closure(sef.forest, rh(s)) for s in rh.domain}
    )


def minimum_of_closed(sef: SEF, rh: RandomHistory) -> RandomMove:
    """The random move whose principal up-sets realize the closed history."""
    for m in sorted_random_moves(sef.sdf.random_moves):
        if not m.domain >= rh.domain:
            continue
        if all(
            rh(s) == frozenset(y for y in sef.sdf.trees[s] if y >= m(s))
            for s in rh.domain
        ):
            return m
    raise NotClosed("no random move realizes the history as principal up-sets")
