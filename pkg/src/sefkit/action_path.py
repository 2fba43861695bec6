"""Builder for instances whose outcomes are time-indexed action paths.

Outcomes are pairs (scenario, path) where a path assigns to every time an
action profile (one action per agent factor).  Nodes arise as agreement
classes of paths on strict time prefixes; choices fix an agent's factor
value at one time given a cell of endogenous histories.  This module
validates the data assumptions, generates the forest, random moves,
reference choices, and adapted choice sets, and cross-checks the derived
structural facts (divergence-set identities, the time map, info-set
bijection, recall criteria, adaptedness equivalence, well-posedness).

All prefix agreement is strict: the prefix at time t covers times before t,
never t itself.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

from ._base import (
    EngineError,
    InputInvalid,
    PreconditionViolated,
    ValidationReport,
    atom_key,
    charge_budget,
    set_key,
    sorted_atoms,
)
from .sdf_core import (
    SDF,
    PartitionAlgebra,
    RandomMove,
    check_maximality,
    check_order_consistency,
    choice_predicates,
    is_adapted_choice,
)
from .sef_core import SEF, info_sets, validate_axioms
from .order_core import immediate_predecessors


class InternalInconsistency(EngineError):
    """A fact guaranteed by construction failed to hold (engine bug)."""


class _Top:
    """Sentinel time strictly above every element of the time axis."""

    def __repr__(self):
        return "Top"


TOP = _Top()


# ---------------------------------------------------------------------------
# Data container


class ApData:
    """Finite action-path data: agents, factors, time axis, explicit outcomes."""

    def __init__(self, agents, factors, times, outcomes, scenarios=None,
                 algebra: PartitionAlgebra | None = None):
        self.agents = tuple(sorted_atoms(agents))
        self.factors = {i: tuple(sorted_atoms(factors[i])) for i in self.agents}
        self.times = tuple(times)
        if len(set(self.times)) != len(self.times) or not self.times:
            raise InputInvalid("time axis must be a nonempty list without repeats")
        self.outcomes = frozenset(
            (w, tuple(tuple(p) for p in path)) for w, path in outcomes
        )
        if scenarios is None:
            scenarios = frozenset(w for w, _ in self.outcomes)
        self.scenarios = frozenset(scenarios)
        if algebra is None:
            algebra = PartitionAlgebra.powerset(self.scenarios)
        self.algebra = algebra
        for w, path in self.outcomes:
            if w not in self.scenarios:
                raise InputInvalid(f"unknown scenario {w!r}")
            if len(path) != len(self.times):
                raise InputInvalid("path length must match the time axis")
            for profile in path:
                if len(profile) != len(self.agents):
                    raise InputInvalid("profile arity must match the agents")
                for i, a in zip(self.agents, profile):
                    if a not in self.factors[i]:
                        raise InputInvalid(f"unknown action {a!r} for {i!r}")
        for s in self.scenarios:
            if not any(w == s for w, _ in self.outcomes):
                raise InputInvalid(f"scenario {s!r} admits no path")
        self._x_cache = {}

    # -- basic structure -----------------------------------------------------

    @property
    def horizon(self) -> int:
        return len(self.times)

    def t_index(self, t) -> int:
        return self.times.index(t)

    def proj(self, agent, profile):
        return profile[self.agents.index(agent)]

    @cached_property
    def action_space(self) -> tuple:
        """All action profiles (the product of the factors)."""
        return tuple(itertools.product(*[self.factors[i] for i in self.agents]))

    def all_paths(self):
        """The full path space; guarded by the chains budget."""
        size = len(self.action_space) ** self.horizon
        charge_budget("chains", size * max(len(self.scenarios), 1))
        return itertools.product(self.action_space, repeat=self.horizon)

    def scenario_paths(self, scenario) -> tuple:
        return tuple(sorted_atoms(
            path for w, path in self.outcomes if w == scenario
        ))

    # -- nodes and divergence events ------------------------------------------

    def x_node(self, scenario, prefix) -> frozenset:
        """Agreement class: outcomes of the scenario extending the prefix."""
        key = (atom_key(scenario), prefix)
        got = self._x_cache.get(key)
        if got is None:
            k = len(prefix)
            got = frozenset(
                (w, f) for w, f in self.outcomes
                if w == scenario and f[:k] == tuple(prefix)
            )
            self._x_cache[key] = got
        return got

    def realized_prefixes(self, k) -> tuple:
        """Strict prefixes of length k realized by some outcome."""
        return tuple(sorted_atoms({f[:k] for _, f in self.outcomes}))

    def d_set(self, prefix) -> frozenset:
        """Scenarios where at least two outcomes extend the prefix."""
        return frozenset(
            s for s in self.scenarios if len(self.x_node(s, prefix)) >= 2
        )

    def d_set_agent(self, agent, prefix) -> frozenset:
        """Scenarios with two extensions differing in the agent's factor now."""
        t = len(prefix)
        out = set()
        for s in self.scenarios:
            vals = {
                self.proj(agent, f[t]) for _, f in self.x_node(s, prefix)
            }
            if len(vals) >= 2:
                out.add(s)
        return frozenset(out)

    def d_hat(self, prefix) -> frozenset:
        """Scenarios with two extensions differing in the full profile now."""
        t = len(prefix)
        out = set()
        for s in self.scenarios:
            vals = {f[t] for _, f in self.x_node(s, prefix)}
            if len(vals) >= 2:
                out.add(s)
        return frozenset(out)


@dataclass
class DSets:
    d: frozenset
    d_hat: frozenset
    per_agent: dict


def divergence_sets(data: ApData, t, prefix) -> DSets:
    """The three divergence events at (t, prefix), with their identities."""
    if len(prefix) != data.t_index(t):
        raise InputInvalid("prefix length must match the time index")
    prefix = tuple(tuple(p) for p in prefix)
    d = data.d_set(prefix)
    d_hat = data.d_hat(prefix)
    per_agent = {i: data.d_set_agent(i, prefix) for i in data.agents}
    agent_union = frozenset().union(*per_agent.values()) if per_agent else frozenset()
    if d_hat != agent_union:
        raise InternalInconsistency("strict divergence is not the agent union")
    if not d_hat <= d:
        raise InternalInconsistency("strict divergence exceeds divergence")
    for i, di in per_agent.items():
        if di and di != d:
            raise InternalInconsistency(
                f"agent {i!r} divergence is neither empty nor full"
            )
    return DSets(d, d_hat, per_agent)


def active_random_moves(data: ApData, agent, rm_index: dict | None = None):
    """Random moves at prefixes where the agent's factor diverges."""
    if rm_index is None:
        rm_index = _random_move_index(data)
    out = []
    for (t, prefix), m in rm_index.items():
        if data.d_set_agent(agent, prefix):
            out.append(m)
    return tuple(sorted(out, key=lambda m: m.key))


# ---------------------------------------------------------------------------
# SDF construction and validation


def _random_move_index(data: ApData) -> dict:
    index = {}
    for k, t in enumerate(data.times):
        for prefix in data.realized_prefixes(k):
            d = data.d_set(prefix)
            if d:
                index[(t, prefix)] = RandomMove.from_map(
                    {s: data.x_node(s, prefix) for s in d}
                )
    return index


def _build_raw(data: ApData):
    nodes = set()
    scenario_of = {}
    for w, f in data.outcomes:
        scenario_of[(w, f)] = w
        nodes.add(frozenset([(w, f)]))
        for k in range(data.horizon):
            nodes.add(data.x_node(w, f[:k]))
    rm_index = _random_move_index(data)
    from .order_core import Forest

    forest = Forest(nodes)
    sdf = SDF(forest, scenario_of, rm_index.values(),
              scenarios=data.scenarios, algebra=data.algebra)
    return sdf, rm_index


def _time_map(data: ApData, sdf: SDF) -> dict:
    """Assign to every node its unique time; terminals get the top value."""
    tmap = {}
    for w, f in sorted_atoms(data.outcomes):
        for k, t in enumerate(data.times):
            x = data.x_node(w, f[:k])
            if len(x) >= 2:
                prev = tmap.get(x)
                if prev is not None and prev != t:
                    raise InternalInconsistency(
                        "a move arises at two distinct times"
                    )
                tmap[x] = t
    for x in sdf.forest.nodes:
        if x not in tmap:
            tmap[x] = TOP
    return tmap


def validate_ap_sdf(data: ApData) -> ValidationReport:
    """Check the four data assumptions over all paths and times."""
    report = ValidationReport()
    times = range(data.horizon)
    # Repetition of a node across times forces a terminal singleton.
    for w, f in sorted_atoms(data.outcomes):
        for k, u in itertools.combinations(times, 2):
            if data.x_node(w, f[:k]) == data.x_node(w, f[:u]) and \
                    len(data.x_node(w, f[:k])) != 1:
                report.add(
                    "AP.SDF1",
                    f"node repeats at times {data.times[k]!r}, {data.times[u]!r}",
                )
    # Divergence events must be measurable (automatic for the power set).
    for k in times:
        for prefix in data.realized_prefixes(k):
            if not data.algebra.contains(data.d_set(prefix)):
                report.add("AP.SDF0", f"divergence at {prefix!r} is no event")
    # Prefix extension: whenever all agreement classes along a time set are
    # nonempty, a single outcome realizes the longest agreed prefix.
    for s in sorted_atoms(data.scenarios):
        for f in data.all_paths():
            f = tuple(f)
            live = [k for k in times if data.x_node(s, f[:k])]
            if live and not data.x_node(s, f[:max(live)]):
                report.add("AP.SDF2", f"no witness in scenario {s!r}")
    # Separation: disjoint divergence events must split at a common earlier
    # divergence with different prefixes.
    for k in times:
        prefixes = [
            p for p in data.realized_prefixes(k) if data.d_set(p)
        ]
        for p, q in itertools.combinations(prefixes, 2):
            if data.d_set(p) & data.d_set(q):
                continue
            ok = any(
                data.d_set(p[:u]) & data.d_set(q[:u]) and p[:u] != q[:u]
                for u in range(k + 1)
            )
            if not ok:
                report.add(
                    "AP.SDF3",
                    f"no common divergence separating {p!r} and {q!r}",
                )
    if report.ok:
        sdf, _ = _build_raw(data)
        report.merge(check_order_consistency(sdf))
        report.merge(check_maximality(sdf))
    return report


def build_sdf(data: ApData):
    """Return (SDF, time map, random-move index) for validated data."""
    report = validate_ap_sdf(data)
    if not report.ok:
        raise PreconditionViolated(str(report))
    sdf, rm_index = _build_raw(data)
    tmap = _time_map(data, sdf)
    # The time map decreases strictly along refinement and is constant on
    # random-move images.
    for (t, _), m in rm_index.items():
        for _, x in m.items:
            if tmap[x] != t:
                raise InternalInconsistency("time not constant on an image")
    t_pos = {t: k for k, t in enumerate(data.times)}
    for x in sdf.forest.moves:
        for y in sdf.forest.moves:
            if y < x and t_pos[tmap[x]] >= t_pos[tmap[y]]:
                raise InternalInconsistency("time map is not strictly decreasing")
    return sdf, tmap, rm_index


# ---------------------------------------------------------------------------
# History structures, reference choices, and adapted choices


@dataclass
class ApSefData:
    """Action-path data plus information and history structure.

    hist: {agent: {time: tuple of cells}}, each cell a frozenset of strict
    prefixes (tuples of action profiles).
    eis: {agent: {(time, cell): PartitionAlgebra}} on the common divergence
    event of the cell.
    """

    data: ApData
    hist: dict
    eis: dict

    def cells(self, agent, t) -> tuple:
        return tuple(self.hist.get(agent, {}).get(t, ()))

    def cell_of(self, agent, t, prefix):
        for cell in self.cells(agent, t):
            if tuple(prefix) in cell:
                return cell
        return None

    def algebra_of(self, agent, t, cell) -> PartitionAlgebra:
        return self.eis[agent][(t, frozenset(cell))]


def _cell_domain(ap: ApSefData, cell) -> frozenset:
    """The common divergence event of a history cell."""
    doms = {ap.data.d_set(prefix) for prefix in cell}
    if len(doms) != 1:
        raise InputInvalid("cell members have different divergence events")
    return next(iter(doms))


def _choice_set(data: ApData, t, cell, domain, member_test) -> frozenset:
    """Outcomes extending the cell whose action now passes the test."""
    k = data.t_index(t)
    return frozenset(
        (w, f) for w, f in data.outcomes
        if f[:k] in cell and w in domain and member_test(w, f[k])
    )


def _c_conditions(data: ApData, t, cell, c) -> bool:
    """The three trace conditions every choice at time t must satisfy."""
    k = data.t_index(t)
    if not c:  # nonempty
        return False
    for w, f in c:  # proper trace in every node it meets
        if not (data.x_node(w, f[:k]) - c):
            return False
    for prefix in sorted_atoms(cell):  # all-or-nothing across the domain
        hits = frozenset(
            s for s in data.d_set(prefix)
            if data.x_node(s, prefix) & c
        )
        if hits not in (frozenset(), data.d_set(prefix)):
            return False
    return True


def generate_reference_choices(ap: ApSefData, rm_index: dict) -> dict:
    """Per agent and random move: factor-cylinder choices at its time/cell."""
    data = ap.data
    out = {i: {} for i in data.agents}
    for i in data.agents:
        for t in data.times:
            for cell in ap.cells(i, t):
                domain = _cell_domain(ap, cell)
                actions = data.factors[i]
                for r in range(1, len(actions) + 1):
                    for combo in itertools.combinations(actions, r):
                        g_set = frozenset(combo)
                        c = _choice_set(
                            data, t, cell, domain,
                            lambda w, a: data.proj(i, a) in g_set,
                        )
                        if not _c_conditions(data, t, cell, c):
                            continue
                        for prefix in sorted_atoms(cell):
                            m = rm_index.get((t, prefix))
                            if m is None:
                                continue
                            # available here: every section meets the choice
                            if all(x & c for _, x in m.items):
                                out[i].setdefault(m, []).append(c)
    return {
        i: {m: tuple(sorted(set(cs), key=set_key)) for m, cs in per.items()}
        for i, per in out.items()
    }


def _measurable_maps(algebra: PartitionAlgebra, actions):
    """All block-constant maps from the carrier into the action factor."""
    blocks = algebra.blocks
    charge_budget("choices", max(len(actions), 1) ** max(len(blocks), 1))
    for combo in itertools.product(actions, repeat=len(blocks)):
        yield {s: a for b, a in zip(blocks, combo) for s in b}


def generate_choices(ap: ApSefData) -> dict:
    """Per agent: all adapted single-factor choices, with their witnesses.

    Returns {agent: {choice: (t, cell, g)}} keeping one canonical witness per
    generated outcome set.
    """
    data = ap.data
    out = {i: {} for i in data.agents}
    for i in data.agents:
        for t in data.times:
            for cell in ap.cells(i, t):
                domain = _cell_domain(ap, cell)
                algebra = ap.algebra_of(i, t, cell)
                if algebra.carrier != domain:
                    raise InputInvalid(
                        "information carrier differs from the divergence event"
                    )
                k = data.t_index(t)
                for g in _measurable_maps(algebra, data.factors[i]):
                    c = _choice_set(
                        data, t, cell, domain,
                        lambda w, a: data.proj(i, a) == g[w],
                    )
                    if not _c_conditions(data, t, cell, c):
                        continue
                    # Extension: every (scenario, prefix) pair of the block
                    # must be realized inside the choice.
                    extensible = all(
                        any(
                            f[:k] == prefix and data.proj(i, f[k]) == g[s]
                            for w, f in data.x_node(s, prefix)
                        )
                        for s in sorted_atoms(domain)
                        for prefix in sorted_atoms(cell)
                    )
                    if not extensible:
                        continue
                    out[i].setdefault(c, (t, cell, dict(g)))
    return out


def validate_ap_sef(ap: ApSefData, generator: str = "singletons") -> ValidationReport:
    """Validate the history structure and the five interaction assumptions."""
    data = ap.data
    report = validate_ap_sdf(data)
    if not report.ok:
        return report
    # History structure: per agent and time, a partition of the divergent
    # prefixes, with constant information across each cell.
    for i in data.agents:
        for k, t in enumerate(data.times):
            divergent = frozenset(
                p for p in data.realized_prefixes(k) if data.d_set_agent(i, p)
            )
            cells = ap.cells(i, t)
            union = frozenset(itertools.chain.from_iterable(cells))
            if union != divergent or \
                    sum(len(cl) for cl in cells) != len(union) or \
                    any(not cl for cl in cells):
                report.add(
                    "HistoryStructure",
                    f"cells at {t!r} do not partition {i!r}'s divergent prefixes",
                )
                continue
            for cell in cells:
                doms = {data.d_set(p) for p in cell}
                if len(doms) != 1:
                    report.add(
                        "HistoryStructure",
                        f"cell at {t!r} mixes divergence events",
                    )
                    continue
                algebra = ap.eis.get(i, {}).get((t, frozenset(cell)))
                if algebra is None or algebra.carrier != next(iter(doms)):
                    report.add(
                        "HistoryStructure",
                        f"missing or mis-carried information at {t!r} for {i!r}",
                    )
    if not report.ok:
        return report
    # Simultaneous independence: any combination of factor values realized
    # after a common prefix is itself realized.
    for k, t in enumerate(data.times):
        for prefix in data.realized_prefixes(k):
            for s in sorted_atoms(data.scenarios):
                node = data.x_node(s, prefix)
                if not node:
                    continue
                values = sorted_atoms({f[k] for _, f in node})
                for r in range(1, len(data.agents) + 1):
                    for subset in itertools.combinations(data.agents, r):
                        for picks in itertools.product(values, repeat=r):
                            ok = any(
                                all(
                                    data.proj(j, v) == data.proj(j, pick)
                                    for j, pick in zip(subset, picks)
                                )
                                for v in values
                            )
                            if not ok:
                                report.add(
                                    "AP.SEF0",
                                    f"factor combination missing after {prefix!r}",
                                )
    # Generator cylinders are reference choices.  The generator defaults to
    # the singletons of each factor (they generate its power set and are
    # stable under non-trivial intersections); the full factor never yields
    # a proper trace and therefore cannot be part of the generator.
    rm_index = _random_move_index(data)
    for i in data.agents:
        for t in data.times:
            for cell in ap.cells(i, t):
                domain = _cell_domain(ap, cell)
                gens = [frozenset([a]) for a in data.factors[i]]
                if generator == "with_factor":
                    gens.append(frozenset(data.factors[i]))
                for g_set in gens:
                    c = _choice_set(
                        data, t, cell, domain,
                        lambda w, a: data.proj(i, a) in g_set,
                    )
                    if not _c_conditions(data, t, cell, c):
                        report.add(
                            "AP.SEF1",
                            f"cylinder {sorted_atoms(g_set)} at {t!r} "
                            f"is not a reference choice for {i!r}",
                        )
                        continue
                    for prefix in sorted_atoms(cell):
                        m = rm_index[(t, prefix)]
                        if any(not (x & c) for _, x in m.items):
                            report.add(
                                "AP.SEF1",
                                f"cylinder misses a section at {t!r}",
                            )
    # Own-action extension: the action actually taken extends to an adapted
    # choice prescribing it.
    choices = generate_choices(ap)
    for i in data.agents:
        witnesses = choices[i]
        for w, f in sorted_atoms(data.outcomes):
            for k, t in enumerate(data.times):
                prefix = f[:k]
                if w not in data.d_set_agent(i, prefix):
                    continue
                cell = ap.cell_of(i, t, prefix)
                hit = any(
                    meta[0] == t and meta[1] == cell and
                    meta[2][w] == data.proj(i, f[k])
                    for meta in witnesses.values()
                )
                if not hit:
                    report.add(
                        "AP.SEF2",
                        f"no adapted choice takes {i!r}'s action at {t!r}",
                    )
    # Pairwise separation by some agent's divergence.
    for s in sorted_atoms(data.scenarios):
        paths = data.scenario_paths(s)
        for f, g in itertools.combinations(paths, 2):
            for t0 in range(data.horizon):
                if f[t0] == g[t0]:
                    continue
                ok = any(
                    data.proj(i, f[u]) != data.proj(i, g[u])
                    and s in data.d_set_agent(i, f[:u])
                    and s in data.d_set_agent(i, g[:u])
                    for u in range(t0 + 1)
                    for i in data.agents
                )
                if not ok:
                    report.add(
                        "AP.PSEF3",
                        f"paths in {s!r} differ without an agent separating them",
                    )
    # Difference sets over a finite axis always admit a minimum; evaluated
    # literally all the same.
    for s in sorted_atoms(data.scenarios):
        for f, g in itertools.combinations(data.scenario_paths(s), 2):
            diff = [t for k, t in enumerate(data.times) if f[k] != g[k]]
            if f != g and not diff:
                report.add("AP.SEF3", "distinct paths without a difference time")
    return report


@dataclass
class ApBuild:
    """A built instance together with its construction witnesses."""

    ap: ApSefData
    sef: SEF
    sdf: SDF
    time_map: dict
    rm_index: dict          # (time, prefix) -> RandomMove
    choice_meta: dict       # agent -> {choice: (t, cell, g)}
    axiom_report: object = None


def build_sef(ap: ApSefData, validate: bool = True,
              mode: str = "full") -> ApBuild:
    """Generate the full instance and assert it passes structural validation."""
    report = validate_ap_sef(ap)
    if not report.ok:
        raise PreconditionViolated(str(report))
    data = ap.data
    sdf, tmap, rm_index = build_sdf(data)
    refs = generate_reference_choices(ap, rm_index)
    choice_meta = generate_choices(ap)
    eis_rm = {i: {} for i in data.agents}
    for i in data.agents:
        for t in data.times:
            for cell in ap.cells(i, t):
                algebra = ap.algebra_of(i, t, cell)
                for prefix in cell:
                    m = rm_index.get((t, prefix))
                    if m is not None:
                        eis_rm[i][m] = algebra
    sef = SEF(
        sdf,
        data.agents,
        eis_rm,
        refs,
        {i: tuple(choice_meta[i]) for i in data.agents},
    )
    axiom_report = None
    if validate:
        axiom_report = validate_axioms(sef, mode=mode)
        if not axiom_report.ok:
            raise InternalInconsistency(
                f"built instance fails structural validation: {axiom_report}"
            )
    return ApBuild(ap, sef, sdf, tmap, rm_index, choice_meta, axiom_report)


# ---------------------------------------------------------------------------
# Cross-checks of derived structure


def ap_info_sets(build: ApBuild, agent) -> dict:
    """The bijection (time, cell) -> information set; asserted both ways."""
    ap, sef = build.ap, build.sef
    expected = {}
    for t in ap.data.times:
        for cell in ap.cells(agent, t):
            members = frozenset(
                build.rm_index[(t, prefix)]
                for prefix in cell if (t, prefix) in build.rm_index
            )
            if members:
                expected[(t, cell)] = members
    actual = {frozenset(c.members): c for c in info_sets(sef, agent)}
    if frozenset(expected.values()) != frozenset(actual):
        raise InternalInconsistency(
            f"info-set families disagree for {agent!r}"
        )
    if len(set(map(frozenset, expected.values()))) != len(expected):
        raise InternalInconsistency("the (time, cell) map is not injective")
    return {
        key: actual[frozenset(members)] for key, members in expected.items()
    }


def ap_recall(ap: ApSefData, agent) -> dict:
    """Evaluate the history-structure criteria for recall and information."""
    data = ap.data
    recall = True
    for kt, t in enumerate(data.times):
        for ku, u in enumerate(data.times):
            if not kt < ku:
                continue
            for cell_t in ap.cells(agent, t):
                for cell_u in ap.cells(agent, u):
                    image = frozenset(p[:kt] for p in cell_u)
                    if image & cell_t:
                        contained = image <= cell_t
                        constant = len({
                            data.proj(agent, p[kt]) for p in cell_u
                        }) <= 1
                        if not (contained and constant):
                            recall = False
    perfect_info = True
    for t in data.times:
        for cell in ap.cells(agent, t):
            if len(cell) != 1:
                perfect_info = False
                continue
            for j in data.agents:
                if j == agent:
                    continue
                for other in ap.cells(j, t):
                    if cell & other:
                        perfect_info = False
    return {
        "perfect_endogenous_recall": recall,
        "perfect_endogenous_information": perfect_info,
    }


def adaptedness_equiv(build: ApBuild, agent, c) -> bool:
    """Adaptedness of a generated choice equals blockwise constancy of g.

    Also re-derives the structural facts about the choice: completeness,
    non-redundancy, domain identities, and the predecessor formula.
    """
    ap, sef = build.ap, build.sef
    data = ap.data
    meta = build.choice_meta[agent].get(frozenset(c))
    if meta is None:
        raise InputInvalid("choice was not generated from (time, cell, map) data")
    t, cell, g = meta
    k = data.t_index(t)
    domain = _cell_domain(ap, cell)
    reference_moves = sef.agent_random_moves[agent]
    adapted = is_adapted_choice(
        sef.sdf, c, sef.eis[agent], sef.ref_choices[agent],
        reference_moves=reference_moves,
    )
    info = choice_predicates(sef.sdf, c, reference_moves)
    if not (info["non_redundant"] and info["complete"]):
        raise InternalInconsistency("generated choice fails the basic laws")
    measurable = True
    for m in info["available_at"]:
        if not m.domain <= domain:
            raise InternalInconsistency("availability domain exceeds the data")
        algebra = sef.eis[agent][m]
        for block in algebra.blocks:
            if len({g[s] for s in block}) > 1:
                measurable = False
    if adapted != measurable:
        raise InternalInconsistency("adaptedness differs from measurability")
    expected_preds = frozenset(
        data.x_node(s, prefix)
        for s in sorted_atoms(domain) for prefix in sorted_atoms(cell)
    )
    if immediate_predecessors(sef.forest, frozenset(c)) != expected_preds:
        raise InternalInconsistency("predecessor formula fails")
    return adapted


def wellposed_wellordered(build: ApBuild):
    """Well-posedness of a built instance; must hold over a finite time axis."""
    from .play import wellposedness_by_scenarios

    report = wellposedness_by_scenarios(build.sef)
    if not report.well_posed:
        raise InternalInconsistency("built instance is not well-posed")
    return report
