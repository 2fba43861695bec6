"""Stochastic extensive forms: SDF + agents + information + choices.

An instance bundles a stochastic decision forest with a finite agent set,
per-agent exogenous information (partition algebras indexed by random
moves), per-agent reference choice structures, and per-agent choice sets.
This module derives availability, validates the structural axioms (in
"pseudo" or "full" mode), computes endogenous information sets and the
information/recall classification, checks the no-repetition property of
decision paths, completes choice sets, truncates to single scenarios, and
splits agents into one agent per information set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from ._base import (
    InputInvalid,
    ValidationReport,
    atom_key,
    charge_budget,
    set_key,
    sorted_atoms,
    sorted_nodes,
    sorted_sets,
)
from .order_core import Forest, immediate_predecessors
from .sdf_core import (
    SDF,
    PartitionAlgebra,
    RandomMove,
    choice_predicates,
    eis_admits_recall,
    is_adapted_choice,
    is_choice,
    sorted_random_moves,
    validate_sdf,
)


def _fmt(values):
    return "{" + ", ".join(repr(v) for v in sorted_atoms(values)) + "}"


class SEF:
    """A (pseudo-)stochastic extensive form instance."""

    def __init__(self, sdf: SDF, agents, eis: dict, ref_choices: dict, choices: dict):
        """
        agents: iterable of hashable agent ids.
        eis: {agent: {RandomMove: PartitionAlgebra on its domain}}.
        ref_choices: {agent: {RandomMove: iterable of outcome sets}}.
        choices: {agent: iterable of outcome sets} (the agent's choice set).
        """
        self.sdf = sdf
        self.forest: Forest = sdf.forest
        self.agents = tuple(sorted_atoms(agents))
        self.eis = {
            i: dict(eis.get(i, {})) for i in self.agents
        }
        self.ref_choices = {
            i: {m: tuple(sorted_sets([frozenset(c) for c in cs]))
                for m, cs in ref_choices.get(i, {}).items()}
            for i in self.agents
        }
        self.choices = {
            i: tuple(sorted_sets({frozenset(c) for c in choices.get(i, ())}))
            for i in self.agents
        }
        self._pred_cache = {}
        self._avail_cache = {}
        self._info_cache = {}

    # -- derived availability ------------------------------------------------

    def predecessors(self, c) -> frozenset:
        key = c if isinstance(c, frozenset) else frozenset(c)
        if key not in self._pred_cache:
            self._pred_cache[key] = immediate_predecessors(self.forest, key)
        return self._pred_cache[key]

    def available_at_node(self, agent, x) -> tuple:
        x = frozenset(x)
        return tuple(c for c in self.choices[agent] if x in self.predecessors(c))

    def available_at_random_move(self, agent, m: RandomMove) -> tuple:
        key = (agent, m)
        if key not in self._avail_cache:
            self._avail_cache[key] = tuple(
                c for c in self.choices[agent]
                if any(x in self.predecessors(c) for _, x in m.items)
            )
        return self._avail_cache[key]

    def active_agents_node(self, x) -> tuple:
        return tuple(i for i in self.agents if self.available_at_node(i, x))

    def active_agents_random_move(self, m: RandomMove) -> tuple:
        return tuple(i for i in self.agents if self.available_at_random_move(i, m))

    @cached_property
    def agent_nodes(self) -> dict:
        """X^i: moves at which the agent has an available choice."""
        return {
            i: tuple(x for x in self.forest.moves if self.available_at_node(i, x))
            for i in self.agents
        }

    @cached_property
    def agent_random_moves(self) -> dict:
        """The agent's random moves (those with nonempty availability)."""
        return {
            i: tuple(
                m for m in self.sdf.random_moves
                if self.available_at_random_move(i, m)
            )
            for i in self.agents
        }

    def tree_outcomes(self, scenario) -> frozenset:
        return self.sdf.tree_outcomes(scenario)


def available_choices(sef: SEF, agent, at):
    """Available choices at a node, a random move, or an info set."""
    if isinstance(at, RandomMove):
        return sef.available_at_random_move(agent, at)
    if isinstance(at, InfoSet):
        return at.available
    return sef.available_at_node(agent, frozenset(at))


def active_agents(sef: SEF, at):
    if isinstance(at, RandomMove):
        return sef.active_agents_random_move(at)
    return sef.active_agents_node(frozenset(at))


# ---------------------------------------------------------------------------
# Endogenous information sets


@dataclass(frozen=True)
class InfoSet:
    """A maximal set of an agent's random moves with equal availability."""

    agent: object
    members: tuple  # RandomMove, canonically sorted
    available: tuple  # choices, canonically sorted
    domain: frozenset
    algebra: PartitionAlgebra
    ref: tuple

    @cached_property
    def key(self):
        return (atom_key(self.agent), self.members[0].key)

    def image_union(self) -> frozenset:
        return frozenset(
            itertools.chain.from_iterable(m.image_union for m in self.members)
        )

    def __repr__(self):
        return f"InfoSet(agent={self.agent!r}, {len(self.members)} moves)"


def info_sets(sef: SEF, agent) -> tuple:
    """The partition of the agent's random moves by equal availability."""
    if agent in sef._info_cache:
        return sef._info_cache[agent]
    groups = {}
    for m in sef.agent_random_moves[agent]:
        av = sef.available_at_random_move(agent, m)
        groups.setdefault(tuple(set_key(c) for c in av), []).append((m, av))
    cells = []
    for _, pairs in groups.items():
        members = sorted_random_moves(m for m, _ in pairs)
        av = pairs[0][1]
        rep = members[0]
        algebra = sef.eis[agent].get(rep)
        if algebra is None:
            algebra = PartitionAlgebra.trivial(rep.domain)
        ref = sef.ref_choices[agent].get(rep, ())
        cells.append(
            InfoSet(
                agent=agent,
                members=tuple(members),
                available=av,
                domain=members[0].domain,
                algebra=algebra,
                ref=ref,
            )
        )
    cells = tuple(sorted(cells, key=lambda c: c.key))
    sef._info_cache[agent] = cells
    return cells


def all_info_sets(sef: SEF) -> tuple:
    out = []
    for i in sef.agents:
        out.extend(info_sets(sef, i))
    return tuple(out)


def availability_partition_report(sef: SEF) -> ValidationReport:
    """The availability partition laws, checked literally.

    (1) predecessor sets of choices partition X^i; (2) node-level and
    random-move-level availability families coincide and partition C^i;
    (3) equal predecessor sets iff co-available; (4) equal availability iff
    co-predecessor; (5) availability induces a partition of the agent's
    random moves; (6) cells correspond bijectively to predecessor sets via
    the union of member images; (7) cells share domain, information and
    reference structure.
    """
    report = ValidationReport()
    for i in sef.agents:
        Ci = sef.choices[i]
        Xi = frozenset(sef.agent_nodes[i])
        psets = {}
        for c in Ci:
            psets.setdefault(frozenset(sef.predecessors(c) & Xi), []).append(c)
        covered = frozenset(itertools.chain.from_iterable(psets))
        if covered != Xi or any(
            a & b
            for a, b in itertools.combinations(psets, 2)
        ):
            report.add("Law1", f"agent {i!r}: predecessor sets do not partition X^i")
        node_families = {
            frozenset(sef.available_at_node(i, x)) for x in Xi
        }
        rm_families = {
            frozenset(sef.available_at_random_move(i, m))
            for m in sef.agent_random_moves[i]
        }
        if node_families != rm_families:
            report.add("Law2", f"agent {i!r}: node/random-move availability differ")
        union_of_families = frozenset(itertools.chain.from_iterable(node_families))
        if union_of_families != frozenset(Ci) or any(
            a & b for a, b in itertools.combinations(node_families, 2)
        ):
            report.add("Law2", f"agent {i!r}: availability does not partition C^i")
        for c1, c2 in itertools.combinations(Ci, 2):
            p1, p2 = sef.predecessors(c1), sef.predecessors(c2)
            if (p1 == p2) != bool(p1 & p2):
                report.add("Law3", f"agent {i!r}: co-availability law fails")
                break
        for x1, x2 in itertools.combinations(Xi, 2):
            a1 = frozenset(sef.available_at_node(i, x1))
            a2 = frozenset(sef.available_at_node(i, x2))
            if (a1 == a2) != bool(a1 & a2):
                report.add("Law4", f"agent {i!r}: co-predecessor law fails")
                break
        cells = info_sets(sef, i)
        members = [m for cell in cells for m in cell.members]
        if sorted_random_moves(members) != list(
            sorted_random_moves(sef.agent_random_moves[i])
        ) or len(members) != len(set(members)):
            report.add("Law5", f"agent {i!r}: cells do not partition the moves")
        images = {
            frozenset(itertools.chain.from_iterable(m.image for m in cell.members))
            for cell in cells
        }
        if images != {frozenset(p) for p in psets if p}:
            report.add("Law6", f"agent {i!r}: cell images != predecessor sets")
        for cell in cells:
            doms = {m.domain for m in cell.members}
            algs = {sef.eis[i].get(m) for m in cell.members if m in sef.eis[i]}
            refs = {
                tuple(set_key(c) for c in sef.ref_choices[i].get(m, ()))
                for m in cell.members
                if m in sef.ref_choices[i]
            }
            if len(doms) > 1 or len(algs) > 1 or len(refs) > 1:
                report.add("Law7", f"agent {i!r}: cell data not shared")
    return report


# ---------------------------------------------------------------------------
# Axiom validation


@dataclass
class AxiomReport:
    mode: str
    results: dict  # name -> (ok, witness message or None)

    @property
    def ok(self) -> bool:
        needed = ["preamble", "axiom1", "axiom2", "axiom4", "axiom5", "axiom6"]
        needed.append("axiom3p" if self.mode == "full" else "axiom3")
        return all(self.results[k][0] for k in needed if k in self.results)

    def failing(self):
        return [k for k, (ok, _) in self.results.items() if not ok]

    def to_dict(self):
        return {
            "mode": self.mode,
            "ok": self.ok,
            "results": {
                k: {"ok": ok, "witness": w} for k, (ok, w) in self.results.items()
            },
        }

    def __str__(self):
        lines = [f"mode={self.mode} ok={self.ok}"]
        for k in sorted(self.results):
            ok, w = self.results[k]
            lines.append(f"  {k}: {'pass' if ok else 'FAIL'}" + (f" ({w})" if w else ""))
        return "\n".join(lines)


def _check_preamble(sef: SEF):
    """Structural requirements before the numbered axioms."""
    rep = validate_sdf(sef.sdf)
    if not rep.ok:
        return False, "; ".join(str(f) for f in rep.findings)
    for i in sef.agents:
        Xi_rm = sef.agent_random_moves[i]
        # Evaluation on the agent's random moves must be injective.
        seen = {}
        for m in Xi_rm:
            for s, x in m.items:
                if x in seen and seen[x] is not m:
                    return False, f"agent {i!r}: evaluation not injective"
                seen[x] = m
        for m in Xi_rm:
            alg = sef.eis[i].get(m)
            if alg is None or alg.carrier != m.domain:
                return False, f"agent {i!r}: missing/mismatched information algebra"
            refs = sef.ref_choices[i].get(m)
            if refs is None:
                return False, f"agent {i!r}: missing reference choices"
            for c in refs:
                if not is_choice(sef.forest, c):
                    return False, f"agent {i!r}: reference set contains a non-choice"
                info = choice_predicates(sef.sdf, c, Xi_rm)
                if not info["non_redundant"] or not info["complete"]:
                    return False, f"agent {i!r}: reference choice not usable"
                if m not in info["available_at"]:
                    return False, f"agent {i!r}: reference choice not available"
        for c in sef.choices[i]:
            if not is_choice(sef.forest, c):
                return False, f"agent {i!r}: {_fmt(c)} is not a choice"
            if not is_adapted_choice(
                sef.sdf, c, sef.eis[i], sef.ref_choices[i],
                reference_moves=Xi_rm, strict=False,
            ):
                return False, f"agent {i!r}: choice {_fmt(c)} is not adapted"
    return True, None


def _check_axiom1(sef: SEF):
    for i in sef.agents:
        for c1, c2 in itertools.combinations(sef.choices[i], 2):
            p1, p2 = sef.predecessors(c1), sef.predecessors(c2)
            if p1 & p2:
                if p1 != p2:
                    return False, f"agent {i!r}: overlapping but unequal predecessor sets"
                # Alternatives at a common predecessor class must be equal or
                # disjoint scenario by scenario.
                for s in sorted_atoms(sef.sdf.scenarios):
                    w_s = sef.tree_outcomes(s)
                    t1, t2 = c1 & w_s, c2 & w_s
                    if t1 != t2 and (t1 & t2):
                        return False, f"agent {i!r}: traces at {s!r} overlap without equality"
    return True, None


def _check_axiom2(sef: SEF):
    for x in sef.forest.moves:
        active = [i for i in sef.agents if sef.available_at_node(i, x)]
        pools = [sef.available_at_node(i, x) for i in active]
        for combo in itertools.product(*pools):
            inter = frozenset(x)
            for c in combo:
                inter &= c
            if not inter:
                return False, f"empty joint choice at a move of size {len(x)}"
    return True, None


def _separating_pairs(sef: SEF):
    """Disjoint node pairs within one tree, canonically ordered."""
    for s in sorted_atoms(sef.sdf.scenarios):
        tree = sorted_nodes(sef.sdf.trees[s])
        for y1, y2 in itertools.combinations(tree, 2):
            if not (y1 & y2):
                yield s, y1, y2


def _check_axiom3(sef: SEF):
    for s, y1, y2 in _separating_pairs(sef):
        w_s = sef.tree_outcomes(s)
        found = False
        for i in sef.agents:
            for c1 in sef.choices[i]:
                if not y1 <= c1:
                    continue
                for c2 in sef.choices[i]:
                    if y2 <= c2 and not (c1 & c2 & w_s):
                        found = True
                        break
                if found:
                    break
            if found:
                break
        if not found:
            return False, f"scenario {s!r}: no agent separates two disjoint nodes"
    return True, None


def _check_axiom3p(sef: SEF):
    for s, y1, y2 in _separating_pairs(sef):
        w_s = sef.tree_outcomes(s)
        tree = sef.sdf.trees[s]
        found = False
        for i in sef.agents:
            for c1 in sef.choices[i]:
                p1 = sef.predecessors(c1)
                for c2 in sef.choices[i]:
                    if c1 & c2 & w_s:
                        continue
                    p_both = p1 & sef.predecessors(c2) & tree
                    for x in p_both:
                        if y1 <= (x & c1) and y2 <= (x & c2):
                            found = True
                            break
                    if found:
                        break
                if found:
                    break
            if found:
                break
        if not found:
            return False, f"scenario {s!r}: no common move separates two disjoint nodes"
    return True, None


def _check_axiom4(sef: SEF):
    for x in sef.forest.moves:
        below = [y for y in sef.forest.nodes if y < x]
        for i in sef.active_agents_node(x):
            av = sef.available_at_node(i, x)
            for y in below:
                if not any(y <= c for c in av):
                    return False, (
                        f"agent {i!r}: no available choice reaches a node below "
                        f"a move of size {len(x)}"
                    )
    return True, None


def _check_axiom5(sef: SEF):
    for i in sef.agents:
        moves = sef.agent_random_moves[i]
        for m1, m2 in itertools.combinations(moves, 2):
            a1 = frozenset(sef.available_at_random_move(i, m1))
            a2 = frozenset(sef.available_at_random_move(i, m2))
            if not (a1 & a2):
                continue
            alg1, alg2 = sef.eis[i].get(m1), sef.eis[i].get(m2)
            if alg1 != alg2:
                return False, f"agent {i!r}: shared availability, different information"
            r1 = tuple(set_key(c) for c in sef.ref_choices[i].get(m1, ()))
            r2 = tuple(set_key(c) for c in sef.ref_choices[i].get(m2, ()))
            if r1 != r2:
                return False, f"agent {i!r}: shared availability, different references"
    return True, None


def _glue_candidates(sef: SEF, agent, mode: str):
    """Candidate choices glued from existing per-scenario traces.

    mode "exact": per-scenario predecessors must equal the class's trace of
    predecessors (closure condition); mode "subset": they may be contained
    in it, and scenarios may be skipped (completion).
    """
    Ci = sef.choices[agent]
    scenarios = sorted_atoms(sef.sdf.scenarios)
    trace_preds = {}
    options_by_scenario = {s: {} for s in scenarios}
    for c in Ci:
        for s in scenarios:
            t = c & sef.tree_outcomes(s)
            if not t:
                continue
            key = set_key(t)
            if key not in trace_preds:
                trace_preds[key] = (t, sef.predecessors(t))
            options_by_scenario[s][key] = trace_preds[key]
    moves = list(sef.agent_random_moves[agent])
    node_at = [dict(m.items) for m in moves]
    refs = [tuple(frozenset(c) for c in sef.ref_choices[agent].get(m, ()))
            for m in moves]
    meas_pred_cache = {}

    def meas_hit(t, pt, node, cref):
        # Whether the move's node at this scenario leads into t ∩ cref.
        key = (set_key(t), set_key(cref))
        if key not in meas_pred_cache:
            inter = t & cref
            meas_pred_cache[key] = (
                sef.predecessors(inter) if inter else frozenset()
            )
        return node in meas_pred_cache[key]

    classes = {}
    for c in Ci:
        classes.setdefault(frozenset(sef.predecessors(c)), None)
    for p0 in sorted(classes, key=set_key):
        support = [
            s for s in scenarios
            if any(sef.sdf.node_scenario(x) == s for x in p0)
        ]
        support_set = frozenset(support)
        per_scenario = []
        for s in support:
            p0_s = frozenset(x for x in p0 if sef.sdf.node_scenario(x) == s)
            opts = []
            for t, pt in options_by_scenario[s].values():
                if mode == "exact":
                    if pt == p0_s:
                        opts.append((t, pt))
                else:
                    if pt and pt <= p0_s:
                        opts.append((t, pt))
            opts.sort(key=lambda tp: set_key(tp[0]))
            if mode == "subset":
                opts = [(None, frozenset())] + opts
            per_scenario.append(opts)
        # Any candidate that could still qualify as an adapted choice must
        # hit a move's section either on its whole domain or not at all,
        # and lead into each reference choice on a measurable set of
        # scenarios.  Both indicators are scenario-local, so a depth-first
        # assignment can reject an option as soon as it disagrees with the
        # value already committed for the same move (availability) or the
        # same information block (measurability).
        constraints = []  # per support scenario: [(mk, avail_forced, blocks)]
        for s in support:
            entry = []
            for mk, m in enumerate(moves):
                if s not in m.domain:
                    continue
                forced = None if m.domain <= support_set else False
                block = sef.eis[agent][m].block_of(s)
                entry.append((mk, forced, block))
            constraints.append(entry)

        def signature(s_idx, t, pt):
            s = support[s_idx]
            sig = []
            for mk, forced, block in constraints[s_idx]:
                node = node_at[mk][s]
                avail = node in pt
                if forced is False and avail:
                    return None
                meas = tuple(
                    meas_hit(t, pt, node, cref) for cref in refs[mk]
                ) if t is not None else tuple(False for _ in refs[mk])
                sig.append((mk, block, avail, meas))
            return sig

        visited = [0]

        def dfs(s_idx, committed, picked):
            if s_idx == len(support):
                if picked:
                    yield frozenset(itertools.chain.from_iterable(picked))
                return
            for t, pt in per_scenario[s_idx]:
                visited[0] += 1
                charge_budget("choices", visited[0])
                sig = signature(s_idx, t, pt)
                if sig is None:
                    continue
                added = []
                ok = True
                for mk, block, avail, meas in sig:
                    pairs = [(("avail", mk), avail)]
                    if committed.get(("avail", mk), avail):
                        # Measurability only binds where the candidate is
                        # available.
                        pairs.append((("meas", mk, block), meas))
                    for key, val in pairs:
                        prev = committed.get(key)
                        if prev is None:
                            committed[key] = val
                            added.append(key)
                        elif prev != val:
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    if t is not None:
                        picked.append(t)
                    yield from dfs(s_idx + 1, committed, picked)
                    if t is not None:
                        picked.pop()
                for key in added:
                    del committed[key]

        yield from dfs(0, {}, [])


def _check_axiom6(sef: SEF):
    for i in sef.agents:
        existing = set(sef.choices[i])
        for cand in _glue_candidates(sef, i, "exact"):
            if cand in existing:
                continue
            if is_adapted_choice(
                sef.sdf, cand, sef.eis[i], sef.ref_choices[i],
                reference_moves=sef.agent_random_moves[i], strict=False,
            ):
                return False, f"agent {i!r}: missing glued choice {_fmt(cand)}"
    return True, None


def validate_axioms(sef: SEF, mode: str = "full") -> AxiomReport:
    """Evaluate all structural axioms; mode selects the separation variant."""
    if mode not in ("pseudo", "full"):
        raise InputInvalid(f"unknown mode {mode!r}")
    results = {}
    results["preamble"] = _check_preamble(sef)
    if results["preamble"][0]:
        results["axiom1"] = _check_axiom1(sef)
        results["axiom2"] = _check_axiom2(sef)
        results["axiom3"] = _check_axiom3(sef)
        if mode == "full":
            results["axiom3p"] = _check_axiom3p(sef)
        results["axiom4"] = _check_axiom4(sef)
        results["axiom5"] = _check_axiom5(sef)
        results["axiom6"] = _check_axiom6(sef)
    return AxiomReport(mode=mode, results=results)


# ---------------------------------------------------------------------------
# Classification and the no-repetition property


def classify_information(sef: SEF) -> dict:
    cells = {i: info_sets(sef, i) for i in sef.agents}
    endog_info = all(
        len(cell.members) == 1 for i in sef.agents for cell in cells[i]
    )
    if endog_info:
        for i, j in itertools.combinations(sef.agents, 2):
            for mi in sef.agent_random_moves[i]:
                for mj in sef.agent_random_moves[j]:
                    if mi.image & mj.image:
                        endog_info = False
    exog_info = all(
        sef.eis[i][m] == PartitionAlgebra.powerset(m.domain)
        for i in sef.agents
        for m in sef.agent_random_moves[i]
    )
    endog_recall = True
    for i in sef.agents:
        for c1, c2 in itertools.combinations(sef.choices[i], 2):
            for s in sef.sdf.scenarios:
                w_s = sef.tree_outcomes(s)
                t1, t2 = c1 & w_s, c2 & w_s
                if (t1 & t2) and not (t1 <= t2 or t2 <= t1):
                    endog_recall = False
    exog_recall = all(
        eis_admits_recall(
            sef.sdf,
            {m: sef.eis[i][m] for m in sef.agent_random_moves[i]},
        )[0]
        for i in sef.agents
    )
    return {
        "perfect_endogenous_information": endog_info,
        "perfect_exogenous_information": exog_info,
        "perfect_endogenous_recall": endog_recall,
        "perfect_exogenous_recall": exog_recall,
        "perfect_information": endog_info and exog_info,
        "perfect_recall": endog_recall and exog_recall,
    }


def heraclitus_check(sef: SEF) -> ValidationReport:
    """No decision path meets two distinct comparable co-available positions."""
    report = ValidationReport()
    for i in sef.agents:
        for c in sef.choices[i]:
            preds = sorted_nodes(sef.predecessors(c))
            for x1, x2 in itertools.combinations(preds, 2):
                if x1 >= x2 or x2 >= x1:
                    report.add(
                        "HeraclitusMoves",
                        f"agent {i!r}: comparable distinct predecessors of a choice",
                    )
        moves = sef.agent_random_moves[i]
        from .sdf_core import order_ge
        for m1, m2 in itertools.combinations(moves, 2):
            a1 = frozenset(sef.available_at_random_move(i, m1))
            a2 = frozenset(sef.available_at_random_move(i, m2))
            if a1 & a2 and (order_ge(m1, m2) or order_ge(m2, m1)):
                report.add(
                    "HeraclitusRandomMoves",
                    f"agent {i!r}: comparable distinct co-available random moves",
                )
    return report


# ---------------------------------------------------------------------------
# Completion (adjoining all glueable adapted choices)


def complete_choices(sef: SEF) -> SEF:
    """Adjoin every adapted choice glued from existing traces.

    The candidate set per agent consists of all choices whose nonempty
    per-scenario traces come from existing choices and whose predecessor set
    is contained in an existing predecessor class; adapted candidates are
    added to the choice set.
    """
    new_choices = {}
    for i in sef.agents:
        pool = set(sef.choices[i])
        for cand in _glue_candidates(sef, i, "subset"):
            if cand in pool:
                continue
            if is_adapted_choice(
                sef.sdf, cand, sef.eis[i], sef.ref_choices[i],
                reference_moves=sef.agent_random_moves[i], strict=False,
            ):
                pool.add(cand)
        new_choices[i] = tuple(sorted_sets(pool))
    return SEF(sef.sdf, sef.agents, sef.eis, sef.ref_choices, new_choices)


# ---------------------------------------------------------------------------
# Truncation to a single scenario


def truncate(sef: SEF, scenario) -> SEF:
    """The classical single-scenario form traced into one tree."""
    if scenario not in sef.sdf.scenarios:
        raise InputInvalid(f"unknown scenario {scenario!r}")
    w_s = sef.tree_outcomes(scenario)
    tree_nodes = sef.sdf.trees[scenario]
    forest = Forest(tree_nodes)
    scenario_of = {w: scenario for w in w_s}
    moves = [
        RandomMove.from_map({scenario: x})
        for x in forest.moves
    ]
    sdf = SDF(forest, scenario_of, moves, scenarios={scenario})
    choices = {}
    for i in sef.agents:
        traced = {c & w_s for c in sef.choices[i]} - {frozenset()}
        choices[i] = tuple(sorted_sets(traced))
    # Reference/information data: trivial algebras; references are the
    # availability sets within the truncation (valid by the partition laws).
    eis = {i: {} for i in sef.agents}
    refs = {i: {} for i in sef.agents}
    for m in moves:
        x = m(scenario)
        for i in sef.agents:
            av = [c for c in choices[i] if x in immediate_predecessors(forest, c)]
            if av:
                eis[i][m] = PartitionAlgebra.trivial({scenario})
                refs[i][m] = tuple(sorted_sets(av))
    return SEF(sdf, sef.agents, eis, refs, choices)


# ---------------------------------------------------------------------------
# Multiple-selves split (structure level)


def selves_split(sef: SEF):
    """One agent per endogenous information set.

    Returns (new_sef, mapping) where mapping sends (agent, info-set index in
    canonical order) to the corresponding original InfoSet.
    """
    agents = []
    eis = {}
    refs = {}
    choices = {}
    mapping = {}
    for i in sef.agents:
        for k, cell in enumerate(info_sets(sef, i)):
            label = (i, k)
            agents.append(label)
            mapping[label] = cell
            eis[label] = {m: cell.algebra for m in cell.members}
            refs[label] = {m: cell.ref for m in cell.members}
            choices[label] = cell.available
    return SEF(sef.sdf, agents, eis, refs, choices), mapping
