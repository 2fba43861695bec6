"""Expected-utility preferences over induced outcomes.

Belief and taste systems indexed by (agent, information set), dynamic
consistency of beliefs along the position order, conditional expected
payoffs, dynamic rationality, equilibrium testing, exhaustive equilibrium
enumeration with Bayesian belief construction, and the multiple-selves
transform.  All arithmetic is exact rational.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from ._base import (
    InputInvalid,
    PreconditionViolated,
    atom_key,
    charge_budget,
    set_key,
    sorted_atoms,
)
from .sdf_core import PartitionAlgebra, RandomMove
from .sef_core import SEF, InfoSet, info_sets, all_info_sets, selves_split
from .play import (
    NodeProfile,
    Strategy,
    enumerate_strategies,
    induced_outcome,
    profile_key,
    profile_space,
)


# ---------------------------------------------------------------------------
# Probability over scenarios (exact)


@dataclass(frozen=True)
class RationalProb:
    """A probability with exact rational weights on a finite carrier."""

    items: tuple  # ((scenario, Fraction), ...) canonical order, mass 1

    @classmethod
    def from_weights(cls, weights) -> "RationalProb":
        weights = dict(weights)
        items = []
        total = Fraction(0)
        for s in sorted_atoms(weights):
            w = Fraction(weights[s])
            if w < 0:
                raise InputInvalid("negative probability weight")
            total += w
            items.append((s, w))
        if total != 1:
            raise InputInvalid(f"weights sum to {total}, expected 1")
        return cls(tuple(items))

    @classmethod
    def uniform(cls, carrier) -> "RationalProb":
        atoms = sorted_atoms(carrier)
        if not atoms:
            raise InputInvalid("empty carrier")
        w = Fraction(1, len(atoms))
        return cls(tuple((s, w) for s in atoms))

    @property
    def carrier(self) -> frozenset:
        return frozenset(s for s, _ in self.items)

    @property
    def support(self) -> frozenset:
        return frozenset(s for s, w in self.items if w > 0)

    def __call__(self, scenario) -> Fraction:
        for s, w in self.items:
            if s == scenario:
                return w
        return Fraction(0)

    def mass(self, event) -> Fraction:
        event = frozenset(event)
        return sum((w for s, w in self.items if s in event), Fraction(0))

    def condition(self, event) -> "RationalProb | None":
        """Restrict to the event and renormalize; None on mass zero."""
        event = frozenset(event)
        z = self.mass(event)
        if z == 0:
            return None
        return RationalProb(
            tuple((s, w / z) for s, w in self.items if s in event)
        )

    def restrict_renormalize(self, carrier) -> "RationalProb | None":
        """Conditioned measure re-carried on the given set."""
        got = self.condition(carrier)
        if got is None:
            return None
        return got

    @property
    def key(self):
        return tuple((atom_key(s), w) for s, w in self.items if w != 0)


# ---------------------------------------------------------------------------
# Belief, taste and EU structures


@dataclass(frozen=True)
class BeliefCell:
    """Beliefs of one agent at one information set."""

    agent: object
    cell: InfoSet
    position: tuple       # ((scenario, member RandomMove), ...) over the domain
    algebra: PartitionAlgebra  # information about the position, on the members
    posterior: RationalProb    # on the info set's domain
    unconstrained: bool = False

    def position_at(self, scenario) -> RandomMove:
        for s, m in self.position:
            if s == scenario:
                return m
        raise KeyError(scenario)

    @property
    def key(self):
        return (atom_key(self.agent), self.cell.key)


class BeliefSystem:
    """Family of belief cells indexed by (agent, information set)."""

    def __init__(self, cells):
        self.cells = sorted(cells, key=lambda c: c.key)
        self._index = {c.key: c for c in self.cells}
        if len(self._index) != len(self.cells):
            raise InputInvalid("duplicate (agent, info set) belief cell")

    def at(self, agent, cell: InfoSet) -> BeliefCell:
        return self._index[(atom_key(agent), cell.key)]

    def replace(self, new_cell: BeliefCell) -> "BeliefSystem":
        cells = [
            new_cell if c.key == new_cell.key else c for c in self.cells
        ]
        return BeliefSystem(cells)

    @property
    def key(self):
        return tuple(
            (c.key, c.posterior.key, tuple((atom_key(s), m.key) for s, m in c.position))
            for c in self.cells
        )


class TasteSystem:
    """Utilities over outcomes, indexed by (agent, information set)."""

    def __init__(self, utilities):
        # utilities: iterable of (agent, info_set, {outcome: Fraction})
        self.entries = []
        self._index = {}
        for agent, cell, u in utilities:
            u = {w: Fraction(v) for w, v in dict(u).items()}
            key = (atom_key(agent), cell.key)
            self.entries.append((agent, cell, u))
            self._index[key] = u
        self.entries.sort(key=lambda e: (atom_key(e[0]), e[1].key))

    def at(self, agent, cell: InfoSet) -> dict:
        return self._index[(atom_key(agent), cell.key)]

    @classmethod
    def shared(cls, sef: SEF, per_agent: dict) -> "TasteSystem":
        """The same utility for an agent at all of its information sets."""
        rows = []
        for i in sef.agents:
            for cell in info_sets(sef, i):
                rows.append((i, cell, per_agent[i]))
        return cls(rows)


@dataclass
class EuStructure:
    beliefs: BeliefSystem
    tastes: TasteSystem
    outcome_algebra: PartitionAlgebra | None = None


def validate_eu(sef: SEF, eu: EuStructure, profiles=None):
    """Structural checks: utility total and block-constant, ψ well-defined."""
    findings = []
    outcomes = frozenset(sef.forest.outcomes)
    for agent, cell, u in eu.tastes.entries:
        if frozenset(u) != outcomes:
            findings.append(("UtilityNotTotal", (agent, cell.key)))
        if eu.outcome_algebra is not None:
            for block in eu.outcome_algebra.blocks:
                vals = {u[w] for w in block if w in u}
                if len(vals) > 1:
                    findings.append(("UtilityNotBlockConstant", (agent, cell.key)))
                    break
    for cell in all_info_sets(sef):
        for w in sorted_atoms(outcomes):
            hits = [m for m in cell.members if w in m.image_union]
            if len(hits) > 1:
                findings.append(("PsiAmbiguous", (cell.key, w)))
    return findings


# ---------------------------------------------------------------------------
# ψ and induced outcome fields


def psi(sef: SEF, cell: InfoSet, w):
    """The unique member random move whose image covers w, else None."""
    hits = [m for m in cell.members if w in m.image_union]
    if len(hits) > 1:
        raise InputInvalid("outcome reached by several members of one info set")
    return hits[0] if hits else None


class PayoffEngine:
    """Memoized outcome and payoff evaluation over a fixed instance."""

    def __init__(self, sef: SEF):
        self.sef = sef
        self._outcomes = {}       # (node set_key, profile_key) -> outcome
        self._node_profiles = {}  # profile_key -> NodeProfile
        self._payoffs = {}

    def _node_profile(self, profile, pkey):
        np_ = self._node_profiles.get(pkey)
        if np_ is None:
            np_ = NodeProfile(self.sef, profile)
            self._node_profiles[pkey] = np_
        return np_

    def outcome_from(self, node, profile, pkey=None):
        """Out(s | ↑node), memoized by node and profile."""
        node = frozenset(node)
        if pkey is None:
            pkey = profile_key(profile)
        key = (node, pkey)
        got = self._outcomes.get(key)
        if got is None:
            np_ = self._node_profile(profile, pkey)
            h = self.sef.forest.up_set(node)
            got = induced_outcome(self.sef, np_, h)
            self._outcomes[key] = got
        return got

    def outcome_field(self, beliefs: BeliefSystem, profile, agent, cell: InfoSet,
                      pkey=None) -> dict:
        """Out^s_{i,𝔭}: scenario → outcome via the position belief."""
        if pkey is None:
            pkey = profile_key(profile)
        bc = beliefs.at(agent, cell)
        return {
            s: self.outcome_from(m(s), profile, pkey) for s, m in bc.position
        }

    def expected_payoff(self, eu: EuStructure, profile, agent, cell: InfoSet,
                        pkey=None) -> dict:
        """Conditional expected utility per positive-mass information block."""
        if pkey is None:
            pkey = profile_key(profile)
        bc = eu.beliefs.at(agent, cell)
        memo_key = ((atom_key(agent), cell.key), bc.posterior.key,
                    tuple((atom_key(s), m.key) for s, m in bc.position), pkey)
        got = self._payoffs.get(memo_key)
        if got is not None:
            return got
        u = eu.tastes.at(agent, cell)
        out = self.outcome_field(eu.beliefs, profile, agent, cell, pkey)
        result = {}
        for block in bc.algebra.blocks:
            z = bc.posterior.mass(block)
            if z == 0:
                continue
            total = sum(
                (bc.posterior(s) * u[out[s]] for s in block if s in out),
                Fraction(0),
            )
            result[block] = total / z
        self._payoffs[memo_key] = result
        return result


def outcome_field(sef: SEF, beliefs: BeliefSystem, profile, agent, cell: InfoSet) -> dict:
    return PayoffEngine(sef).outcome_field(beliefs, profile, agent, cell)


def expected_payoff(sef: SEF, eu: EuStructure, profile, agent, cell: InfoSet) -> dict:
    return PayoffEngine(sef).expected_payoff(eu, profile, agent, cell)


# ---------------------------------------------------------------------------
# Dynamic consistency


@dataclass
class DcPair:
    source: tuple  # (agent, InfoSet)
    target: tuple
    e_set: frozenset          # scenarios where source position is above target's
    e_minus: frozenset        # target domain minus e_set
    e_reached: frozenset      # part of e_set where play reaches the target set
    condition_a: bool = True
    witness_a: object = None

    def to_dict(self):
        return {
            "source": str(self.source[1].key),
            "target": str(self.target[1].key),
            "condition_a": self.condition_a,
        }


@dataclass
class DcReport:
    pairs: list = field(default_factory=list)       # all ordered DcPair records
    condition_a: bool = True
    condition_b: bool = True
    condition_c: bool = True
    priors: dict = field(default_factory=dict)      # unordered pair key -> RationalProb
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.condition_a and self.condition_b and self.condition_c

    def to_dict(self):
        return {
            "ok": self.ok,
            "condition_a": self.condition_a,
            "condition_b": self.condition_b,
            "condition_c": self.condition_c,
            "failures": [str(f) for f in self.failures],
        }


def _dc_pair_data(sef: SEF, engine: PayoffEngine, beliefs: BeliefSystem,
                  profile, pkey, src, tgt) -> DcPair:
    (i, pi), (j, pj) = src, tgt
    bi, bj = beliefs.at(i, pi), beliefs.at(j, pj)
    di, dj = pi.domain, pj.domain
    e_set = frozenset(
        s for s in di & dj
        if bi.position_at(s)(s) >= bj.position_at(s)(s)
    )
    e_minus = dj - e_set
    out_i = engine.outcome_field(beliefs, profile, i, pi, pkey)
    reached = {}
    for s in sorted_atoms(di):
        reached[s] = psi(sef, pj, out_i[s])
    e_reached = frozenset(s for s in e_set if reached[s] is not None)
    pair = DcPair(src, tgt, e_set, e_minus, e_reached)
    # Condition (a): where the source sits above the move actually reached in
    # the target set, the target's position belief names that reached move.
    for s in sorted_atoms(di & dj):
        m = reached[s]
        if m is None:
            continue
        if bi.position_at(s)(s) >= m(s):
            if bj.position_at(s).key != m.key:
                pair.condition_a = False
                pair.witness_a = s
                break
    return pair


def _pair_constraints(ordered_pairs, variables):
    """Linear rows (coeff per variable, rhs) for the per-pair prior system."""
    idx = {s: k for k, s in enumerate(variables)}
    rows = []
    for pair, posterior_j in ordered_pairs:
        g = pair.e_minus | pair.e_reached
        dj = pair.target[1].domain
        for s in sorted_atoms(dj):
            # posterior_j({s}) * P(g) - 1[s in g] * P({s}) = 0
            coeff = [Fraction(0)] * len(variables)
            pj_s = posterior_j(s)
            for t in g:
                coeff[idx[t]] += pj_s
            if s in g:
                coeff[idx[s]] -= 1
            rows.append((coeff, Fraction(0)))
    # total mass one
    rows.append(([Fraction(1)] * len(variables), Fraction(1)))
    return rows


def _satisfies(rows, values) -> bool:
    for coeff, rhs in rows:
        if sum((c * v for c, v in zip(coeff, values)), Fraction(0)) != rhs:
            return False
    return True


def _feasible_nonneg(rows, n_vars) -> list | None:
    """Exact phase-1 simplex: find x ≥ 0 with the given equality rows."""
    m = len(rows)
    # Build tableau with artificial variables; make rhs nonnegative first.
    tab = []
    for coeff, rhs in rows:
        coeff = list(coeff)
        if rhs < 0:
            coeff = [-c for c in coeff]
            rhs = -rhs
        tab.append(coeff + [Fraction(0)] * m + [rhs])
    for r in range(m):
        tab[r][n_vars + r] = Fraction(1)
    basis = [n_vars + r for r in range(m)]
    width = n_vars + m
    # Objective: minimize sum of artificials; reduced costs via row sums.
    cost = [Fraction(0)] * (width + 1)
    for r in range(m):
        for c in range(width + 1):
            cost[c] += tab[r][c]
    while True:
        enter = None
        for c in range(n_vars):  # Bland's rule: smallest improving index
            if cost[c] > 0:
                enter = c
                break
        if enter is None:
            break
        leave = None
        best = None
        for r in range(m):
            if tab[r][enter] > 0:
                ratio = tab[r][width] / tab[r][enter]
                if best is None or ratio < best or (
                    ratio == best and basis[r] < basis[leave]
                ):
                    best = ratio
                    leave = r
        if leave is None:
            break  # unbounded cannot happen in phase 1; defensive
        piv = tab[leave][enter]
        tab[leave] = [v / piv for v in tab[leave]]
        for r in range(m):
            if r != leave and tab[r][enter] != 0:
                f = tab[r][enter]
                tab[r] = [a - f * b for a, b in zip(tab[r], tab[leave])]
        f = cost[enter]
        cost = [a - f * b for a, b in zip(cost, tab[leave])]
        basis[leave] = enter
    if cost[width] != 0:
        return None
    x = [Fraction(0)] * n_vars
    for r in range(m):
        if basis[r] < n_vars:
            x[basis[r]] = tab[r][width]
    if any(v < 0 for v in x):
        return None
    return x


def dynamic_consistency(sef: SEF, beliefs: BeliefSystem, profile,
                        model_prior: RationalProb | None = None,
                        pairs: str = "all",
                        global_prior: bool = False,
                        engine: PayoffEngine | None = None) -> DcReport:
    """Belief agreement along the position order plus common-prior feasibility.

    The feasibility condition is evaluated per unordered pair whose scenarios
    of comparable positions are nonempty in at least one direction; pairs
    with no comparable positions impose no prior constraint.
    """
    engine = engine or PayoffEngine(sef)
    pkey = profile_key(profile)
    index = [(i, cell) for i in sef.agents for cell in info_sets(sef, i)]
    report = DcReport()
    pair_data = {}
    for src, tgt in itertools.permutations(index, 2):
        if pairs == "same_agent" and atom_key(src[0]) != atom_key(tgt[0]):
            continue
        pd = _dc_pair_data(sef, engine, beliefs, profile, pkey, src, tgt)
        pair_data[(src[1].key, tgt[1].key, atom_key(src[0]), atom_key(tgt[0]))] = pd
        report.pairs.append(pd)
        if not pd.condition_a:
            report.condition_a = False
            report.failures.append(("condition_a", pd.source[1].key,
                                    pd.target[1].key, pd.witness_a))
        # Condition (b): the comparability set must be an event.
        if not sef.sdf.algebra.contains(pd.e_set):
            report.condition_b = False
            report.failures.append(("condition_b", pd.source[1].key,
                                    pd.target[1].key))
    seen = set()
    active_pairs = []
    for src, tgt in itertools.combinations(index, 2):
        if pairs == "same_agent" and atom_key(src[0]) != atom_key(tgt[0]):
            continue
        key_fwd = (src[1].key, tgt[1].key, atom_key(src[0]), atom_key(tgt[0]))
        key_bwd = (tgt[1].key, src[1].key, atom_key(tgt[0]), atom_key(src[0]))
        fwd, bwd = pair_data[key_fwd], pair_data[key_bwd]
        if not (fwd.e_set or bwd.e_set):
            continue  # no comparable positions: no prior constraint
        pair_key = (key_fwd, key_bwd)
        if pair_key in seen:
            continue
        seen.add(pair_key)
        # four-set identity invariant
        union = (fwd.e_minus | fwd.e_reached | bwd.e_minus | bwd.e_reached)
        if union != (src[1].domain | tgt[1].domain):
            report.failures.append(("identity", key_fwd))
        active_pairs.append((src, tgt, fwd, bwd))
    constrained = []
    for src, tgt, fwd, bwd in active_pairs:
        variables = sorted_atoms(src[1].domain | tgt[1].domain)
        ordered = [
            (fwd, beliefs.at(*tgt).posterior),
            (bwd, beliefs.at(*src).posterior),
        ]
        rows = _pair_constraints(ordered, variables)
        solution = None
        if model_prior is not None:
            cand = model_prior.condition(frozenset(variables))
            if cand is not None and _satisfies(rows, [cand(s) for s in variables]):
                solution = [cand(s) for s in variables]
        if solution is None:
            solution = _feasible_nonneg(rows, len(variables))
        if solution is None:
            report.condition_c = False
            report.failures.append(
                ("condition_c", fwd.source[1].key, fwd.target[1].key)
            )
        else:
            report.priors[(fwd.source[1].key, fwd.target[1].key)] = (
                RationalProb(tuple(zip(variables, solution)))
            )
            constrained.append((variables, rows))
    if global_prior and report.condition_c and constrained:
        variables = sorted_atoms(
            frozenset().union(*(frozenset(v) for v, _ in constrained))
        )
        idx = {s: k for k, s in enumerate(variables)}
        rows = []
        for vs, rws in constrained:
            for coeff, rhs in rws[:-1]:  # drop per-pair mass rows
                full = [Fraction(0)] * len(variables)
                for c, s in zip(coeff, vs):
                    full[idx[s]] = c
                rows.append((full, rhs))
        rows.append(([Fraction(1)] * len(variables), Fraction(1)))
        if _feasible_nonneg(rows, len(variables)) is None:
            report.condition_c = False
            report.failures.append(("condition_c_global",))
    return report


def taste_consistency(tastes: TasteSystem) -> bool:
    """Each agent values outcomes the same way at all its information sets."""
    per_agent = {}
    for agent, _, u in tastes.entries:
        key = atom_key(agent)
        if key in per_agent and per_agent[key] != u:
            return False
        per_agent.setdefault(key, u)
    return True


# ---------------------------------------------------------------------------
# Rationality and equilibrium


def is_dynamically_rational(sef: SEF, eu: EuStructure, profile,
                            engine: PayoffEngine | None = None,
                            deviations: dict | None = None) -> bool:
    """No unilateral deviation improves on any positive-mass block."""
    engine = engine or PayoffEngine(sef)
    if deviations is None:
        deviations = {i: enumerate_strategies(sef, i) for i in sef.agents}
    base_key = profile_key(profile)
    for i in sef.agents:
        cells = info_sets(sef, i)
        base = {
            cell.key: engine.expected_payoff(eu, profile, i, cell, base_key)
            for cell in cells
        }
        for alt in deviations[i]:
            if alt.key == profile[i].key:
                continue
            dev = dict(profile)
            dev[i] = alt
            dev_key = profile_key(dev)
            for cell in cells:
                got = engine.expected_payoff(eu, dev, i, cell, dev_key)
                for block, value in got.items():
                    if value > base[cell.key].get(block, value):
                        return False
    return True


def is_equilibrium(sef: SEF, eu: EuStructure, profile,
                   model_prior: RationalProb | None = None,
                   engine: PayoffEngine | None = None,
                   deviations: dict | None = None) -> bool:
    if not taste_consistency(eu.tastes):
        return False
    engine = engine or PayoffEngine(sef)
    if not is_dynamically_rational(sef, eu, profile, engine, deviations):
        return False
    report = dynamic_consistency(sef, eu.beliefs, profile,
                                 model_prior=model_prior, engine=engine)
    return report.ok


# ---------------------------------------------------------------------------
# Bayesian belief construction


def _default_position(sef: SEF, engine: PayoffEngine, profile, pkey,
                      cell: InfoSet) -> tuple:
    """Position belief: the member reached under the profile, else first."""
    position = []
    for s in sorted_atoms(cell.domain):
        root = sef.sdf.root(s)
        try:
            w = engine.outcome_from(root, profile, pkey)
        except Exception:
            w = None
        pick = None
        if w is not None:
            for m in cell.members:
                if s in m.domain and w in m(s):
                    pick = m
                    break
        if pick is None:
            for m in cell.members:
                if s in m.domain:
                    pick = m
                    break
        if pick is None:
            raise InputInvalid("no position belief available")
        position.append((s, pick))
    return tuple(position)


def bayes_belief_builder(sef: SEF, prior: RationalProb, profile,
                         position_beliefs: dict | None = None,
                         engine: PayoffEngine | None = None) -> BeliefSystem:
    """Posteriors by exact conditioning along the position order.

    Each information set's posterior is the prior conditioned on the event
    that the set is not skipped from the viewpoint of a comparable earlier
    set: the union of the incomparable part of the domain with the part
    where play actually reaches the set.  Zero-mass conditioning events fall
    back to the prior restricted to the domain, flagged unconstrained.
    """
    engine = engine or PayoffEngine(sef)
    pkey = profile_key(profile)
    index = [(i, cell) for i in sef.agents for cell in info_sets(sef, i)]
    positions = {}
    for i, cell in index:
        key = (atom_key(i), cell.key)
        if position_beliefs is not None and key in position_beliefs:
            positions[key] = tuple(sorted(
                ((s, m) for s, m in dict(position_beliefs[key]).items()),
                key=lambda it: atom_key(it[0]),
            ))
        else:
            positions[key] = _default_position(sef, engine, profile, pkey, cell)
    # Provisional cells so pair data can be computed from position beliefs.
    provisional = BeliefSystem([
        BeliefCell(
            i, cell, positions[(atom_key(i), cell.key)], cell.algebra,
            prior.condition(cell.domain) or RationalProb.uniform(cell.domain),
        )
        for i, cell in index
    ])
    cells = []
    for j, pj in index:
        key = (atom_key(j), pj.key)
        posterior = None
        unconstrained = True
        # The prior itself constrains any cell that play actually reaches
        # with positive prior mass; only unreached cells enjoy off-path
        # freedom.
        reached = set()
        for s in pj.domain:
            try:
                w = engine.outcome_from(sef.sdf.root(s), profile, pkey)
            except Exception:
                continue
            if any(s in m.domain and w in m(s) for m in pj.members):
                reached.add(s)
        cond = prior.condition(frozenset(reached))
        if cond is not None:
            restricted = cond.condition(pj.domain)
            if restricted is not None:
                posterior = restricted
                unconstrained = False
        for i, pi in index:
            if posterior is not None:
                break
            if (atom_key(i), pi.key) == key:
                continue
            pd = _dc_pair_data(sef, engine, provisional, profile, pkey,
                               (i, pi), (j, pj))
            if not pd.e_set:
                continue
            cond = prior.condition(pd.e_minus | pd.e_reached)
            if cond is not None:
                restricted = cond.condition(pj.domain)
                if restricted is not None:
                    posterior = restricted
                    unconstrained = False
                    break
        if posterior is None:
            posterior = prior.condition(pj.domain)
            if posterior is None:
                posterior = RationalProb.uniform(pj.domain)
        cells.append(BeliefCell(j, pj, positions[key], pj.algebra,
                                posterior, unconstrained))
    return BeliefSystem(cells)


def _block_union_posteriors(prior: RationalProb, cell: InfoSet):
    """Candidate off-path posteriors: conditionals on block unions."""
    blocks = [b for b in cell.algebra.blocks if prior.mass(b) > 0]
    out = []
    for r in range(1, len(blocks) + 1):
        for combo in itertools.combinations(blocks, r):
            event = frozenset().union(*combo)
            cond = prior.condition(event)
            if cond is not None:
                out.append(cond)
    return out


def equilibrium_search(sef: SEF, tastes: TasteSystem, prior: RationalProb,
                       mode: str = "exhaustive",
                       outcome_algebra: PartitionAlgebra | None = None,
                       position_beliefs: dict | None = None,
                       profiles=None) -> list:
    """All equilibria of the finite instance under built Bayesian beliefs.

    profiles restricts the search to a given iterable of strategy profiles
    (defaults to the full profile space).
    """
    if mode != "exhaustive":
        raise InputInvalid(f"unknown search mode: {mode}")
    if not taste_consistency(tastes):
        return []
    engine = PayoffEngine(sef)
    if profiles is None:
        profiles = profile_space(sef)
    deviations = {i: enumerate_strategies(sef, i) for i in sef.agents}
    results = []
    for profile in profiles:
        beliefs = bayes_belief_builder(sef, prior, profile,
                                       position_beliefs, engine)
        eu = EuStructure(beliefs, tastes, outcome_algebra)
        if is_equilibrium(sef, eu, profile, model_prior=prior, engine=engine,
                          deviations=deviations):
            results.append((profile, beliefs))
            continue
        # Off-path freedom: retry the unconstrained cells with alternative
        # block-respecting posteriors before rejecting the profile.
        free = [c for c in beliefs.cells if c.unconstrained]
        if not free:
            continue
        pools = []
        for c in free:
            alts = [
                p for p in _block_union_posteriors(prior, c.cell)
                if p.key != c.posterior.key
            ]
            pools.append([None] + alts)
        charge_budget("pairs", math.prod(len(p) for p in pools))
        found = False
        for combo in itertools.product(*pools):
            if all(p is None for p in combo):
                continue
            cand = beliefs
            for c, p in zip(free, combo):
                if p is not None:
                    cand = cand.replace(BeliefCell(
                        c.agent, c.cell, c.position, c.algebra, p, True))
            eu = EuStructure(cand, tastes, outcome_algebra)
            if is_equilibrium(sef, eu, profile, model_prior=prior,
                              engine=engine, deviations=deviations):
                results.append((profile, cand))
                found = True
                break
        if found:
            continue
    results.sort(key=lambda pb: profile_key(pb[0]))
    return results


# ---------------------------------------------------------------------------
# Multiple selves


def multiple_selves(sef: SEF, eu: EuStructure | None = None):
    """Split each agent into one agent per information set.

    Returns (new SEF, new EuStructure or None, label map).  Beliefs and
    tastes are re-indexed to the split agents.
    """
    new_sef, label_map = selves_split(sef)
    if eu is None:
        return new_sef, None, label_map
    cells = []
    rows = []
    for label, old_cell in label_map.items():
        old_agent = label[0]
        new_cells = info_sets(new_sef, label)
        if len(new_cells) != 1:
            raise InputInvalid("split agent has more than one information set")
        new_cell = new_cells[0]
        bc = eu.beliefs.at(old_agent, old_cell)
        cells.append(BeliefCell(label, new_cell, bc.position, bc.algebra,
                                bc.posterior, bc.unconstrained))
        rows.append((label, new_cell, eu.tastes.at(old_agent, old_cell)))
    new_eu = EuStructure(BeliefSystem(cells), TasteSystem(rows),
                         eu.outcome_algebra)
    return new_sef, new_eu, label_map
