"""Document parser/emitter, fixture library, and command-line driver.

The document format is canonical JSON: objects with sorted keys, sets as
sorted arrays, and rational numbers as "p/q" strings.  Two kinds exist:
"sef" documents list outcomes/nodes/random moves/choices explicitly, while
"action_path" documents describe time-indexed action data from which the
whole instance is generated.  Both kinds may carry a preference section
(prior weights and per-agent utilities) enabling equilibrium search.
"""

from __future__ import annotations

import argparse
import itertools
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction

from ._base import (
    BudgetExceeded,
    EngineError,
    InputInvalid,
    atom_key,
    set_key,
    sorted_atoms,
    sorted_sets,
)
from .action_path import ApData, ApSefData, build_sef as build_ap_sef
from .order_core import Forest, closure, histories
from .play import (
    induced_outcome,
    profile_key,
    strategy_from_choices,
    wellposedness_by_scenarios,
    wellposedness_direct,
)
from .preference import (
    EuStructure,
    PayoffEngine,
    RationalProb,
    TasteSystem,
    equilibrium_search,
    expected_payoff,
)
from .sdf_core import SDF, PartitionAlgebra, RandomMove, validate_sdf
from .sef_core import (
    SEF,
    classify_information,
    complete_choices,
    info_sets,
    truncate,
    validate_axioms,
)


class SchemaError(InputInvalid):
    """The document is JSON but violates the schema at the given path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class DanglingReference(SchemaError):
    """A cross-reference names an id that is not defined."""


class UnknownFixture(InputInvalid):
    pass


class InvalidParam(InputInvalid):
    pass


# ---------------------------------------------------------------------------
# Rationals as "p/q" strings

_RAT_RE = re.compile(r"^-?\d+(/[1-9]\d*)?$")


def rational_from_string(text, path="rational") -> Fraction:
    if not isinstance(text, str) or not _RAT_RE.match(text):
        raise SchemaError(path, f"not a rational 'p/q' string: {text!r}")
    return Fraction(text)


def rational_to_string(value) -> str:
    f = Fraction(value)
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 \
        else str(f.numerator)


def _jkey(value):
    """A deterministic sort key for arbitrary JSON values."""
    return json.dumps(value, sort_keys=True)


# ---------------------------------------------------------------------------
# Documents


class GameSpecDocument:
    """A validated, canonicalized game description."""

    def __init__(self, data: dict):
        self.data = data

    @property
    def kind(self) -> str:
        return self.data["kind"]

    def to_dict(self) -> dict:
        return self.data

    def __eq__(self, other):
        return isinstance(other, GameSpecDocument) and self.data == other.data

    def __hash__(self):
        return hash(_jkey(self.data))

    def __repr__(self):
        return f"GameSpecDocument(kind={self.kind!r})"


def parse_spec(raw) -> GameSpecDocument:
    """Parse and validate a document from bytes or text."""
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    obj = json.loads(raw)  # json.JSONDecodeError carries the position
    return GameSpecDocument(_canonical_document(obj))


def emit_spec(doc: GameSpecDocument) -> bytes:
    """Canonical serialization: sorted keys, two-space indent, newline."""
    text = json.dumps(doc.to_dict(), sort_keys=True, indent=2,
                      separators=(",", ": "), ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def _require(obj, key, typ, path):
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing required field")
    value = obj[key]
    if typ is not None and not isinstance(value, typ):
        raise SchemaError(f"{path}.{key}", f"expected {typ.__name__}")
    return value


def _string_list(values, path):
    if not isinstance(values, list) or \
            not all(isinstance(v, str) for v in values):
        raise SchemaError(path, "expected a list of strings")
    if len(set(values)) != len(values):
        raise SchemaError(path, "duplicate entries")
    return sorted(values)


def _blocks(values, carrier, path):
    """Validate and canonicalize partition blocks over a known carrier."""
    if not isinstance(values, list):
        raise SchemaError(path, "expected a list of blocks")
    seen = []
    for k, block in enumerate(values):
        block = _string_list(block, f"{path}[{k}]")
        for s in block:
            if s not in carrier:
                raise DanglingReference(f"{path}[{k}]", f"unknown id {s!r}")
        seen.append(block)
    flat = [s for b in seen for s in b]
    if sorted(flat) != sorted(carrier) or len(set(flat)) != len(flat):
        raise SchemaError(path, "blocks do not partition the carrier")
    return sorted(seen)


def _canonical_preference(pref, scenarios, outcome_ids, agents, kind, paths):
    if pref is None:
        return None
    if not isinstance(pref, dict):
        raise SchemaError("preference", "expected an object")
    prior = _require(pref, "prior", dict, "preference")
    mass = Fraction(0)
    canon_prior = {}
    for s, v in prior.items():
        if s not in scenarios:
            raise DanglingReference(f"preference.prior.{s}", "unknown scenario")
        f = rational_from_string(v, f"preference.prior.{s}")
        if f < 0:
            raise SchemaError(f"preference.prior.{s}", "negative weight")
        mass += f
        canon_prior[s] = rational_to_string(f)
    if mass != 1:
        raise SchemaError("prior", "mass ≠ 1")
    tastes = _require(pref, "tastes", dict, "preference")
    canon_tastes = {}
    for agent, table in tastes.items():
        if agent not in agents:
            raise DanglingReference(f"preference.tastes.{agent}",
                                    "unknown agent")
        if kind == "sef":
            if not isinstance(table, dict):
                raise SchemaError(f"preference.tastes.{agent}",
                                  "expected an object")
            canon = {}
            for w, v in table.items():
                if w not in outcome_ids:
                    raise DanglingReference(
                        f"preference.tastes.{agent}.{w}", "unknown outcome")
                canon[w] = rational_to_string(
                    rational_from_string(v, f"preference.tastes.{agent}.{w}"))
            if set(canon) != set(outcome_ids):
                raise SchemaError(f"preference.tastes.{agent}",
                                  "utility must be total over the outcomes")
            canon_tastes[agent] = canon
        else:
            if not isinstance(table, list):
                raise SchemaError(f"preference.tastes.{agent}",
                                  "expected a list of records")
            canon = []
            keys = set()
            for k, rec in enumerate(table):
                p = f"preference.tastes.{agent}[{k}]"
                s = _require(rec, "scenario", str, p)
                path = _require(rec, "path", list, p)
                u = rational_to_string(
                    rational_from_string(_require(rec, "u", str, p), p))
                key = (s, _jkey(path))
                if key not in paths:
                    raise DanglingReference(p, "unknown outcome")
                keys.add(key)
                canon.append({"scenario": s, "path": path, "u": u})
            if keys != set(paths):
                raise SchemaError(f"preference.tastes.{agent}",
                                  "utility must be total over the outcomes")
            canon.sort(key=_jkey)
            canon_tastes[agent] = canon
    if set(canon_tastes) != set(agents):
        raise SchemaError("preference.tastes", "one table per agent required")
    return {"prior": canon_prior, "tastes": canon_tastes,
            "position_beliefs": pref.get("position_beliefs")}


def _canonical_sef_document(obj) -> dict:
    agents = _string_list(_require(obj, "agents", list, "$"), "agents")
    scenarios = _string_list(_require(obj, "scenarios", list, "$"),
                             "scenarios")
    outcomes = _require(obj, "outcomes", list, "$")
    canon_outcomes, outcome_scenario = [], {}
    for k, rec in enumerate(outcomes):
        p = f"outcomes[{k}]"
        oid = _require(rec, "id", str, p)
        s = _require(rec, "scenario", str, p)
        if s not in scenarios:
            raise DanglingReference(f"{p}.scenario", f"unknown scenario {s!r}")
        if oid in outcome_scenario:
            raise SchemaError(p, f"duplicate outcome id {oid!r}")
        outcome_scenario[oid] = s
        canon_outcomes.append({"id": oid, "scenario": s})
    canon_outcomes.sort(key=lambda r: r["id"])
    outcome_ids = set(outcome_scenario)

    nodes = _require(obj, "nodes", dict, "$")
    canon_nodes = {}
    for nid, members in nodes.items():
        members = _string_list(members, f"nodes.{nid}")
        if not members:
            raise SchemaError(f"nodes.{nid}", "empty node")
        for w in members:
            if w not in outcome_ids:
                raise DanglingReference(f"nodes.{nid}", f"unknown outcome {w!r}")
        canon_nodes[nid] = members

    rms = _require(obj, "random_moves", dict, "$")
    canon_rms = {}
    for mid, section in rms.items():
        if not isinstance(section, dict) or not section:
            raise SchemaError(f"random_moves.{mid}",
                              "expected a nonempty scenario->node object")
        canon = {}
        for s, nid in section.items():
            if s not in scenarios:
                raise DanglingReference(f"random_moves.{mid}.{s}",
                                        "unknown scenario")
            if nid not in canon_nodes:
                raise DanglingReference(f"random_moves.{mid}.{s}",
                                        f"unknown node {nid!r}")
            canon[s] = nid
        canon_rms[mid] = canon

    choices = _require(obj, "choices", dict, "$")
    canon_choices = {}
    for agent, table in choices.items():
        if agent not in agents:
            raise DanglingReference(f"choices.{agent}", "unknown agent")
        if not isinstance(table, dict):
            raise SchemaError(f"choices.{agent}", "expected an object")
        canon = {}
        for cid, members in table.items():
            members = _string_list(members, f"choices.{agent}.{cid}")
            for w in members:
                if w not in outcome_ids:
                    raise DanglingReference(f"choices.{agent}.{cid}",
                                            f"unknown outcome {w!r}")
            canon[cid] = members
        canon_choices[agent] = canon
    for agent in agents:
        canon_choices.setdefault(agent, {})

    eis = _require(obj, "eis", dict, "$")
    canon_eis = {}
    for agent, table in eis.items():
        if agent not in agents:
            raise DanglingReference(f"eis.{agent}", "unknown agent")
        canon = {}
        for mid, blocks in table.items():
            if mid not in canon_rms:
                raise DanglingReference(f"eis.{agent}.{mid}",
                                        f"unknown random move {mid!r}")
            carrier = sorted(canon_rms[mid])
            canon[mid] = _blocks(blocks, carrier, f"eis.{agent}.{mid}")
        canon_eis[agent] = canon
    for agent in agents:
        canon_eis.setdefault(agent, {})

    # Reference choices are outcome sets in their own right; they need not
    # belong to the agent's choice set.
    refs = _require(obj, "reference_choices", dict, "$")
    canon_refs = {}
    for agent, table in refs.items():
        if agent not in agents:
            raise DanglingReference(f"reference_choices.{agent}",
                                    "unknown agent")
        canon = {}
        for mid, sets in table.items():
            if mid not in canon_rms:
                raise DanglingReference(f"reference_choices.{agent}.{mid}",
                                        f"unknown random move {mid!r}")
            if not isinstance(sets, list):
                raise SchemaError(f"reference_choices.{agent}.{mid}",
                                  "expected a list of outcome sets")
            canon_sets = []
            for k, ws in enumerate(sets):
                ws = _string_list(ws, f"reference_choices.{agent}.{mid}[{k}]")
                for w in ws:
                    if w not in outcome_ids:
                        raise DanglingReference(
                            f"reference_choices.{agent}.{mid}[{k}]",
                            f"unknown outcome {w!r}")
                canon_sets.append(ws)
            canon[mid] = sorted(canon_sets)
        canon_refs[agent] = canon
    for agent in agents:
        canon_refs.setdefault(agent, {})

    pref = _canonical_preference(obj.get("preference"), scenarios,
                                 outcome_ids, agents, "sef", None)
    return {
        "format": "sefkit-gamespec",
        "version": 1,
        "kind": "sef",
        "agents": agents,
        "scenarios": scenarios,
        "outcomes": canon_outcomes,
        "nodes": canon_nodes,
        "random_moves": canon_rms,
        "eis": canon_eis,
        "reference_choices": canon_refs,
        "choices": canon_choices,
        "preference": pref,
    }


def _canonical_ap_document(obj) -> dict:
    agents = _string_list(_require(obj, "agents", list, "$"), "agents")
    scenarios = _string_list(_require(obj, "scenarios", list, "$"),
                             "scenarios")
    times = _require(obj, "time", list, "$")
    if not times or len(set(map(_jkey, times))) != len(times):
        raise SchemaError("time", "expected a nonempty list without repeats")
    actions = _require(obj, "actions", dict, "$")
    if set(actions) != set(agents):
        raise SchemaError("actions", "one action list per agent required")
    canon_actions = {}
    for agent, acts in actions.items():
        if not isinstance(acts, list) or not acts:
            raise SchemaError(f"actions.{agent}", "expected a nonempty list")
        canon_actions[agent] = sorted(acts, key=_jkey)

    paths = _require(obj, "paths", list, "$")
    canon_paths, keys = [], set()
    for k, rec in enumerate(paths):
        p = f"paths[{k}]"
        s = _require(rec, "scenario", str, p)
        if s not in scenarios:
            raise DanglingReference(f"{p}.scenario", f"unknown scenario {s!r}")
        path = _require(rec, "path", list, p)
        if len(path) != len(times):
            raise SchemaError(f"{p}.path", "length must match the time axis")
        for profile in path:
            if not isinstance(profile, list) or len(profile) != len(agents):
                raise SchemaError(f"{p}.path",
                                  "each profile needs one action per agent")
            for agent, a in zip(agents, profile):
                if a not in canon_actions[agent]:
                    raise DanglingReference(
                        f"{p}.path", f"unknown action {a!r} for {agent!r}")
        key = (s, _jkey(path))
        if key in keys:
            raise SchemaError(p, "duplicate outcome")
        keys.add(key)
        canon_paths.append({"scenario": s, "path": path})
    canon_paths.sort(key=_jkey)

    hist = _require(obj, "histories", dict, "$")
    canon_hist = {}
    for agent, records in hist.items():
        if agent not in agents:
            raise DanglingReference(f"histories.{agent}", "unknown agent")
        if not isinstance(records, list):
            raise SchemaError(f"histories.{agent}", "expected a list")
        canon = []
        for k, rec in enumerate(records):
            p = f"histories.{agent}[{k}]"
            t = _require(rec, "time", None, p)
            if not any(_jkey(t) == _jkey(u) for u in times):
                raise DanglingReference(f"{p}.time", f"unknown time {t!r}")
            cell = _require(rec, "cell", list, p)
            if not cell:
                raise SchemaError(f"{p}.cell", "empty cell")
            info = rec.get("information")
            if not isinstance(info, list) or not info:
                raise SchemaError(f"{p}.information",
                                  "expected nonempty partition blocks")
            blocks = []
            for j, block in enumerate(info):
                block = _string_list(block, f"{p}.information[{j}]")
                for s in block:
                    if s not in scenarios:
                        raise DanglingReference(f"{p}.information[{j}]",
                                                f"unknown scenario {s!r}")
                blocks.append(block)
            canon.append({
                "time": t,
                "cell": sorted(cell, key=_jkey),
                "information": sorted(blocks),
            })
        canon.sort(key=_jkey)
        canon_hist[agent] = canon
    for agent in agents:
        canon_hist.setdefault(agent, [])

    pref = _canonical_preference(obj.get("preference"), scenarios, None,
                                 agents, "action_path",
                                 [(r["scenario"], _jkey(r["path"]))
                                  for r in canon_paths])
    return {
        "format": "sefkit-gamespec",
        "version": 1,
        "kind": "action_path",
        "agents": agents,
        "scenarios": scenarios,
        "time": times,
        "actions": canon_actions,
        "paths": canon_paths,
        "histories": canon_hist,
        "preference": pref,
    }


def _canonical_document(obj) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError("$", "document must be an object")
    kind = _require(obj, "kind", str, "$")
    if kind == "sef":
        return _canonical_sef_document(obj)
    if kind == "action_path":
        return _canonical_ap_document(obj)
    raise SchemaError("kind", f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# Document -> engine objects


@dataclass
class EngineBundle:
    """A document realized as engine objects."""

    doc: GameSpecDocument
    sef: SEF
    rm_label: dict          # RandomMove -> printable id
    outcome_label: dict     # outcome atom -> printable id
    prior: RationalProb | None = None
    tastes: dict | None = None      # agent -> {outcome atom: Fraction}
    ap_build: object = None

    def taste_system(self) -> TasteSystem:
        if self.tastes is None:
            raise InputInvalid("document carries no preference section")
        return TasteSystem.shared(self.sef, self.tastes)

    def label_of_choice(self, c) -> list:
        return sorted(self.outcome_label[w] for w in c)

    def info_set_label(self, cell) -> list:
        return sorted(self.rm_label[m] for m in cell.members)


def _ap_outcome_label(w, f) -> str:
    return f"{w}|" + ";".join(",".join(str(a) for a in prof) for prof in f)


def to_engine(doc: GameSpecDocument) -> EngineBundle:
    data = doc.to_dict()
    if doc.kind == "sef":
        node_sets = {nid: frozenset(ws) for nid, ws in data["nodes"].items()}
        forest = Forest(node_sets.values())
        scenario_of = {r["id"]: r["scenario"] for r in data["outcomes"]}
        rms = {
            mid: RandomMove.from_map(
                {s: node_sets[nid] for s, nid in section.items()})
            for mid, section in data["random_moves"].items()
        }
        sdf = SDF(forest, scenario_of, rms.values(),
                  scenarios=data["scenarios"])
        choice_sets = {
            agent: {cid: frozenset(ws) for cid, ws in table.items()}
            for agent, table in data["choices"].items()
        }
        eis = {
            agent: {
                rms[mid]: PartitionAlgebra(
                    frozenset(itertools.chain.from_iterable(blocks)), blocks)
                for mid, blocks in table.items()
            }
            for agent, table in data["eis"].items()
        }
        refs = {
            agent: {
                rms[mid]: [frozenset(ws) for ws in sets]
                for mid, sets in table.items()
            }
            for agent, table in data["reference_choices"].items()
        }
        sef = SEF(sdf, data["agents"], eis, refs,
                  {a: list(t.values()) for a, t in choice_sets.items()})
        bundle = EngineBundle(
            doc, sef,
            rm_label={m: mid for mid, m in rms.items()},
            outcome_label={w: w for w in scenario_of},
        )
    else:
        times = tuple(data["time"])
        paths = [
            (r["scenario"], tuple(tuple(p) for p in r["path"]))
            for r in data["paths"]
        ]
        ap_data = ApData(data["agents"], data["actions"], times, paths,
                         scenarios=data["scenarios"])
        hist = {agent: {} for agent in data["agents"]}
        eis = {agent: {} for agent in data["agents"]}
        for agent, records in data["histories"].items():
            for rec in records:
                t = rec["time"]
                cell = frozenset(
                    tuple(tuple(p) for p in prefix) for prefix in rec["cell"]
                )
                hist[agent].setdefault(t, []).append(cell)
                blocks = [frozenset(b) for b in rec["information"]]
                eis[agent][(t, cell)] = PartitionAlgebra(
                    frozenset(itertools.chain.from_iterable(blocks)), blocks)
        hist = {a: {t: tuple(cells) for t, cells in by_t.items()}
                for a, by_t in hist.items()}
        build = build_ap_sef(ApSefData(ap_data, hist, eis))
        rm_label = {
            m: f"t{t}|" + ";".join(",".join(str(a) for a in p)
                                   for p in prefix)
            for (t, prefix), m in build.rm_index.items()
        }
        bundle = EngineBundle(
            doc, build.sef,
            rm_label=rm_label,
            outcome_label={(w, f): _ap_outcome_label(w, f)
                           for w, f in ap_data.outcomes},
            ap_build=build,
        )
    pref = data.get("preference")
    if pref:
        bundle.prior = RationalProb.from_weights(
            {s: Fraction(v) for s, v in pref["prior"].items()})
        if doc.kind == "sef":
            bundle.tastes = {
                agent: {w: Fraction(v) for w, v in table.items()}
                for agent, table in pref["tastes"].items()
            }
        else:
            bundle.tastes = {
                agent: {
                    (r["scenario"], tuple(tuple(p) for p in r["path"])):
                        Fraction(r["u"])
                    for r in table
                }
                for agent, table in pref["tastes"].items()
            }
    return bundle


def document_from_engine(sef: SEF, outcome_label=None,
                         prior: RationalProb | None = None,
                         tastes: dict | None = None) -> GameSpecDocument:
    """Render an engine instance as a canonical sef-kind document."""
    if outcome_label is None:
        outcome_label = {w: str(w) for w in sef.forest.outcomes}
    node_ids = {}
    for x in sorted_sets(sef.forest.nodes):
        node_ids[x] = f"n{len(node_ids):04d}"
    rm_ids = {m: f"m{k:04d}" for k, m in enumerate(sef.sdf.random_moves)}
    choice_ids = {
        agent: {c: f"c{k:04d}" for k, c in enumerate(sef.choices[agent])}
        for agent in sef.agents
    }
    data = {
        "kind": "sef",
        "agents": [str(a) for a in sef.agents],
        "scenarios": sorted(str(s) for s in sef.sdf.scenarios),
        "outcomes": [
            {"id": outcome_label[w], "scenario": str(sef.sdf.scenario_of[w])}
            for w in sef.forest.outcomes
        ],
        "nodes": {
            nid: sorted(outcome_label[w] for w in x)
            for x, nid in node_ids.items()
        },
        "random_moves": {
            rm_ids[m]: {str(s): node_ids[x] for s, x in m.items}
            for m in sef.sdf.random_moves
        },
        "eis": {
            str(a): {
                rm_ids[m]: sorted(
                    sorted(str(s) for s in b) for b in alg.blocks)
                for m, alg in sef.eis[a].items()
            }
            for a in sef.agents
        },
        "reference_choices": {
            str(a): {
                rm_ids[m]: sorted(
                    sorted(outcome_label[w] for w in c) for c in cs)
                for m, cs in sef.ref_choices[a].items()
            }
            for a in sef.agents
        },
        "choices": {
            str(a): {
                cid: sorted(outcome_label[w] for w in c)
                for c, cid in choice_ids[a].items()
            }
            for a in sef.agents
        },
    }
    if prior is not None and tastes is not None:
        data["preference"] = {
            "prior": {str(s): rational_to_string(p) for s, p in prior.items},
            "tastes": {
                str(a): {
                    outcome_label[w]: rational_to_string(v)
                    for w, v in tastes[a].items()
                }
                for a in sef.agents
            },
            "position_beliefs": None,
        }
    return GameSpecDocument(_canonical_document(data))


# ---------------------------------------------------------------------------
# Fixtures


def _simple_choice_tables():
    """The generated choice families of the two-scenario two-stage problem."""
    scen = ("w1", "w2")
    W = [(w, k, m) for w in scen for k in (1, 2) for m in (1, 2)]
    maps = [dict(zip(scen, vals))
            for vals in itertools.product((1, 2), repeat=2)]

    def c_fdot(f):
        return frozenset((w, k, m) for w, k, m in W if k == f[w])

    def c_kg(k, g):
        return frozenset((w, k2, m) for w, k2, m in W
                         if k2 == k and m == g[w])

    def c_dotg(g):
        return frozenset((w, k, m) for w, k, m in W if m == g[w])

    const = {k: {w: k for w in scen} for k in (1, 2)}
    first_const = [c_fdot(const[k]) for k in (1, 2)]
    first_all = [c_fdot(f) for f in maps]
    second = {
        "km": [c_kg(k, const[m]) for k in (1, 2) for m in (1, 2)],
        "dotm": [c_dotg(const[m]) for m in (1, 2)],
        "kg": [c_kg(k, g) for k in (1, 2) for g in maps],
        "dotg": [c_dotg(g) for g in maps],
        "1g2m": [c_kg(1, g) for g in maps] + [c_kg(2, const[m])
                                              for m in (1, 2)],
        "1m2g": [c_kg(1, const[m]) for m in (1, 2)] + [c_kg(2, g)
                                                       for g in maps],
    }
    return W, first_const, first_all, second, c_dotg, const


_SIMPLE_ROWS = {
    1: ("trivial", "trivial", "trivial", "const", "km"),
    2: ("trivial", "trivial", "trivial", "const", "dotm"),
    3: ("trivial", "powerset", "powerset", "const", "kg"),
    4: ("trivial", "powerset", "powerset", "const", "dotg"),
    5: ("trivial", "powerset", "trivial", "const", "1g2m"),
    6: ("trivial", "trivial", "powerset", "const", "1m2g"),
    7: ("powerset", "powerset", "powerset", "all", "kg"),
    8: ("powerset", "powerset", "powerset", "all", "dotg"),
}


def _alg_blocks(kind, carrier):
    carrier = sorted(carrier)
    if kind == "trivial":
        return [carrier]
    return [[s] for s in carrier]


def _simple_document(row: int) -> dict:
    if row not in _SIMPLE_ROWS:
        raise InvalidParam(f"row must be 1..8, got {row!r}")
    a0, a1, a2, first, second = _SIMPLE_ROWS[row]
    W, first_const, first_all, second_tables, c_dotg, const = \
        _simple_choice_tables()
    oid = {w: f"{w[0]}.{w[1]}.{w[2]}" for w in W}
    scen = ["w1", "w2"]
    nodes = {}
    for w in scen:
        nodes[f"x0.{w}"] = sorted(oid[o] for o in W if o[0] == w)
        for k in (1, 2):
            nodes[f"x{k}.{w}"] = sorted(
                oid[o] for o in W if o[0] == w and o[1] == k)
    for o in W:
        nodes[f"t.{oid[o]}"] = [oid[o]]
    rms = {
        "m0": {w: f"x0.{w}" for w in scen},
        "m1": {w: f"x1.{w}" for w in scen},
        "m2": {w: f"x2.{w}" for w in scen},
    }
    chosen = (first_const if first == "const" else first_all) + \
        second_tables[second]
    refs_first = first_const
    refs_second = [c_dotg(const[m]) for m in (1, 2)]
    cid = {}
    for c in sorted_sets(set(chosen)):
        cid.setdefault(c, f"c{len(cid):03d}")
    choices = {"i": {cid[c]: sorted(oid[o] for o in c) for c in cid}}

    def ref_list(cs):
        return sorted(sorted(oid[o] for o in c) for c in cs)
    return {
        "kind": "sef",
        "agents": ["i"],
        "scenarios": scen,
        "outcomes": [{"id": oid[o], "scenario": o[0]} for o in W],
        "nodes": nodes,
        "random_moves": rms,
        "eis": {"i": {
            "m0": _alg_blocks(a0, scen),
            "m1": _alg_blocks(a1, scen),
            "m2": _alg_blocks(a2, scen),
        }},
        "reference_choices": {"i": {
            "m0": ref_list(refs_first),
            "m1": ref_list(refs_second),
            "m2": ref_list(refs_second),
        }},
        "choices": choices,
    }


_VARIANT_ROWS = {
    1: ("trivial", "trivial", "km"),
    2: ("trivial", "powerset", "kg"),
    3: ("powerset", "powerset", "kg"),
}


def _variant_document(row: int) -> dict:
    if row not in _VARIANT_ROWS:
        raise InvalidParam(f"row must be 1..3, got {row!r}")
    a0, a1, second = _VARIANT_ROWS[row]
    scen = ("w1", "w2")
    W = [(w, k, m) for w in scen for k in (1, 2) for m in (1, 2)
         if not (w == "w1" and k == 2)] + [("w1", 2)]
    maps = [dict(zip(scen, vals))
            for vals in itertools.product((1, 2), repeat=2)]
    const = {k: {w: k for w in scen} for k in (1, 2)}

    def c_fdot(f):
        return frozenset(o for o in W if o[1] == f[o[0]])

    def c_kg(k, g):
        return frozenset(o for o in W
                         if len(o) == 3 and o[1] == k and o[2] == g[o[0]])

    def c_dotg(g):
        return frozenset(o for o in W if len(o) == 3 and o[2] == g[o[0]])

    first = [c_fdot(const[k]) for k in (1, 2)] if row < 3 \
        else [c_fdot(f) for f in maps]
    if second == "km":
        second_set = [c_kg(k, const[m]) for k in (1, 2) for m in (1, 2)]
    else:
        second_set = [c_kg(k, g) for k in (1, 2) for g in maps]
    refs_first = [c_fdot(const[k]) for k in (1, 2)]
    refs_second = [c_dotg(const[m]) for m in (1, 2)]

    oid = {o: ".".join(str(v) for v in o) for o in W}
    nodes = {}
    for w in scen:
        nodes[f"x0.{w}"] = sorted(oid[o] for o in W if o[0] == w)
        nodes[f"x1.{w}"] = sorted(
            oid[o] for o in W if o[0] == w and o[1] == 1)
    nodes["x2.w2"] = sorted(
        oid[o] for o in W if o[0] == "w2" and o[1] == 2)
    for o in W:
        nodes[f"t.{oid[o]}"] = [oid[o]]
    rms = {
        "m0": {w: f"x0.{w}" for w in scen},
        "m1": {w: f"x1.{w}" for w in scen},
        "m2": {"w2": "x2.w2"},
    }
    cid = {}
    for c in sorted_sets(set(first) | set(second_set)):
        cid.setdefault(c, f"c{len(cid):03d}")

    def ref_list(cs):
        return sorted(sorted(oid[o] for o in c) for c in cs)

    return {
        "kind": "sef",
        "agents": ["i"],
        "scenarios": list(scen),
        "outcomes": [{"id": oid[o], "scenario": o[0]} for o in W],
        "nodes": nodes,
        "random_moves": rms,
        "eis": {"i": {
            "m0": _alg_blocks(a0, scen),
            "m1": _alg_blocks(a1, scen),
            "m2": [["w2"]],
        }},
        "reference_choices": {"i": {
            "m0": ref_list(refs_first),
            "m1": ref_list(refs_second),
            "m2": ref_list(refs_second),
        }},
        "choices": {"i": {
            cid[c]: sorted(oid[o] for o in c) for c in cid
        }},
    }


def _absent_minded_document(n: int) -> dict:
    if not isinstance(n, int) or n < 1:
        raise InvalidParam(f"n must be a positive integer, got {n!r}")
    scen = [f"r{r}b{b1}{b2}" for r in (1, 2)
            for b1 in range(n) for b2 in range(n)]

    def rho(s):
        return int(s[1])

    def bucket(s, i):
        return int(s[3 + (i - 1)])

    symbols = ("D", "H", "M")
    W = [(s, v) for s in scen for v in symbols]
    oid = {o: f"{o[0]}.{o[1]}" for o in W}
    nodes = {}
    for k in (1, 2):
        for s in scen:
            members = symbols if rho(s) == k else ("H", "M")
            nodes[f"x{k}.{s}"] = sorted(oid[(s, v)] for v in members)
    for o in W:
        nodes[f"t.{oid[o]}"] = [oid[o]]
    rms = {f"m{k}": {s: f"x{k}.{s}" for s in scen} for k in (1, 2)}

    def exit_set(i):
        return frozenset(
            (s, v) for s, v in W
            if (rho(s) == i and v == "D") or (rho(s) == 3 - i and v == "H")
        )

    def continue_set(i):
        return frozenset(
            (s, v) for s, v in W
            if (rho(s) == i and v in ("H", "M"))
            or (rho(s) == 3 - i and v == "M")
        )

    choices, refs, eis = {}, {}, {}
    for i in (1, 2):
        agent = str(i)
        blocks = [[s for s in scen if bucket(s, i) == b] for b in range(n)]
        ex, ct = exit_set(i), continue_set(i)
        table = {}
        for r in range(n + 1):
            for combo in itertools.combinations(range(n), r):
                e = frozenset(
                    s for s in scen if bucket(s, i) in combo)
                c = frozenset(
                    o for o in ex if o[0] in e
                ) | frozenset(o for o in ct if o[0] not in e)
                table[f"e{''.join(str(b) for b in combo)}"] = sorted(
                    oid[o] for o in c)
        choices[agent] = table
        refs[agent] = {f"m{i}": sorted(
            [sorted(oid[o] for o in ex), sorted(oid[o] for o in ct)])}
        eis[agent] = {f"m{i}": sorted(sorted(b) for b in blocks)}
    weight = rational_to_string(Fraction(1, 2 * n * n))
    return {
        "kind": "sef",
        "agents": ["1", "2"],
        "scenarios": scen,
        "outcomes": [{"id": oid[o], "scenario": o[0]} for o in W],
        "nodes": nodes,
        "random_moves": rms,
        "eis": eis,
        "reference_choices": refs,
        "choices": choices,
        "preference": {
            "prior": {s: weight for s in scen},
            "tastes": {
                agent: {
                    oid[o]: rational_to_string(
                        {"D": 0, "H": 4, "M": 1}[o[1]])
                    for o in W
                }
                for agent in ("1", "2")
            },
            "position_beliefs": None,
        },
    }


def _pennies_document(case: int, p, n: int) -> dict:
    if case not in (1, 2, 3, 4):
        raise InvalidParam(f"case must be 1..4, got {case!r}")
    if not isinstance(n, int) or n < 1:
        raise InvalidParam(f"n must be a positive integer, got {n!r}")
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise InvalidParam(f"p must lie in [0, 1], got {p}")
    scen = [f"r{r}s{b0}{b1}{b2}" for r in (1, 2)
            for b0 in range(n) for b1 in range(n) for b2 in range(n)]

    def rho(s):
        return int(s[1])

    def bucket(s, k):
        return int(s[3 + k])

    paths = [
        {"scenario": s, "path": [[a, 1], [1, b]]}
        for s in scen for a in (1, 2) for b in (1, 2)
    ]
    # i acts at time 0 via its own factor; j at time 1.
    x1 = [[[1, 1]]]
    x2 = [[[2, 1]]]
    if case == 1:
        j_cells = [
            (x1, lambda s: (bucket(s, 1),)),
            (x2, lambda s: (bucket(s, 2),)),
        ]
    elif case == 2:
        j_cells = [(x1 + x2, lambda s: (bucket(s, 1), bucket(s, 2)))]
    elif case == 3:
        j_cells = [(x1 + x2,
                    lambda s: (rho(s), bucket(s, 1), bucket(s, 2)))]
    else:
        j_cells = [
            (x1, lambda s: (rho(s), bucket(s, 1))),
            (x2, lambda s: (bucket(s, 2),)),
        ]

    def partition(label):
        groups = {}
        for s in scen:
            groups.setdefault(label(s), []).append(s)
        return sorted(sorted(g) for g in groups.values())

    hist = {
        "i": [{"time": 0, "cell": [[]],
               "information": partition(lambda s: (bucket(s, 0),))}],
        "j": [{"time": 1, "cell": cell, "information": partition(label)}
              for cell, label in j_cells],
    }
    weights = {
        s: rational_to_string((p if rho(s) == 1 else 1 - p) / n ** 3)
        for s in scen
    }

    def u(s, a, b):
        return Fraction((-1) ** (rho(s) + a + b))

    tastes = {
        "i": [{"scenario": r["scenario"], "path": r["path"],
               "u": rational_to_string(-u(r["scenario"], r["path"][0][0],
                                          r["path"][1][1]))}
              for r in paths],
        "j": [{"scenario": r["scenario"], "path": r["path"],
               "u": rational_to_string(u(r["scenario"], r["path"][0][0],
                                         r["path"][1][1]))}
              for r in paths],
    }
    return {
        "kind": "action_path",
        "agents": ["i", "j"],
        "scenarios": scen,
        "time": [0, 1],
        "actions": {"i": [1, 2], "j": [1, 2]},
        "paths": paths,
        "histories": hist,
        "preference": {
            "prior": weights,
            "tastes": tastes,
            "position_beliefs": None,
        },
    }


def fixture(name: str, params: dict | None = None) -> GameSpecDocument:
    """A named, parameterized instance as a canonical document."""
    params = dict(params or {})
    try:
        if name == "simple":
            raw = _simple_document(int(params.pop("row", 1)))
        elif name == "simple_variant":
            raw = _variant_document(int(params.pop("row", 1)))
        elif name == "absent_minded":
            raw = _absent_minded_document(int(params.pop("n", 3)))
        elif name == "matching_pennies":
            raw = _pennies_document(int(params.pop("case", 1)),
                                    params.pop("p", Fraction(1, 2)),
                                    int(params.pop("n", 2)))
        else:
            raise UnknownFixture(f"unknown fixture {name!r}")
    except (TypeError, ValueError) as exc:
        raise InvalidParam(str(exc)) from exc
    if params:
        raise InvalidParam(f"unknown parameters: {sorted(params)}")
    return GameSpecDocument(_canonical_document(raw))


# ---------------------------------------------------------------------------
# CLI


def _read_input(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _write_output(path: str | None, payload: bytes):
    if path is None or path == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(payload)


def _emit_report(report_dict: dict, as_json: bool, text_lines):
    if as_json:
        print(json.dumps(report_dict, sort_keys=True, indent=2))
    else:
        for line in text_lines:
            print(line)


def _cmd_validate(args) -> int:
    bundle_doc = parse_spec(_read_input(args.spec))
    try:
        bundle = to_engine(bundle_doc)
    except EngineError as exc:
        _emit_report({"ok": False, "error": str(exc)}, args.json,
                     [f"build failed: {exc}"])
        return 2
    sdf_report = validate_sdf(bundle.sef.sdf)
    report = validate_axioms(bundle.sef, mode=args.mode)
    ok = sdf_report.ok and report.ok
    lines = [f"structure: {'PASS' if sdf_report.ok else 'FAIL'}"]
    lines += [str(f) for f in sdf_report.findings]
    for key in sorted(report.results):
        passed, reason = report.results[key]
        label = "Axiom " + key.replace("axiom", "").replace("p", "'") \
            if key.startswith("axiom") else key
        lines.append(
            f"{label}: {'PASS' if passed else 'FAIL'}"
            + (f" ({reason})" if reason else ""))
    _emit_report(
        {"ok": ok, "structure": sdf_report.to_dict(),
         "axioms": {k: {"ok": v[0], "reason": v[1]}
                    for k, v in report.results.items()}},
        args.json, lines)
    return 0 if ok else 2


def _cmd_info_sets(args) -> int:
    bundle = to_engine(parse_spec(_read_input(args.spec)))
    agents = [args.agent] if args.agent else list(bundle.sef.agents)
    out = {}
    for agent in agents:
        if agent not in bundle.sef.agents:
            raise InputInvalid(f"unknown agent {agent!r}")
        out[str(agent)] = [
            {
                "members": bundle.info_set_label(cell),
                "available": [bundle.label_of_choice(c)
                              for c in cell.available],
                "domain": sorted(str(s) for s in cell.domain),
            }
            for cell in info_sets(bundle.sef, agent)
        ]
    lines = []
    for agent, cells in sorted(out.items()):
        for k, cell in enumerate(cells):
            lines.append(
                f"{agent} #{k}: moves {cell['members']}, "
                f"{len(cell['available'])} choices, domain {cell['domain']}")
    _emit_report(out, args.json, lines)
    return 0


def _cmd_classify(args) -> int:
    bundle = to_engine(parse_spec(_read_input(args.spec)))
    result = classify_information(bundle.sef)
    _emit_report(result, args.json,
                 [f"{k}: {v}" for k, v in sorted(result.items())])
    return 0


def _cmd_truncate(args) -> int:
    bundle = to_engine(parse_spec(_read_input(args.spec)))
    if args.scenario not in {str(s) for s in bundle.sef.sdf.scenarios}:
        raise InputInvalid(f"unknown scenario {args.scenario!r}")
    sub = truncate(bundle.sef, args.scenario)
    doc = document_from_engine(
        sub, outcome_label={w: bundle.outcome_label[w]
                            for w in sub.forest.outcomes})
    _write_output(args.out, emit_spec(doc))
    return 0


def _cmd_wellposed(args) -> int:
    bundle = to_engine(parse_spec(_read_input(args.spec)))
    reports = {}
    if args.method in ("direct", "both"):
        reports["direct"] = wellposedness_direct(bundle.sef)
    if args.method in ("scenario", "both"):
        reports["scenario"] = wellposedness_by_scenarios(bundle.sef)
    ok = all(r.well_posed for r in reports.values())
    if args.method == "both":
        flags = {name: (r.attainability, r.existence, r.uniqueness)
                 for name, r in reports.items()}
        if len(set(flags.values())) != 1:
            raise EngineError("methods disagree on well-posedness")
    _emit_report(
        {name: r.to_dict() for name, r in reports.items()}, args.json,
        [f"{name}: {'well-posed' if r.well_posed else 'NOT well-posed'}"
         for name, r in sorted(reports.items())])
    return 0 if ok else 2


def _parse_profile(bundle: EngineBundle, payload) -> dict:
    label_to_outcome = {v: k for k, v in bundle.outcome_label.items()}
    profile = {}
    for rec in payload:
        agent = rec["agent"]
        if agent not in bundle.sef.agents:
            raise InputInvalid(f"unknown agent {agent!r}")
        cells = info_sets(bundle.sef, agent)
        given = [frozenset(label_to_outcome[w] for w in ws)
                 for ws in rec["choices"]]
        picks = []
        for cell in cells:
            hits = [c for c in given if c in cell.available]
            if len(hits) != 1:
                raise InputInvalid(
                    f"agent {agent!r}: need exactly one choice per info set")
            picks.append(hits[0])
        profile[agent] = strategy_from_choices(bundle.sef, agent, picks)
    if set(profile) != set(bundle.sef.agents):
        raise InputInvalid("profile must cover every agent")
    return profile


def _cmd_outcome(args) -> int:
    bundle = to_engine(parse_spec(_read_input(args.spec)))
    profile = _parse_profile(
        bundle, json.loads(_read_input(args.profile).decode("utf-8")))
    label_to_outcome = {v: k for k, v in bundle.outcome_label.items()}
    h_nodes = [
        frozenset(label_to_outcome[w] for w in ws)
        for ws in json.loads(_read_input(args.history).decode("utf-8"))
    ]
    for x in h_nodes:
        if x not in bundle.sef.forest.nodes:
            raise InputInvalid("history names an unknown node")
    h = closure(bundle.sef.forest, frozenset(h_nodes))
    w = induced_outcome(bundle.sef, profile, h)
    _emit_report({"outcome": bundle.outcome_label[w]}, args.json,
                 [bundle.outcome_label[w]])
    return 0


def _profile_json(bundle: EngineBundle, profile: dict) -> list:
    rows = []
    for agent in bundle.sef.agents:
        for cell, choice in profile[agent].assignment:
            rows.append({
                "agent": str(agent),
                "info_set": bundle.info_set_label(cell),
                "choice": bundle.label_of_choice(choice),
            })
    rows.sort(key=_jkey)
    return rows


def _cmd_equilibria(args) -> int:
    bundle = to_engine(parse_spec(_read_input(args.spec)))
    if bundle.prior is None:
        raise SchemaError("preference", "equilibria requires a preference "
                                        "section")
    tastes = bundle.taste_system()
    results = equilibrium_search(bundle.sef, tastes, bundle.prior)
    engine = PayoffEngine(bundle.sef)
    rows = []
    for profile, beliefs in results:
        payoffs = []
        for agent in bundle.sef.agents:
            for cell in info_sets(bundle.sef, agent):
                eu = EuStructure(beliefs, tastes)
                values = engine.expected_payoff(eu, profile, agent, cell)
                payoffs.append({
                    "agent": str(agent),
                    "info_set": bundle.info_set_label(cell),
                    "by_block": {
                        ",".join(sorted(str(s) for s in block)):
                            rational_to_string(v)
                        for block, v in values.items()
                    },
                })
        payoffs.sort(key=_jkey)
        rows.append({
            "profile": _profile_json(bundle, profile),
            "beliefs": sorted(
                ({
                    "agent": str(cell.agent),
                    "info_set": bundle.info_set_label(cell.cell),
                    "posterior": {
                        str(s): rational_to_string(v)
                        for s, v in cell.posterior.items
                    },
                    "unconstrained": cell.unconstrained,
                } for cell in beliefs.cells),
                key=_jkey),
            "payoffs": payoffs,
        })
    payload = (json.dumps({"equilibria": rows}, sort_keys=True, indent=2)
               + "\n").encode("utf-8")
    if args.out:
        _write_output(args.out, payload)
        if not args.json:
            print(f"{len(rows)} equilibria")
    else:
        if args.json:
            _write_output(None, payload)
        else:
            print(f"{len(rows)} equilibria")
    return 0


def _cmd_fixture(args) -> int:
    params = {}
    for item in args.param or []:
        if "=" not in item:
            raise InvalidParam(f"expected k=v, got {item!r}")
        k, v = item.split("=", 1)
        try:
            params[k] = int(v)
        except ValueError:
            try:
                params[k] = Fraction(v)
            except ValueError:
                params[k] = v
    doc = fixture(args.name, params)
    if args.emit:
        _write_output(args.out, emit_spec(doc))
    else:
        data = doc.to_dict()
        print(f"{args.name}: kind={data['kind']}, "
              f"agents={len(data['agents'])}, "
              f"scenarios={len(data['scenarios'])}")
    return 0


def _cmd_complete(args) -> int:
    bundle = to_engine(parse_spec(_read_input(args.spec)))
    completed = complete_choices(bundle.sef)
    doc = document_from_engine(completed, outcome_label=bundle.outcome_label)
    _write_output(args.out, emit_spec(doc))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sefkit",
        description="Validate, analyze, and solve finite stochastic "
                    "decision problems and games.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **spec_kw):
        p = sub.add_parser(name)
        p.set_defaults(fn=fn)
        p.add_argument("--json", action="store_true",
                       help="emit canonical JSON instead of text")
        if spec_kw.get("spec", True):
            p.add_argument("spec", nargs="?", default="-",
                           help="document file ('-' for stdin)")
        return p

    p = add("validate", _cmd_validate)
    p.add_argument("--mode", choices=("pseudo", "full"), default="full")
    p = add("info-sets", _cmd_info_sets)
    p.add_argument("--agent", default=None)
    add("classify", _cmd_classify)
    p = add("truncate", _cmd_truncate)
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", default=None)
    p = add("wellposed", _cmd_wellposed)
    p.add_argument("--method", choices=("direct", "scenario", "both"),
                   default="both")
    p = add("outcome", _cmd_outcome)
    p.add_argument("--profile", required=True)
    p.add_argument("--history", required=True)
    p = add("equilibria", _cmd_equilibria)
    p.add_argument("--out", default=None)
    p = add("fixture", _cmd_fixture, spec=False)
    p.add_argument("name")
    p.add_argument("--param", action="append", default=[])
    p.add_argument("--emit", action="store_true")
    p.add_argument("--out", default=None)
    p = add("complete", _cmd_complete)
    p.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.fn(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (UnknownFixture, InvalidParam) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"syntax error at position {exc.pos}: {exc.msg}",
              file=sys.stderr)
        return 2
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
