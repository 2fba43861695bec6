"""Shared plumbing: reports, budgets, canonical orderings, error types.

Everything in the engine works with plain hashable identifiers for outcomes
and scenarios (strings, ints, or nested tuples of those).  Determinism is
guaranteed by sorting every emitted collection with the canonical keys below
rather than relying on hash order.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field


# ---------------------------------------------------------------------------
# Canonical ordering of heterogeneous identifiers


_ATOM_KEY_CACHE = {}


def atom_key(value):
    """Total-order key for heterogeneous hashable identifiers.

    Supports ints, strings, booleans and (nested) tuples thereof; anything
    else falls back to its repr.  Values of different shapes compare by a
    kind tag first, so mixed collections still sort deterministically.
    """
    try:
        return _ATOM_KEY_CACHE[value]
    except KeyError:
        key = _atom_key(value)
        _ATOM_KEY_CACHE[value] = key
        return key
    except TypeError:
        return _atom_key(value)


def _atom_key(value):
    if isinstance(value, bool):
        return ("bool", (int(value),))
    if isinstance(value, int):
        return ("int", (value,))
    if isinstance(value, str):
        return ("str", (value,))
    if isinstance(value, tuple):
        return ("tuple", tuple(atom_key(v) for v in value))
    if isinstance(value, frozenset):
        return ("set", tuple(sorted(atom_key(v) for v in value)))
    return ("repr", (repr(value),))


def set_key(values):
    """Canonical key for a set of identifiers."""
    return tuple(sorted(atom_key(v) for v in values))


def node_key(node):
    """Canonical key for a node (outcome set): size first, then contents.

    Under reverse inclusion, larger nodes sit closer to the root; sorting by
    (size, contents) makes terminal nodes come first and is stable across
    runs.
    """
    return (len(node), set_key(node))


def sorted_atoms(values):
    return sorted(values, key=atom_key)


def sorted_sets(sets):
    return sorted(sets, key=set_key)


def sorted_nodes(nodes):
    return sorted(nodes, key=node_key)


# ---------------------------------------------------------------------------
# Error types


class EngineError(Exception):
    """Base class for all engine errors."""


class PreconditionViolated(EngineError):
    """An operation was called on data violating its stated preconditions."""


class NotWellPosed(EngineError):
    """Operation requires a well-posed instance."""


class NotOrderConsistent(EngineError):
    """Operation requires an order-consistent family of random moves."""


class NotClosed(EngineError):
    """The given (random) history is not closed."""


class NoCompatibleOutcome(EngineError):
    """No outcome is compatible with the given profile and history."""


class MultipleCompatibleOutcomes(EngineError):
    """More than one outcome is compatible with the profile and history."""


class InputInvalid(EngineError):
    """Structured input failed validation."""


class BudgetExceeded(EngineError):
    """An enumeration exceeded its configured budget."""

    def __init__(self, kind: str, needed: int, limit: int):
        super().__init__(
            f"enumeration budget exceeded: {kind} needs {needed} > limit {limit}"
        )
        self.kind = kind
        self.needed = needed
        self.limit = limit


# ---------------------------------------------------------------------------
# Budgets

DEFAULT_BUDGETS = {
    "histories": 10**6,
    "strategies": 10**7,
    "pairs": 10**7,
    "chains": 10**6,
    "choices": 10**7,
}


def budget_limit(kind: str) -> int:
    """Budget for an enumeration kind; env var SEF_BUDGET overrides all."""
    env = os.environ.get("SEF_BUDGET")
    if env:
        return int(env)
    return DEFAULT_BUDGETS[kind]


def charge_budget(kind: str, needed: int) -> None:
    limit = budget_limit(kind)
    if needed > limit:
        raise BudgetExceeded(kind, needed, limit)


# ---------------------------------------------------------------------------
# Validation reports


@dataclass(frozen=True)
class Finding:
    """A single validation finding: an error code plus a witness message."""

    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


@dataclass
class ValidationReport:
    """Accumulates findings; empty report means the check passed."""

    findings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def add(self, code: str, message: str) -> None:
        self.findings.append(Finding(code, message))

    def merge(self, other: "ValidationReport") -> None:
        self.findings.extend(other.findings)

    def codes(self):
        return [f.code for f in self.findings]

    def first(self, code: str):
        for f in self.findings:
            if f.code == code:
                return f
        return None

    def to_dict(self):
        return {
            "ok": self.ok,
            "findings": [{"code": f.code, "message": f.message} for f in self.findings],
        }

    def __str__(self):
        if self.ok:
            return "OK"
        return "\n".join(str(f) for f in self.findings)
