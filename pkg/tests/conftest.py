"""Shared test fixtures: named instances and a seed-fixed random pool.

The random pool generates small action-path instances (1-2 agents, 1-2
periods, 2-3 scenarios, small factors) whose validity is guaranteed by
construction.  At each period an agent is either "active" (its full factor
set is available after every realized prefix) or "passive" (a single,
possibly scenario-dependent, action).  This keeps every factor cylinder a
legitimate choice wherever the agent diverges, while scenario-dependent
passive actions still let the scenario trees separate.  History cells are
singleton prefixes and the exogenous information at each cell is a random
partition of the cell's domain.
"""

import itertools
import random

import pytest

from sefkit import PartitionAlgebra
from sefkit.action_path import ApData, ApSefData, build_sef
from sefkit import game_io


POOL_SEED = 20260826
POOL_SIZE = 500


def _random_partition(rng, carrier):
    carrier = sorted(carrier)
    style = rng.choice(["trivial", "powerset", "split"])
    if style == "trivial" or len(carrier) == 1:
        return PartitionAlgebra.trivial(carrier)
    if style == "powerset":
        return PartitionAlgebra.powerset(carrier)
    cut = rng.randrange(1, len(carrier))
    shuffled = carrier[:]
    rng.shuffle(shuffled)
    return PartitionAlgebra(carrier, [shuffled[:cut], shuffled[cut:]])


def random_ap_build(rng):
    """One random, always-valid action-path build of bounded size."""
    while True:
        build = _random_ap_build_once(rng)
        n_choices = sum(len(cs) for cs in build.sef.choices.values())
        if len(build.sef.forest.outcomes) <= 20 and n_choices <= 40:
            return build


def _random_ap_build_once(rng):
    n_agents = rng.choice([1, 1, 2])
    agents = ["a", "b"][:n_agents]
    factors = {i: list(range(1, rng.choice([2, 2, 3]) + 1)) for i in agents}
    n_scen = rng.choice([2, 2, 3])
    scenarios = [f"s{k}" for k in range(n_scen)]
    horizon = rng.choice([1, 2, 2])
    times = list(range(horizon))

    active = {(i, k): rng.random() < 0.7 for i in agents for k in times}
    for k in times:
        if not any(active[(i, k)] for i in agents):
            active[(rng.choice(agents), k)] = True
    # Passive actions before the last period must not depend on the
    # scenario, otherwise scenario trees would separate without passing
    # through a shared branch point.
    passive = {
        (i, k): rng.choice(factors[i])
        for i in agents for k in times[:-1] if not active[(i, k)]
    }

    def node_profiles(s, k):
        subs = []
        for i in agents:
            if active[(i, k)]:
                subs.append(list(factors[i]))
            elif k < horizon - 1:
                subs.append([passive[(i, k)]])
            else:
                subs.append([rng.choice(factors[i])])
        return list(itertools.product(*subs))

    # Optionally kill one scenario's branching below one shared time-0
    # branch, so domains of later cells become proper scenario subsets.
    dead = None
    if horizon == 2 and n_scen >= 2 and rng.random() < 0.4:
        first = node_profiles(scenarios[0], 0)
        dead = (rng.choice(scenarios), rng.choice(first))

    outcomes = []
    for s in scenarios:
        for q in node_profiles(s, 0):
            if horizon == 1:
                outcomes.append((s, (q,)))
                continue
            second = node_profiles(s, 1)
            if dead == (s, q):
                second = [rng.choice(second)]
            outcomes.extend((s, (q, r)) for r in second)
    data = ApData(agents, factors, times, outcomes)

    hist, eis = {}, {}
    for i in agents:
        per_time = {}
        cell_alg = {}
        for k, t in enumerate(times):
            cells = tuple(
                frozenset({prefix}) for prefix in data.realized_prefixes(k)
                if data.d_set_agent(i, prefix)
            )
            per_time[t] = cells
            for cell in cells:
                dom = data.d_set(next(iter(cell)))
                if dom:
                    cell_alg[(t, cell)] = _random_partition(rng, dom)
                else:
                    cell_alg[(t, cell)] = PartitionAlgebra.trivial(dom)
        hist[i] = per_time
        eis[i] = cell_alg
    return build_sef(ApSefData(data, hist, eis))


@pytest.fixture(scope="session")
def ap_pool():
    rng = random.Random(POOL_SEED)
    return [random_ap_build(rng) for _ in range(POOL_SIZE)]


@pytest.fixture(scope="session")
def simple_bundles():
    return {row: game_io.to_engine(game_io.fixture("simple", {"row": row}))
            for row in range(1, 9)}


@pytest.fixture(scope="session")
def variant_bundles():
    return {
        row: game_io.to_engine(game_io.fixture("simple_variant", {"row": row}))
        for row in range(1, 4)
    }
