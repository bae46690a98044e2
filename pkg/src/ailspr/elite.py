"""Elite family, route pairing, relinking priorities and Path-Relinking."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .instance import NeighborData
from .perturb import best_insertion
from .search import LOCAL_SEARCH, NeighborhoodSearch, changed_routes
from .solution import EPS, Solution, sym_distance

# Route-state priority factors: states 1-3 describe the origin route before and
# after losing the vertex, states 4-6 the destination before and after
# receiving it.
STATE_FACTOR = {1: +1, 2: +1, 3: -1, 4: -1, 5: -1, 6: +1}

# Active states of the ten relinking criteria. C10 uses states {3, 5, 6}: with
# state 4 in place of 5 its priority column would contradict the reference
# priority values in six of nine rows.
CRITERIA = (
    frozenset({1, 3, 5}),
    frozenset({3}),
    frozenset({1, 3}),
    frozenset({1, 2, 3, 5}),
    frozenset({1, 2, 5}),
    frozenset({1, 2, 3}),
    frozenset({3, 5}),
    frozenset({2, 3, 5}),
    frozenset({2, 3}),
    frozenset({3, 5, 6}),
)


def origin_state(load_before: int, load_after: int, capacity: int) -> int:
    if load_before > capacity:
        return 1 if load_after <= capacity else 2
    return 3


def destination_state(load_before: int, load_after: int, capacity: int) -> int:
    if load_before > capacity:
        return 5
    return 4 if load_after > capacity else 6


def vertex_priority(origin: int, dest: int, criterion: int) -> int:
    """Priority of a (origin state, destination state) pair under a criterion (0-based)."""
    active = CRITERIA[criterion]
    p = 0
    if origin in active:
        p += STATE_FACTOR[origin]
    if dest in active:
        p += STATE_FACTOR[dest]
    return p


def priority_table() -> dict[tuple[int, int], list[int]]:
    return {
        (o, d): [vertex_priority(o, d, c) for c in range(len(CRITERIA))]
        for o in (1, 2, 3)
        for d in (4, 5, 6)
    }


# -- elite family ---------------------------------------------------------


@dataclass
class EliteFamily:
    """Feasible elite solutions grouped by route count."""

    sigma: int
    d_beta: float
    by_m: dict[int, list[Solution]] = field(default_factory=dict)

    def members(self, m: int) -> list[Solution]:
        return self.by_m.get(m, [])

    def __len__(self) -> int:
        return sum(len(v) for v in self.by_m.values())

    def update(self, s: Solution) -> bool:
        """Offer ``s`` to the family; returns True when it was stored."""
        m = s.m
        group = self.by_m.setdefault(m, [])
        f = s.objective
        d_beta = self.d_beta
        dists = [sym_distance(s, e) for e in group]
        if len(group) < self.sigma and all(d > d_beta for d in dists):
            group.append(s.copy())
            return True
        if not group:
            return False
        costs = [e.objective for e in group]
        worst = max(costs)
        if f > worst + EPS:
            return False
        if any(c < f - EPS and d <= d_beta for c, d in zip(costs, dists)):
            return False
        near_worse = [idx for idx, (c, d) in enumerate(zip(costs, dists)) if c >= f - EPS and d <= d_beta]
        if near_worse:
            drop = set(near_worse)
            group[:] = [e for idx, e in enumerate(group) if idx not in drop]
        else:
            # Member whose cost is closest above f; exists because f <= worst.
            above = [(c - f, idx) for idx, c in enumerate(costs) if c >= f - EPS]
            del group[min(above)[1]]
        group.append(s.copy())
        return True

    def check(self) -> None:
        for m, group in self.by_m.items():
            assert len(group) <= self.sigma, f"group {m} over capacity"
            for e in group:
                assert e.m == m, "route count mismatch"
                assert e.is_feasible(), "infeasible elite member"
            for a in range(len(group)):
                for b in range(a + 1, len(group)):
                    assert sym_distance(group[a], group[b]) > self.d_beta, "elite members too close"

    def to_json(self) -> str:
        out = {
            str(m): [
                {"cost": e.objective, "routes": [r[1:-1] for r in e.routes]}
                for e in sorted(group, key=lambda e: e.objective)
            ]
            for m, group in sorted(self.by_m.items())
        }
        return json.dumps(out, indent=1)


def elite_update(fam: EliteFamily, s: Solution) -> EliteFamily:
    fam.update(s)
    return fam


# -- route pairing --------------------------------------------------------


def pair_routes(s_i: Solution, s_g: Solution) -> list[int]:
    """Greedy maximum-overlap matching: ``result[k]`` is the guide route paired with route k.

    Pairs are fixed in decreasing order of shared customers; ties go to the
    lexicographically smallest (k, l).
    """
    m = s_i.m
    if s_g.m != m:
        raise ValueError("route counts differ")
    overlap = [[0] * m for _ in range(m)]
    gr = s_g.route_of
    for k, route in enumerate(s_i.routes):
        row = overlap[k]
        for v in route[1:-1]:
            row[gr[v]] += 1
    entries = sorted((-overlap[k][l], k, l) for k in range(m) for l in range(m))
    match = [-1] * m
    used_g = [False] * m
    left = m
    for _, k, l in entries:
        if match[k] < 0 and not used_g[l]:
            match[k] = l
            used_g[l] = True
            left -= 1
            if not left:
                break
    return match


# -- path relinking -------------------------------------------------------


@dataclass
class RelinkResult:
    best: Solution
    steps: int
    path_length: int
    improved: bool


def relink(s_init: Solution, s_guide: Solution, criterion: int) -> RelinkResult:
    """Walk from ``s_init`` toward ``s_guide`` and keep the best feasible intermediate."""
    inst = s_init.inst
    cap = inst.capacity
    demand = inst.demand
    dist = inst.dist
    match = pair_routes(s_init, s_guide)
    inverse_match = [0] * len(match)
    for k, l in enumerate(match):
        inverse_match[l] = k

    cur = s_init.copy()
    target = {}
    for k, route in enumerate(cur.routes):
        guide_route = match[k]
        for v in route[1:-1]:
            g = s_guide.route_of[v]
            if g != guide_route:
                target[v] = inverse_match[g]
    path_length = len(target)
    best = cur.copy()
    best_f = best.objective
    improved = False
    version = [0] * cur.m
    shift_cache: dict[int, tuple[int, int, float]] = {}

    steps = 0
    while target:
        top = None
        for v, dst in target.items():
            org = cur.route_of[v]
            lo = cur.loads[org]
            ld = cur.loads[dst]
            q = demand[v]
            p = vertex_priority(
                origin_state(lo, lo - q, cap), destination_state(ld, ld + q, cap), criterion
            )
            cached = shift_cache.get(v)
            if cached is not None and cached[0] == version[org] and cached[1] == version[dst]:
                cost = cached[2]
            else:
                route = cur.routes[org]
                pos = cur.pos_of[v]
                a, b = route[pos - 1], route[pos + 1]
                cost = dist[a][b] - dist[a][v] - dist[v][b] + best_insertion(cur, v, dst)[0]
                shift_cache[v] = (version[org], version[dst], cost)
            key = (-p, cost, v)
            if top is None or key < top:
                top = key
        v = top[2]
        dst = target.pop(v)
        org = cur.route_of[v]
        cur.remove_customer(v)
        _, pos = best_insertion(cur, v, dst)
        cur.insert_customer(v, dst, pos)
        version[org] += 1
        version[dst] += 1
        steps += 1
        f = cur.objective
        if f < best_f - EPS and all(load <= cap for load in cur.loads):
            best = cur.copy()
            best_f = f
            improved = True
    return RelinkResult(best=best, steps=steps, path_length=path_length, improved=improved)


def path_relinking(
    s: Solution,
    fam: EliteFamily,
    nd: NeighborData,
    rng: random.Random,
    searcher: NeighborhoodSearch | None = None,
) -> Solution:
    """Relink ``s`` with a random elite member of the same route count.

    Returns the best feasible solution met on the path after local search
    (``s`` itself when no elite partner exists). The result is offered to the
    elite family.
    """
    group = fam.members(s.m)
    if not group:
        return s
    partner = group[rng.randrange(len(group))]
    if rng.random() < 0.5:
        s_init, s_guide = s, partner
    else:
        s_init, s_guide = partner, s
    criterion = rng.randrange(len(CRITERIA))
    result = relink(s_init, s_guide, criterion)
    best = result.best
    if result.improved:
        best.prune_empty()
        if searcher is None:
            searcher = NeighborhoodSearch(nd)
        searcher.run(best, LOCAL_SEARCH, dirty=changed_routes(best, s_init))
        best.prune_empty()
    fam.update(best)
    return best


__all__ = [
    "CRITERIA",
    "STATE_FACTOR",
    "EliteFamily",
    "RelinkResult",
    "destination_state",
    "elite_update",
    "origin_state",
    "pair_routes",
    "path_relinking",
    "priority_table",
    "relink",
    "vertex_priority",
]

