"""Initial construction and the removal/insertion perturbation heuristics."""

from __future__ import annotations

import math
import random

from .instance import Instance, NeighborData, min_routes
from .solution import Solution, proximity_index

CONCENTRIC, PROXIMITY, SEQUENCE = 0, 1, 2
REMOVAL_HEURISTICS = (CONCENTRIC, PROXIMITY, SEQUENCE)
REMOVAL_NAMES = ("concentric", "proximity", "sequence")


def removal_count(omega: float) -> int:
    """Number of vertices a perturbation degree stands for (half rounds up)."""
    return max(1, int(math.floor(omega + 0.5)))


def best_insertion(s: Solution, v: int, r: int) -> tuple[float, int]:
    """Cheapest place for ``v`` in route ``r`` as (added cost, list index)."""
    route = s.routes[r]
    dist = s.inst.dist
    dv = dist[v]
    best = math.inf
    best_pos = 1
    a = route[0]
    for i in range(1, len(route)):
        b = route[i]
        c = dv[a] + dv[b] - dist[a][b]
        if c < best:
            best = c
            best_pos = i
        a = b
    return best, best_pos


def random_rho(s: Solution, rng: random.Random) -> int:
    return rng.randint(1, max(1, s.inst.n // max(1, s.m)))


def construct_initial(inst: Instance, nd: NeighborData, rng: random.Random) -> Solution:
    """Seed the minimum number of routes with random customers, place the rest by proximity.

    The result may overload routes; the feasibility search repairs it.
    """
    s = Solution(inst)
    pending = list(inst.customers)
    for _ in range(min(min_routes(inst), inst.n)):
        v = pending.pop(rng.randrange(len(pending)))
        s.add_route([v])
    rng.shuffle(pending)
    rho = random_rho(s, rng)
    insert_by_proximity(s, pending, rho, nd)
    return s


# -- removal heuristics ---------------------------------------------------


def _assigned(s: Solution) -> list[int]:
    return [v for route in s.routes for v in route[1:-1]]


def remove_concentric(s: Solution, pool: list[int], omega: float, nd: NeighborData, rng: random.Random) -> None:
    """Remove a random center and its nearest routed customers."""
    assigned = _assigned(s)
    if not assigned:
        return
    count = min(removal_count(omega), len(assigned))
    center = rng.choice(assigned)
    victims = [center]
    route_of = s.route_of
    for u in nd.order[center]:
        if len(victims) == count:
            break
        if u != 0 and route_of[u] != -1:
            victims.append(u)
    for v in victims:
        s.remove_customer(v)
        pool.append(v)


def proximity_rank_draw(size: int, rng: random.Random) -> int:
    """Draw a position o in [0, size) with P(o) = (2(size - o) - 1) / size**2."""
    o = int(size * (1.0 - math.sqrt(rng.random())))
    return min(o, size - 1)


def remove_by_proximity(
    s: Solution, pool: list[int], omega: float, rho: int, nd: NeighborData, rng: random.Random
) -> None:
    """Remove customers biased toward those loosely attached to their route."""
    assigned = _assigned(s)
    if not assigned:
        return
    count = min(removal_count(omega), len(assigned))
    scored = []
    for v in assigned:
        scored.append((-proximity_index(v, rho, s.routes[s.route_of[v]], nd), v))
    scored.sort()
    ranked = [v for _, v in scored]
    for _ in range(count):
        v = ranked.pop(proximity_rank_draw(len(ranked), rng))
        s.remove_customer(v)
        pool.append(v)


def remove_sequences(s: Solution, pool: list[int], omega: float, rng: random.Random) -> None:
    """Remove runs of consecutive customers; a run may wrap over the depot."""
    assigned = _assigned(s)
    if not assigned:
        return
    target = min(removal_count(omega), len(assigned))
    removed = 0
    max_len = max(1, s.inst.n // max(1, s.m))
    while removed < target:
        start = rng.choice(_assigned(s))
        length = rng.randint(1, max_len)
        cycle = s.routes[s.route_of[start]][:-1]
        i = cycle.index(start)
        window = []
        for step in range(min(length, len(cycle))):
            u = cycle[(i + step) % len(cycle)]
            if u != 0:
                window.append(u)
        for u in window:
            if removed == target:
                break
            s.remove_customer(u)
            pool.append(u)
            removed += 1


# -- insertion heuristics -------------------------------------------------


def insert_by_proximity(s: Solution, pool: list[int], rho: int, nd: NeighborData) -> None:
    """Put each pooled vertex into the route of lowest proximity index, at its cheapest slot.

    An empty route scores 0, so a freshly opened route is seeded by the next
    pooled vertex instead of staying empty.
    """
    if not s.routes:
        s.add_route()
    for v in pool:
        best_r = 0
        best_p = math.inf
        for r, route in enumerate(s.routes):
            p = 0.0 if len(route) == 2 else proximity_index(v, rho, route, nd)
            if p < best_p:
                best_p = p
                best_r = r
        _, pos = best_insertion(s, v, best_r)
        s.insert_customer(v, best_r, pos)
    pool.clear()


def insert_by_cost(s: Solution, pool: list[int]) -> None:
    """Put each pooled vertex at the cheapest (route, position) over the whole solution."""
    if not s.routes:
        s.add_route()
    for v in pool:
        best = math.inf
        best_r = best_pos = 0
        for r in range(len(s.routes)):
            c, pos = best_insertion(s, v, r)
            if c < best:
                best, best_r, best_pos = c, r, pos
        s.insert_customer(v, best_r, best_pos)
    pool.clear()


def perturb(
    ref: Solution,
    heuristic: int,
    omega: float,
    gamma: int,
    nd: NeighborData,
    rng: random.Random,
    lower_routes: int | None = None,
) -> Solution:
    """Return a perturbed copy of ``ref``; ``ref`` itself is left untouched."""
    s = ref.copy()
    inst = s.inst
    if lower_routes is None:
        lower_routes = min_routes(inst)
    pool: list[int] = []
    if rng.random() < 1.0 / gamma:
        if rng.random() < 0.5:
            if s.m - 1 >= lower_routes and s.m > 1:
                pool.extend(s.remove_route(rng.randrange(s.m)))
        elif s.m + 1 <= inst.n:
            s.add_route()
    rho = random_rho(s, rng)
    if heuristic == CONCENTRIC:
        remove_concentric(s, pool, omega, nd, rng)
    elif heuristic == PROXIMITY:
        remove_by_proximity(s, pool, omega, rho, nd, rng)
    elif heuristic == SEQUENCE:
        remove_sequences(s, pool, omega, rng)
    else:
        raise ValueError(f"unknown removal heuristic {heuristic}")
    if rng.random() < 0.5:
        insert_by_proximity(s, pool, rho, nd)
    else:
        insert_by_cost(s, pool)
    return s
