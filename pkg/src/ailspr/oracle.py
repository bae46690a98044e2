"""Exact brute-force CVRP solver for tiny instances, used as ground truth in tests."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .instance import Instance

MAX_CUSTOMERS = 8


@dataclass
class ExactResult:
    cost: float
    routes: list[list[int]]


def route_tsp(inst: Instance, customers: tuple[int, ...]) -> tuple[float, list[int]]:
    """Cheapest depot tour through ``customers`` by permutation scan.

    A tour and its reversal cost the same, so only orderings whose first
    customer is smaller than the last are tried.
    """
    d = inst.dist
    if len(customers) == 1:
        v = customers[0]
        return d[0][v] + d[v][0], [v]
    best = float("inf")
    best_order: list[int] = []
    for perm in itertools.permutations(customers):
        if perm[0] > perm[-1]:
            continue
        cost = d[0][perm[0]] + d[perm[-1]][0]
        for a, b in zip(perm, perm[1:]):
            cost += d[a][b]
        if cost < best:
            best = cost
            best_order = list(perm)
    return best, best_order


def set_partitions(items: list[int]):
    """Yield all set partitions of ``items`` via restricted-growth strings."""
    n = len(items)
    if n == 0:
        yield []
        return
    code = [0] * n
    peak = [0] * n  # peak[i] = max(code[:i + 1])
    while True:
        blocks: list[list[int]] = [[] for _ in range(peak[-1] + 1)]
        for item, c in zip(items, code):
            blocks[c].append(item)
        yield blocks
        # Advance to the next restricted-growth string.
        i = n - 1
        while i > 0 and code[i] > peak[i - 1]:
            i -= 1
        if i == 0:
            return
        code[i] += 1
        peak[i] = max(peak[i - 1], code[i])
        for t in range(i + 1, n):
            code[t] = 0
            peak[t] = peak[i]


def exact_solve(inst: Instance) -> ExactResult:
    if inst.n > MAX_CUSTOMERS:
        raise ValueError(f"exact solver refuses n={inst.n} (limit {MAX_CUSTOMERS})")
    cap = inst.capacity
    demand = inst.demand
    cache: dict[tuple[int, ...], tuple[float, list[int]] | None] = {}

    def block(b: list[int]):
        key = tuple(b)
        if key not in cache:
            if sum(demand[v] for v in b) > cap:
                cache[key] = None
            else:
                cache[key] = route_tsp(inst, key)
        return cache[key]

    best = float("inf")
    best_routes: list[list[int]] = []
    for blocks in set_partitions(list(inst.customers)):
        total = 0.0
        routes = []
        for b in blocks:
            res = block(b)
            if res is None:
                break
            total += res[0]
            routes.append(res[1])
            if total >= best:
                break
        else:
            if total < best:
                best = total
                best_routes = routes
    return ExactResult(cost=best, routes=best_routes)
