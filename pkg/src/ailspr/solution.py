"""Solutions as route lists with constant-time position lookup."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .instance import Instance, NeighborData

# Strict-improvement threshold; integer (rounded) costs are unaffected by it.
EPS = 1e-9


class Solution:
    """A set of routes, each stored as ``[0, c1, ..., ck, 0]``.

    ``route_of[v]`` and ``pos_of[v]`` locate customer ``v`` (``route_of`` is -1
    while a customer sits in a removal pool); ``pref[v]`` is the load picked up
    from the depot through ``v``. Loads and route costs are kept
    per route and recomputed whenever a route is touched, so the objective never
    drifts from a full recomputation.
    """

    __slots__ = ("inst", "routes", "loads", "costs", "route_of", "pos_of", "pref", "_edges")

    def __init__(self, inst: Instance, routes: Iterable[Sequence[int]] = ()):
        self.inst = inst
        size = inst.n + 1
        self.routes: list[list[int]] = []
        self.loads: list[int] = []
        self.costs: list[float] = []
        self.route_of = [-1] * size
        self.pos_of = [0] * size
        self.pref = [0] * size
        self._edges = None
        for r in routes:
            self.add_route(r)

    def copy(self) -> "Solution":
        other = Solution.__new__(Solution)
        other.inst = self.inst
        other.routes = [r[:] for r in self.routes]
        other.loads = self.loads[:]
        other.costs = self.costs[:]
        other.route_of = self.route_of[:]
        other.pos_of = self.pos_of[:]
        other.pref = self.pref[:]
        other._edges = self._edges
        return other

    # -- bookkeeping -----------------------------------------------------

    def refresh(self, r: int) -> None:
        """Recompute load, cost and positions of route ``r`` after a mutation."""
        route = self.routes[r]
        dist = self.inst.dist
        demand = self.inst.demand
        route_of = self.route_of
        pos_of = self.pos_of
        pref = self.pref
        load = 0
        cost = 0
        prev = 0
        for pos in range(1, len(route) - 1):
            v = route[pos]
            route_of[v] = r
            pos_of[v] = pos
            load += demand[v]
            pref[v] = load
            cost += dist[prev][v]
            prev = v
        cost += dist[prev][0]
        self.loads[r] = load
        self.costs[r] = cost
        self._edges = None

    def add_route(self, customers: Sequence[int] = ()) -> int:
        for v in customers:
            if self.route_of[v] != -1:
                raise ValueError(f"customer {v} already routed")
        self.routes.append([0, *customers, 0])
        self.loads.append(0)
        self.costs.append(0)
        r = len(self.routes) - 1
        self.refresh(r)
        return r

    def remove_route(self, r: int) -> list[int]:
        """Delete route ``r``; its customers become unassigned."""
        members = self.routes[r][1:-1]
        del self.routes[r]
        del self.loads[r]
        del self.costs[r]
        for v in members:
            self.route_of[v] = -1
        for q in range(r, len(self.routes)):
            for v in self.routes[q][1:-1]:
                self.route_of[v] = q
        self._edges = None
        return members

    def prune_empty(self) -> None:
        for r in range(len(self.routes) - 1, -1, -1):
            if len(self.routes[r]) == 2:
                self.remove_route(r)

    def remove_customer(self, v: int) -> None:
        r = self.route_of[v]
        del self.routes[r][self.pos_of[v]]
        self.route_of[v] = -1
        self.refresh(r)

    def insert_customer(self, v: int, r: int, pos: int) -> None:
        """Insert ``v`` into route ``r`` so that it ends up at list index ``pos``."""
        self.routes[r].insert(pos, v)
        self.refresh(r)

    # -- queries ---------------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.routes)

    @property
    def objective(self) -> float:
        return sum(self.costs)

    def slack(self, r: int) -> int:
        return self.inst.capacity - self.loads[r]

    def unassigned(self) -> list[int]:
        return [v for v in self.inst.customers if self.route_of[v] == -1]

    def is_complete(self) -> bool:
        return all(self.route_of[v] != -1 for v in self.inst.customers)

    def is_feasible(self) -> bool:
        return is_feasible(self)

    def edges(self) -> frozenset[int]:
        """Undirected edge set, each edge encoded as ``min*size + max``."""
        if self._edges is None:
            size = self.inst.n + 1
            out = set()
            for route in self.routes:
                for a, b in zip(route, route[1:]):
                    if a == b:
                        continue
                    out.add(a * size + b if a < b else b * size + a)
            self._edges = frozenset(out)
        return self._edges

    def signature(self) -> tuple[tuple[int, ...], ...]:
        """Routes as customer tuples, orientation- and order-independent."""
        out = []
        for route in self.routes:
            body = tuple(route[1:-1])
            if body:
                out.append(min(body, body[::-1]))
        return tuple(sorted(out))

    def recompute_objective(self) -> float:
        dist = self.inst.dist
        return sum(dist[a][b] for route in self.routes for a, b in zip(route, route[1:]))

    def audit(self) -> None:
        """Check every cached field against a full recomputation."""
        inst = self.inst
        seen = set()
        for r, route in enumerate(self.routes):
            assert route[0] == 0 and route[-1] == 0, f"route {r} does not start/end at depot"
            for pos, v in enumerate(route[1:-1], start=1):
                assert v != 0, f"depot inside route {r}"
                assert v not in seen, f"customer {v} repeated"
                seen.add(v)
                assert self.route_of[v] == r and self.pos_of[v] == pos, f"stale position for {v}"
            assert self.loads[r] == sum(inst.demand[v] for v in route), f"stale load on route {r}"
            cost = sum(inst.dist[a][b] for a, b in zip(route, route[1:]))
            assert math.isclose(self.costs[r], cost, rel_tol=0, abs_tol=1e-9), f"stale cost on route {r}"
        for v in inst.customers:
            if v not in seen:
                assert self.route_of[v] == -1, f"customer {v} marked routed but absent"

    def __repr__(self) -> str:
        return f"Solution(m={self.m}, cost={self.objective:g})"

    # -- serialization ---------------------------------------------------

    def to_sol(self) -> str:
        lines = []
        k = 0
        for route in self.routes:
            if len(route) > 2:
                k += 1
                lines.append(f"Route #{k}: " + " ".join(map(str, route[1:-1])))
        lines.append(f"Cost {format_cost(self.objective, self.inst.exact)}")
        return "\n".join(lines) + "\n"


def format_cost(f: float, exact: bool) -> str:
    return f"{f:.2f}" if exact else str(int(round(f)))


def parse_sol(text: str) -> tuple[list[list[int]], float | None]:
    """Read a CVRPLIB ``.sol`` file into customer lists and the stated cost."""
    routes = []
    cost = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.lower().startswith("route"):
            _, _, body = line.partition(":")
            try:
                routes.append([int(x) for x in body.split()])
            except ValueError:
                raise ValueError(f"line {lineno}: malformed route: {raw!r}") from None
        elif line.lower().startswith("cost"):
            try:
                cost = float(line.split()[1])
            except (IndexError, ValueError):
                raise ValueError(f"line {lineno}: malformed cost: {raw!r}") from None
    return routes, cost


def objective(s: Solution) -> float:
    return s.objective


def slack(route: Sequence[int], inst: Instance) -> int:
    return inst.capacity - sum(inst.demand[v] for v in route)


def is_feasible(s: Solution) -> bool:
    cap = s.inst.capacity
    return s.is_complete() and all(load <= cap for load in s.loads)


def sym_distance(a: Solution, b: Solution) -> int:
    """Size of the symmetric difference of the two undirected edge sets."""
    return len(a.edges() ^ b.edges())


def proximity_index(v: int, rho: int, route: Sequence[int], nd: NeighborData) -> float:
    """Mean of the ``rho`` smallest closeness ranks of ``route``'s customers to ``v``.

    ``route`` may be given with or without depot endpoints; ``v`` itself is
    excluded. Routes with no other customer get the worst score ``n``.
    """
    ranks = nd.rank[v]
    pi = [ranks[u] for u in route if u != 0 and u != v]
    if not pi:
        return float(len(ranks) - 1)
    a = min(rho, len(pi))
    if a == 1:
        return float(min(pi))
    pi.sort()
    return sum(pi[:a]) / a


def gap(f: float, bks: float) -> float:
    return 100.0 * (f - bks) / bks
