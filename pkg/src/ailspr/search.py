"""Granular neighborhood search: feasibility repair and local search.

Inter-route moves (Shift, Swap, 2-opt*) are scanned only between a vertex and
its granular neighbors. The depot is the first vertex of every route, so a
depot neighbor targets the head of every other route; empty routes have no
other vertex and are always offered as depot-slot targets.

The move list keeps at most one move per unordered route pair. Whenever a
route changes, every pair involving it is re-evaluated from both sides (via
the inverse neighbor lists), so the list always equals the result of a full
rescan. That is also what allows a search to start from a set of "dirty"
routes when the untouched ones are known to admit no qualifying move.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

from .instance import NeighborData
from .solution import EPS, Solution

SHIFT, SWAP, TWO_OPT_STAR = 0, 1, 2
MOVE_NAMES = ("Shift", "Swap", "2-opt*")

FEASIBILITY, LOCAL_SEARCH = 0, 1


class Move(NamedTuple):
    kind: int
    i: int  # route of the moved vertex
    k: int  # its position in route i (>= 1)
    j: int  # the other route
    l: int  # position of the partner vertex in route j (0 = depot slot)
    delta: float
    omega: float
    score: float


class InfeasibleSearchError(RuntimeError):
    """The feasibility search added more routes than there are customers."""


# -- move arithmetic ------------------------------------------------------


def delta_shift(s: Solution, i: int, k: int, j: int, l: int) -> float:
    d = s.inst.dist
    a, b = s.routes[i], s.routes[j]
    pv, v, nv = a[k - 1], a[k], a[k + 1]
    u, nu = b[l], b[l + 1]
    return d[pv][nv] + d[u][v] + d[v][nu] - d[pv][v] - d[v][nv] - d[u][nu]


def delta_swap(s: Solution, i: int, k: int, j: int, l: int) -> float:
    d = s.inst.dist
    a, b = s.routes[i], s.routes[j]
    pv, v, nv = a[k - 1], a[k], a[k + 1]
    pu, u, nu = b[l - 1], b[l], b[l + 1]
    return (
        d[pv][u] + d[u][nv] + d[pu][v] + d[v][nu]
        - d[pv][v] - d[v][nv] - d[pu][u] - d[u][nu]
    )


def delta_two_opt_star(s: Solution, i: int, k: int, j: int, l: int) -> float:
    d = s.inst.dist
    a, b = s.routes[i], s.routes[j]
    v, nv = a[k], a[k + 1]
    u, nu = b[l], b[l + 1]
    return d[u][nv] + d[v][nu] - d[v][nv] - d[u][nu]


_DELTAS = (delta_shift, delta_swap, delta_two_opt_star)


def _prefix_load(s: Solution, r: int, pos: int) -> int:
    demand = s.inst.demand
    return sum(demand[v] for v in s.routes[r][: pos + 1])


def new_loads(s: Solution, kind: int, i: int, k: int, j: int, l: int) -> tuple[int, int]:
    """Loads of routes i and j after the move, without applying it."""
    demand = s.inst.demand
    qi, qj = s.loads[i], s.loads[j]
    v = s.routes[i][k]
    if kind == SHIFT:
        return qi - demand[v], qj + demand[v]
    if kind == SWAP:
        u = s.routes[j][l]
        return qi - demand[v] + demand[u], qj - demand[u] + demand[v]
    head_i = _prefix_load(s, i, k)
    head_j = _prefix_load(s, j, l)
    return head_i + qj - head_j, head_j + qi - head_i


def feasibility_gain(s: Solution, kind: int, i: int, k: int, j: int, l: int) -> int:
    cap = s.inst.capacity
    ni, nj = new_loads(s, kind, i, k, j, l)
    before = min(0, cap - s.loads[i]) + min(0, cap - s.loads[j])
    return min(0, cap - ni) + min(0, cap - nj) - before


def move_score(delta: float, omega: float) -> float:
    return delta if delta <= 0 else delta / omega


def make_move(s: Solution, kind: int, i: int, k: int, j: int, l: int) -> Move:
    delta = _DELTAS[kind](s, i, k, j, l)
    omega = feasibility_gain(s, kind, i, k, j, l)
    score = move_score(delta, omega) if (delta <= 0 or omega > 0) else float("inf")
    return Move(kind, i, k, j, l, delta, omega, score)


def apply_move(s: Solution, move: Move) -> None:
    kind, i, k, j, l = move.kind, move.i, move.k, move.j, move.l
    a, b = s.routes[i], s.routes[j]
    if kind == SHIFT:
        v = a.pop(k)
        b.insert(l + 1, v)
    elif kind == SWAP:
        a[k], b[l] = b[l], a[k]
    else:
        tail_a = a[k + 1:]
        a[k + 1:] = b[l + 1:]
        b[l + 1:] = tail_a
    s.refresh(i)
    s.refresh(j)


# -- intra-route search ---------------------------------------------------


def best_intra_move(route: list[int], d) -> tuple[float, int, int, int]:
    """Best improving (Shift-, Swap-, 2-opt-) move in ``route`` as (delta, kind, a, b)."""
    best = (-EPS, -1, 0, 0)
    last = len(route) - 2
    bd = best[0]
    for a in range(1, last + 1):
        pa, x, na = route[a - 1], route[a], route[a + 1]
        dpx, dxn = d[pa][x], d[x][na]
        # 2-opt: reverse route[a..b]
        for b in range(a + 1, last + 1):
            y, nb = route[b], route[b + 1]
            delta = d[pa][y] + d[x][nb] - dpx - d[y][nb]
            if delta < bd:
                bd = delta
                best = (delta, TWO_OPT_STAR, a, b)
        # swap x with a later vertex
        for b in range(a + 2, last + 1):
            pb, y, nb = route[b - 1], route[b], route[b + 1]
            delta = (
                d[pa][y] + d[y][na] + d[pb][x] + d[x][nb]
                - dpx - dxn - d[pb][y] - d[y][nb]
            )
            if delta < bd:
                bd = delta
                best = (delta, SWAP, a, b)
        # shift x between route[t] and route[t + 1]
        gain = d[pa][na] - dpx - dxn
        dx = d[x]
        for t in range(0, last + 1):
            if t == a or t == a - 1:
                continue
            p, q = route[t], route[t + 1]
            delta = gain + dx[p] + dx[q] - d[p][q]
            if delta < bd:
                bd = delta
                best = (delta, SHIFT, a, t)
    return best


def apply_intra_move(route: list[int], kind: int, a: int, b: int) -> None:
    if kind == TWO_OPT_STAR:
        route[a:b + 1] = route[a:b + 1][::-1]
    elif kind == SWAP:
        route[a], route[b] = route[b], route[a]
    else:
        x = route.pop(a)
        route.insert(b + 1 if b < a else b, x)


def intra_route_search(s: Solution, r: int) -> bool:
    """Best-improvement descent inside route ``r``; returns True if it changed."""
    route = s.routes[r]
    if len(route) < 4:
        return False
    d = s.inst.dist
    changed = False
    while True:
        delta, kind, a, b = best_intra_move(route, d)
        if kind < 0:
            break
        apply_intra_move(route, kind, a, b)
        changed = True
    if changed:
        s.refresh(r)
    return changed


# -- neighborhood search --------------------------------------------------


class NeighborhoodSearch:
    """Feasibility repair and local search over the granular neighborhood."""

    def __init__(self, nd: NeighborData, backend: str = "numba"):
        if backend not in ("numba", "python"):
            raise ValueError(f"unknown backend {backend!r}")
        self.nd = nd
        self.near = nd.near
        self.inverse = nd.inverse
        self.backend = backend
        self._arrays = None

    # Evaluating all three kinds for one (vertex, slot) pair is the hot loop of
    # the whole solver, hence the long inlined body.
    def _evaluate(self, s, lm, mode, i, k, j, l, pair_base):
        d = s.inst.dist
        demand = s.inst.demand
        cap = s.inst.capacity
        a = s.routes[i]
        b = s.routes[j]
        qi = s.loads[i]
        qj = s.loads[j]
        si = cap - qi
        sj = cap - qj
        if mode == FEASIBILITY and (si >= 0) == (sj >= 0):
            return
        before = (si if si < 0 else 0) + (sj if sj < 0 else 0)
        key = i * pair_base + j if i < j else j * pair_base + i
        cur = lm.get(key)
        best = cur.score if cur is not None else float("inf")
        found = None

        pv, v, nv = a[k - 1], a[k], a[k + 1]
        u, nu = b[l], b[l + 1]
        dv = d[v]
        dvv = dv[pv] + dv[nv]
        qv = demand[v]

        # Shift v between u and its successor.
        delta = d[pv][nv] + dv[u] + dv[nu] - dvv - d[u][nu]
        x, y = si + qv, sj - qv
        omega = (x if x < 0 else 0) + (y if y < 0 else 0) - before
        if mode == FEASIBILITY:
            if omega > 0:
                score = delta if delta <= 0 else delta / omega
                if score < best:
                    best, found = score, (SHIFT, delta, omega)
        elif omega >= 0 and delta < -EPS and delta < best:
            best, found = delta, (SHIFT, delta, omega)

        # Swap v and u.
        if l > 0:
            pu = b[l - 1]
            du = d[u]
            qu = demand[u]
            delta = du[pv] + du[nv] + dv[pu] + dv[nu] - dvv - du[pu] - du[nu]
            x, y = si + qv - qu, sj - qv + qu
            omega = (x if x < 0 else 0) + (y if y < 0 else 0) - before
            if mode == FEASIBILITY:
                if omega > 0:
                    score = delta if delta <= 0 else delta / omega
                    if score < best:
                        best, found = score, (SWAP, delta, omega)
            elif omega >= 0 and delta < -EPS and delta < best:
                best, found = delta, (SWAP, delta, omega)

        # 2-opt*: exchange the tails after v and after u.
        delta = d[u][nv] + dv[nu] - dv[nv] - d[u][nu]
        if mode == FEASIBILITY or delta < -EPS:
            pref = s.pref
            head_i = pref[v]
            head_j = pref[u] if l > 0 else 0
            x = cap - (head_i + qj - head_j)
            y = cap - (head_j + qi - head_i)
            omega = (x if x < 0 else 0) + (y if y < 0 else 0) - before
            if mode == FEASIBILITY:
                if omega > 0:
                    score = delta if delta <= 0 else delta / omega
                    if score < best:
                        best, found = score, (TWO_OPT_STAR, delta, omega)
            elif omega >= 0 and delta < best:
                best, found = delta, (TWO_OPT_STAR, delta, omega)

        if found is not None:
            kind, delta, omega = found
            lm[key] = Move(kind, i, k, j, l, delta, omega, best)

    def _scan_vertex(self, s, lm, mode, v, only=-1):
        """Evaluate moves of customer ``v`` toward its neighbors' routes.

        With ``only`` >= 0 just the slots inside that route are evaluated.
        """
        route_of = s.route_of
        pos_of = s.pos_of
        i = route_of[v]
        k = pos_of[v]
        base = s.inst.n + 2
        depot = False
        for u in self.near[v]:
            if u == 0:
                depot = True
                continue
            j = route_of[u]
            if j == i or j < 0 or (only >= 0 and j != only):
                continue
            self._evaluate(s, lm, mode, i, k, j, pos_of[u], base)
        if only >= 0:
            if only != i and (depot or len(s.routes[only]) == 2):
                self._evaluate(s, lm, mode, i, k, only, 0, base)
            return
        routes = s.routes
        for j in range(len(routes)):
            if j != i and (depot or len(routes[j]) == 2):
                self._evaluate(s, lm, mode, i, k, j, 0, base)

    def update(self, s: Solution, lm: dict, mode: int, r: int, reverse: bool = True) -> None:
        """Re-evaluate moves of route ``r``; with ``reverse`` also moves into it."""
        route = s.routes[r]
        for k in range(1, len(route) - 1):
            self._scan_vertex(s, lm, mode, route[k])
        if not reverse:
            return
        route_of = s.route_of
        if len(route) == 2:
            candidates = [v for v in s.inst.customers if route_of[v] >= 0]
        else:
            inverse = self.inverse
            found = set(inverse[0])
            for u in route[1:-1]:
                found.update(inverse[u])
            candidates = sorted(found)
        for w in candidates:
            if w != 0 and route_of[w] != r and route_of[w] >= 0:
                self._scan_vertex(s, lm, mode, w, only=r)

    def build_lm(self, s: Solution, mode: int, dirty: Iterable[int] | None = None) -> dict:
        lm: dict = {}
        if dirty is None:
            for r in range(len(s.routes)):
                self.update(s, lm, mode, r, reverse=False)
        else:
            for r in sorted(set(dirty)):
                self.update(s, lm, mode, r, reverse=True)
        return lm

    def run(self, s: Solution, mode: int, dirty: Iterable[int] | None = None) -> Solution:
        """Search ``s`` in place and return it.

        ``dirty`` restricts the initial scan to the given routes; it is only
        valid when no qualifying move exists between two other routes.
        """
        if not s.routes:
            s.add_route()
        if mode == FEASIBILITY and all(load <= s.inst.capacity for load in s.loads):
            return s
        if self.backend == "numba":
            return self._run_compiled(s, mode, dirty)
        lm = self.build_lm(s, mode, dirty)
        added = 0
        while True:
            while lm:
                move = lm[min(lm, key=lambda key: (lm[key].score, key))]
                apply_move(s, move)
                i, j = move.i, move.j
                for key in [key for key, mv in lm.items() if mv.i in (i, j) or mv.j in (i, j)]:
                    del lm[key]
                intra_route_search(s, i)
                intra_route_search(s, j)
                self.update(s, lm, mode, i)
                self.update(s, lm, mode, j)
            if mode == LOCAL_SEARCH or all(load <= s.inst.capacity for load in s.loads):
                return s
            added += 1
            if added > s.inst.n:
                raise InfeasibleSearchError("feasibility search did not converge")
            r = s.add_route()
            self.update(s, lm, mode, r)

    def _prepare(self, inst):
        import numpy as np

        n = inst.n
        nd = self.nd
        ptr = np.zeros(n + 2, np.int64)
        for u, rows in enumerate(nd.inverse):
            ptr[u + 1] = ptr[u] + len(rows)
        return {
            "d": np.array(inst.dist, dtype=np.float64),
            "demand": np.array(inst.demand, dtype=np.int64),
            "near": np.array(nd.near, dtype=np.int64).reshape(n + 1, -1),
            "inv_ptr": ptr,
            "inv_idx": np.array([w for rows in nd.inverse for w in rows], dtype=np.int64),
            "R": np.zeros((2 * n + 4, n + 2), dtype=np.int64),
            "rlen": np.zeros(2 * n + 4, dtype=np.int64),
            "loads": np.zeros(2 * n + 4, dtype=np.int64),
        }

    def _run_compiled(self, s: Solution, mode: int, dirty) -> Solution:
        import numpy as np

        from . import _kernel

        if self._arrays is None:
            self._arrays = self._prepare(s.inst)
        arr = self._arrays
        R, rlen, loads = arr["R"], arr["rlen"], arr["loads"]
        m = s.m
        for r, route in enumerate(s.routes):
            R[r, : len(route)] = route
            rlen[r] = len(route)
            loads[r] = s.loads[r]
        route_of = np.array(s.route_of, dtype=np.int64)
        pos_of = np.array(s.pos_of, dtype=np.int64)
        pref = np.array(s.pref, dtype=np.int64)
        full = dirty is None
        dirty_arr = np.array(sorted(set(dirty or ())), dtype=np.int64)
        m = _kernel.search(
            R, rlen, m, route_of, pos_of, pref, loads, arr["d"], arr["demand"],
            s.inst.capacity, arr["near"], arr["inv_ptr"], arr["inv_idx"], mode, dirty_arr, full,
        )
        if m < 0:
            raise InfeasibleSearchError("feasibility search did not converge")
        s.routes = [R[r, : rlen[r]].tolist() for r in range(m)]
        s.loads = [0] * m
        s.costs = [0] * m
        for r in range(m):
            s.refresh(r)
        return s


def neighborhood_search(s: Solution, mode: int, nd: NeighborData, dirty=None) -> Solution:
    return NeighborhoodSearch(nd).run(s, mode, dirty)


def update_lm(s: Solution, r: int, lm: dict, mode: int, nd: NeighborData) -> dict:
    """Add the best move per route pair involving route ``r`` to ``lm``."""
    NeighborhoodSearch(nd).update(s, lm, mode, r, reverse=True)
    return lm


def changed_routes(s: Solution, ref: Solution) -> list[int]:
    """Indices of routes in ``s`` that do not appear verbatim in ``ref``."""
    known = {tuple(route) for route in ref.routes}
    return [r for r, route in enumerate(s.routes) if tuple(route) not in known]
