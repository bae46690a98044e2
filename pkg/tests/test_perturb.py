import random
from collections import Counter

from ailspr.instance import Instance, build_neighbors, min_routes, random_instance
from ailspr.perturb import (
    CONCENTRIC,
    PROXIMITY,
    SEQUENCE,
    best_insertion,
    construct_initial,
    insert_by_cost,
    insert_by_proximity,
    perturb,
    proximity_rank_draw,
    remove_by_proximity,
    remove_concentric,
    remove_sequences,
    removal_count,
)
from ailspr.search import FEASIBILITY, LOCAL_SEARCH, NeighborhoodSearch
from ailspr.solution import Solution, sym_distance


class ScriptedRng(random.Random):
    """Random whose choice/randint return scripted values."""

    def __init__(self, choices=(), ints=()):
        super().__init__(0)
        self._choices = list(choices)
        self._ints = list(ints)

    def choice(self, seq):
        v = self._choices.pop(0)
        assert v in seq
        return v

    def randint(self, a, b):
        v = self._ints.pop(0)
        assert a <= v <= b
        return v


def collinear(n=8):
    coords = [(0.0, 0.0)] + [(float(10 * i), 5.0) for i in range(1, n + 1)]
    return Instance("col", coords, [0] + [1] * n, n)


def test_removal_count_rounding():
    assert removal_count(0.2) == 1
    assert removal_count(2.5) == 3
    assert removal_count(2.49) == 2


def test_construct_small_cases():
    inst = Instance("two", [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], [0, 1, 1], 5)
    s = construct_initial(inst, build_neighbors(inst, 2), random.Random(0))
    assert s.m == 1 and sorted(s.routes[0][1:-1]) == [1, 2]
    inst = Instance("six", [(float(i), 0.0) for i in range(7)], [0] + [3] * 6, 10)
    assert min_routes(inst) == 2
    s = construct_initial(inst, build_neighbors(inst, 3), random.Random(4))
    assert s.m == 2 and s.is_complete()
    s.audit()


def test_construct_deterministic():
    inst = random_instance(20, random.Random(1))
    nd = build_neighbors(inst, 6)
    a = construct_initial(inst, nd, random.Random(42))
    b = construct_initial(inst, nd, random.Random(42))
    assert a.routes == b.routes
    assert a.m == min_routes(inst)


def test_concentric_single_and_geometry():
    inst = collinear()
    nd = build_neighbors(inst, 8)
    s = Solution(inst, [[1, 2, 3, 4], [5, 6, 7, 8]])
    pool = []
    remove_concentric(s, pool, 1, nd, ScriptedRng(choices=[3]))
    assert pool == [3]
    s = Solution(inst, [[1, 2, 3, 4], [5, 6, 7, 8]])
    pool = []
    remove_concentric(s, pool, 3, nd, ScriptedRng(choices=[1]))
    assert pool == [1, 2, 3]


def test_concentric_matches_distance_order():
    rng = random.Random(5)
    inst = random_instance(30, rng)
    nd = build_neighbors(inst, 10)
    s = construct_initial(inst, nd, rng)
    pool = []
    remove_concentric(s, pool, 5, nd, random.Random(8))
    center = pool[0]
    others = sorted((inst.dist[center][u], u) for u in inst.customers if u != center)
    assert pool[1:] == [u for _, u in others[:4]]
    s.audit()


def test_proximity_draw_probabilities():
    assert abs(sum((2 * (4 - o) - 1) / 16 for o in range(4)) - 1) < 1e-12
    rng = random.Random(123)
    draws = 100_000
    counts = Counter(proximity_rank_draw(4, rng) for _ in range(draws))
    expected = [draws * (2 * (4 - o) - 1) / 16 for o in range(4)]
    chi2 = sum((counts[o] - e) ** 2 / e for o, e in enumerate(expected))
    assert chi2 < 16.27  # chi-square, 3 degrees of freedom, p = 0.001
    assert proximity_rank_draw(1, rng) == 0


def test_remove_by_proximity_count():
    rng = random.Random(3)
    inst = random_instance(25, rng)
    nd = build_neighbors(inst, 10)
    s = construct_initial(inst, nd, rng)
    pool = []
    remove_by_proximity(s, pool, 6, 3, nd, rng)
    assert len(pool) == len(set(pool)) == 6
    assert all(s.route_of[v] == -1 for v in pool)
    s.audit()


def test_sequence_window_wraps_over_depot():
    inst = random_instance(11, random.Random(0))
    s = Solution(inst, [[2, 6, 8, 11], [1, 3, 4, 5, 7, 9, 10]])
    pool = []
    remove_sequences(s, pool, 3, ScriptedRng(choices=[8], ints=[4]))
    assert sorted(pool) == [2, 8, 11]
    assert s.routes[0] == [0, 6, 0]


def test_sequence_single_and_total():
    rng = random.Random(2)
    inst = random_instance(20, rng)
    s = construct_initial(inst, build_neighbors(inst, 5), rng)
    pool = []
    remove_sequences(s, pool, 1, rng)
    assert len(pool) == 1
    for omega in (2, 5, 7.6):
        s2 = s.copy()
        pool = []
        remove_sequences(s2, pool, omega, random.Random(int(omega * 10)))
        assert len(pool) == removal_count(omega)


def test_best_insertion_brute():
    rng = random.Random(4)
    inst = random_instance(10, rng)
    s = Solution(inst, [[1, 2, 3, 4, 5]])
    d = inst.dist
    for v in (6, 7, 8):
        cost, pos = best_insertion(s, v, 0)
        route = s.routes[0]
        brute = min((d[route[i - 1]][v] + d[v][route[i]] - d[route[i - 1]][route[i]], i) for i in range(1, len(route)))
        assert (cost, pos) == brute


def test_insert_by_proximity_forced_route():
    inst = collinear()
    nd = build_neighbors(inst, 8)
    s = Solution(inst, [[1, 2, 3], [6, 7, 8]])
    insert_by_proximity(s, [4], 3, nd)
    assert s.route_of[4] == 0
    insert_by_proximity(s, [], 3, nd)
    s.audit()


def test_insert_by_proximity_seeds_empty_route():
    inst = collinear()
    nd = build_neighbors(inst, 8)
    s = Solution(inst, [[1, 2, 3], [4, 5, 6], []])
    insert_by_proximity(s, [7, 8], 2, nd)
    assert s.routes[2] == [0, 7, 8, 0] or s.routes[2] == [0, 8, 7, 0]


def test_insert_by_cost_exhaustive():
    rng = random.Random(6)
    for _ in range(20):
        inst = random_instance(12, rng)
        s = Solution(inst, [[1, 2, 3, 4], [5, 6, 7], [8, 9]])
        before = s.objective
        insert_by_cost(s, [10])
        best = min(best_insertion(Solution(inst, [[1, 2, 3, 4], [5, 6, 7], [8, 9]]), 10, r)[0] for r in range(3))
        assert s.objective - before == best


def local_optimum(inst, nd, rng):
    s = construct_initial(inst, nd, rng)
    ns = NeighborhoodSearch(nd)
    ns.run(s, FEASIBILITY)
    ns.run(s, LOCAL_SEARCH)
    s.prune_empty()
    return s


def test_perturb_conserves_and_is_pure():
    rng = random.Random(10)
    inst = random_instance(30, rng)
    nd = build_neighbors(inst, 10)
    ref = local_optimum(inst, nd, rng)
    snapshot = [r[:] for r in ref.routes]
    changed = 0
    for t in range(100):
        h = (CONCENTRIC, PROXIMITY, SEQUENCE)[t % 3]
        s = perturb(ref, h, 4, 20, nd, random.Random(t))
        assert sorted(v for r in s.routes for v in r[1:-1]) == list(inst.customers)
        s.audit()
        changed += sym_distance(s, ref) > 0
    assert ref.routes == snapshot
    assert changed >= 90


def test_perturb_route_count_fixed_without_change_probability():
    rng = random.Random(1)
    inst = random_instance(25, rng)
    nd = build_neighbors(inst, 8)
    ref = local_optimum(inst, nd, rng)
    for t in range(50):
        assert perturb(ref, t % 3, 3, 10**12, nd, random.Random(t)).m == ref.m


def test_perturb_changes_route_count_sometimes():
    rng = random.Random(1)
    inst = random_instance(25, rng)
    nd = build_neighbors(inst, 8)
    ref = local_optimum(inst, nd, rng)
    ms = Counter(perturb(ref, 0, 3, 2, nd, random.Random(t)).m - ref.m for t in range(200))
    assert set(ms) <= {-1, 0, 1}
    assert ms[1] > 0
