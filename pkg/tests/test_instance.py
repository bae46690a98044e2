import math
import random

import pytest

from ailspr.instance import (
    EXACT,
    ROUNDED,
    Instance,
    ParseError,
    build_neighbors,
    default_edge_weight_kind,
    distance,
    min_routes,
    parse_cvrplib,
    random_instance,
    write_cvrplib,
)

TINY = """NAME : tiny
TYPE : CVRP
DIMENSION : 4
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 10
NODE_COORD_SECTION
1 0 0
2 3 4
3 1 1
4 -2 0
DEMAND_SECTION
1 0
2 3
3 5
4 2
DEPOT_SECTION
1
-1
EOF
"""


def test_parse_minimal():
    inst = parse_cvrplib(TINY)
    assert inst.name == "tiny"
    assert inst.n == 3
    assert inst.demand == [0, 3, 5, 2]
    assert inst.capacity == 10
    assert distance(inst, 0, 1) == 5


def test_rounding_modes():
    coords = [(0.0, 0.0), (1.0, 1.0), (3.0, 4.0)]
    r = Instance("r", coords, [0, 1, 1], 5, ROUNDED)
    e = Instance("e", coords, [0, 1, 1], 5, EXACT)
    assert distance(r, 0, 1) == 1
    assert distance(r, 0, 2) == 5
    assert math.isclose(distance(e, 0, 1), math.sqrt(2))


def test_rounding_half_goes_up():
    # (0,0)-(1.5,2) has length exactly 2.5
    inst = Instance("h", [(0.0, 0.0), (1.5, 2.0)], [0, 1], 5, ROUNDED)
    assert distance(inst, 0, 1) == 3


def test_distance_symmetric_zero_diagonal():
    inst = random_instance(15, random.Random(1))
    for i in range(16):
        assert distance(inst, i, i) == 0
        for j in range(16):
            assert distance(inst, i, j) == distance(inst, j, i) >= 0


def test_depot_remapped_to_zero():
    text = (
        TINY.replace("DEPOT_SECTION\n1\n", "DEPOT_SECTION\n3\n")
        .replace("1 0\n2 3\n3 5\n", "1 4\n2 3\n3 0\n")
    )
    inst = parse_cvrplib(text)
    assert inst.coords[0] == (1.0, 1.0)
    assert inst.demand == [0, 4, 3, 2]
    assert inst.coords[1:] == [(0.0, 0.0), (3.0, 4.0), (-2.0, 0.0)]


@pytest.mark.parametrize(
    "old, new, needle",
    [
        ("CAPACITY : 10\n", "", "capacity"),
        ("EUC_2D", "GEO", "geo"),
        ("4 2\nDEPOT", "4 20\nDEPOT", "demand"),
        ("2 3 4\n", "2 3 x\n", "line"),
        ("DIMENSION : 4", "DIMENSION : 5", "dimension"),
        ("DEPOT_SECTION\n1\n", "DEPOT_SECTION\n3\n", "depot"),
    ],
)
def test_parse_errors(old, new, needle):
    assert old in TINY
    with pytest.raises(ParseError) as exc:
        parse_cvrplib(TINY.replace(old, new))
    assert needle in str(exc.value).lower()


def test_min_routes():
    inst = Instance("m", [(0.0, 0.0)] * 4, [0, 3, 3, 3], 5)
    assert min_routes(inst) == 2
    inst = Instance("m", [(0.0, 0.0)] * 2, [0, 1], 5)
    assert min_routes(inst) == 1


def test_family_default_rounding():
    assert default_edge_weight_kind("CMT1") == EXACT
    assert default_edge_weight_kind("X-n101-k25") == ROUNDED


def test_roundtrip_writer():
    inst = random_instance(9, random.Random(4))
    again = parse_cvrplib(write_cvrplib(inst))
    assert again.coords == inst.coords and again.demand == inst.demand
    assert again.dist == inst.dist


def test_bundled_instances(cmt1, e22):
    assert cmt1.n == 50 and cmt1.capacity == 160 and sum(cmt1.demand) == 777
    assert cmt1.edge_weight_kind == EXACT
    assert min_routes(cmt1) == 5
    assert e22.n == 21 and e22.edge_weight_kind == ROUNDED


def test_neighbor_lists():
    inst = random_instance(30, random.Random(3))
    nd = build_neighbors(inst, 8)
    for v in range(31):
        assert len(nd.near[v]) == 8
        assert v not in nd.near[v]
        keys = [(inst.dist[v][u], u) for u in nd.near[v]]
        assert keys == sorted(keys)
        assert nd.near[v] == nd.order[v][:8]
        assert sorted(nd.rank[v][u] for u in range(31) if u != v) == list(range(1, 31))
        for u in nd.near[v]:
            assert v in nd.inverse[u]
    nd_all = build_neighbors(inst, 100)
    assert all(len(row) == 30 for row in nd_all.near)
