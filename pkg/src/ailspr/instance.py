"""CVRP instances: parsing, distances, neighbor lists and the route-count bound."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path

ROUNDED = "rounded-euclidean"
EXACT = "exact-euclidean"
EDGE_WEIGHT_KINDS = (ROUNDED, EXACT)

# Instance families published with real-valued (unrounded) distances.
_EXACT_FAMILIES = ("CMT", "vrpnc")


class ParseError(ValueError):
    """Raised for malformed CVRPLIB input; the message names the offending line."""

    def __init__(self, message: str, lineno: int | None = None, line: str | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}: {line!r}"
        super().__init__(message)
        self.lineno = lineno


@dataclass(eq=False)
class Instance:
    """Problem data with the depot at index 0 and customers at 1..n.

    Treated as immutable once built; the distance table is derived in
    ``__post_init__``.
    """

    name: str
    coords: list[tuple[float, float]]
    demand: list[int]
    capacity: int
    edge_weight_kind: str = ROUNDED
    bks: float | None = None
    dist: list[list[float]] = field(init=False, repr=False)

    def __post_init__(self):
        if self.edge_weight_kind not in EDGE_WEIGHT_KINDS:
            raise ValueError(f"unknown edge weight kind {self.edge_weight_kind!r}")
        if len(self.coords) != len(self.demand):
            raise ValueError("coords and demand differ in length")
        if len(self.coords) < 2:
            raise ValueError("instance needs a depot and at least one customer")
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")
        if self.demand[0] != 0:
            raise ValueError("depot demand must be 0")
        for i, q in enumerate(self.demand[1:], start=1):
            if q <= 0 or q > self.capacity:
                raise ValueError(f"customer {i} demand {q} outside (0, {self.capacity}]")
        self.dist = _distance_table(self.coords, self.edge_weight_kind == ROUNDED)

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    @property
    def customers(self) -> range:
        return range(1, len(self.coords))

    @property
    def exact(self) -> bool:
        return self.edge_weight_kind == EXACT

    def distance(self, i: int, j: int) -> float:
        return self.dist[i][j]

    def min_routes(self) -> int:
        return min_routes(self)


def _distance_table(coords, rounded: bool) -> list[list[float]]:
    size = len(coords)
    table = [[0] * size for _ in range(size)]
    for i in range(size):
        xi, yi = coords[i]
        row = table[i]
        for j in range(i + 1, size):
            xj, yj = coords[j]
            d = math.hypot(xi - xj, yi - yj)
            # TSPLIB nint(): round half up, not Python's banker's rounding.
            d = int(math.floor(d + 0.5)) if rounded else d
            row[j] = d
            table[j][i] = d
    return table


def euclidean(a: tuple[float, float], b: tuple[float, float], rounded: bool) -> float:
    d = math.hypot(a[0] - b[0], a[1] - b[1])
    return int(math.floor(d + 0.5)) if rounded else d


def distance(inst: Instance, i: int, j: int) -> float:
    return inst.dist[i][j]


def min_routes(inst: Instance) -> int:
    """Lower bound on the number of routes: total demand over capacity, rounded up."""
    total = sum(inst.demand)
    return max(1, -(-total // inst.capacity))


def default_edge_weight_kind(name: str) -> str:
    return EXACT if name.startswith(_EXACT_FAMILIES) else ROUNDED


_HEADER_KEYS = {
    "NAME", "COMMENT", "TYPE", "DIMENSION", "CAPACITY", "EDGE_WEIGHT_TYPE",
    "EDGE_WEIGHT_FORMAT", "NODE_COORD_TYPE", "DISPLAY_DATA_TYPE", "VEHICLES",
    "BEST_KNOWN",
}
_SECTIONS = {"NODE_COORD_SECTION", "DEMAND_SECTION", "DEPOT_SECTION"}


def parse_cvrplib(text: str, edge_weight_kind: str | None = None, name: str | None = None) -> Instance:
    """Parse a CVRPLIB/TSPLIB CVRP file with EUC_2D weights.

    The depot listed in DEPOT_SECTION becomes vertex 0; the remaining vertices
    keep their file order. When ``edge_weight_kind`` is None the kind is picked
    by instance family (CMT instances use real distances, everything else the
    rounded CVRPLIB convention).
    """
    header: dict[str, str] = {}
    coords: dict[int, tuple[float, float]] = {}
    demands: dict[int, int] = {}
    depots: list[int] = []
    section = None
    header_lines: dict[str, tuple[int, str]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        token = line.split()[0].rstrip(":")
        if token in _SECTIONS:
            section = token
            continue
        if ":" in line:
            key, _, value = line.partition(":")
            key = key.strip()
            if key not in _HEADER_KEYS:
                raise ParseError("unknown header field", lineno, raw)
            header[key] = value.strip()
            header_lines[key] = (lineno, raw)
            section = None
            continue
        if section is None:
            raise ParseError("data outside of any section", lineno, raw)
        parts = line.split()
        try:
            if section == "NODE_COORD_SECTION":
                if len(parts) != 3:
                    raise ValueError
                coords[int(parts[0])] = (float(parts[1]), float(parts[2]))
            elif section == "DEMAND_SECTION":
                if len(parts) != 2:
                    raise ValueError
                demands[int(parts[0])] = int(parts[1])
            else:
                for p in parts:
                    v = int(p)
                    if v == -1:
                        section = None
                        break
                    depots.append(v)
        except ValueError:
            raise ParseError(f"malformed {section} entry", lineno, raw) from None

    if "CAPACITY" not in header:
        raise ParseError("missing CAPACITY")
    if "DIMENSION" not in header:
        raise ParseError("missing DIMENSION")
    ewt = header.get("EDGE_WEIGHT_TYPE", "EUC_2D")
    if ewt != "EUC_2D":
        lineno, raw = header_lines["EDGE_WEIGHT_TYPE"]
        raise ParseError(f"unsupported EDGE_WEIGHT_TYPE {ewt}", lineno, raw)
    try:
        capacity = int(header["CAPACITY"])
    except ValueError:
        raise ParseError("CAPACITY is not an integer", *header_lines["CAPACITY"]) from None
    try:
        dimension = int(header["DIMENSION"])
    except ValueError:
        raise ParseError("DIMENSION is not an integer", *header_lines["DIMENSION"]) from None

    if len(coords) != dimension:
        raise ParseError(f"NODE_COORD_SECTION has {len(coords)} entries, DIMENSION is {dimension}")
    if set(demands) != set(coords):
        raise ParseError("DEMAND_SECTION and NODE_COORD_SECTION list different vertices")
    if len(depots) != 1:
        raise ParseError(f"expected exactly one depot, got {len(depots)}")
    depot = depots[0]
    if depot not in coords:
        raise ParseError(f"depot {depot} has no coordinates")
    if demands[depot] != 0:
        raise ParseError(f"depot demand is {demands[depot]}, expected 0")

    order = [depot] + [v for v in sorted(coords) if v != depot]
    for v in order[1:]:
        if demands[v] > capacity:
            raise ParseError(f"vertex {v} demand {demands[v]} exceeds capacity {capacity}")
        if demands[v] <= 0:
            raise ParseError(f"vertex {v} has non-positive demand {demands[v]}")

    inst_name = name or header.get("NAME", "unnamed")
    kind = edge_weight_kind or default_edge_weight_kind(inst_name)
    bks = None
    if "BEST_KNOWN" in header:
        bks = float(header["BEST_KNOWN"])
    return Instance(
        name=inst_name,
        coords=[coords[v] for v in order],
        demand=[demands[v] for v in order],
        capacity=capacity,
        edge_weight_kind=kind,
        bks=bks,
    )


def read_instance(path: str | Path, edge_weight_kind: str | None = None) -> Instance:
    path = Path(path)
    text = path.read_text()
    inst = parse_cvrplib(text, edge_weight_kind=edge_weight_kind)
    if inst.name == "unnamed":
        inst.name = path.stem
    return inst


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def write_cvrplib(inst: Instance) -> str:
    lines = [
        f"NAME : {inst.name}",
        "TYPE : CVRP",
        f"DIMENSION : {inst.n + 1}",
        "EDGE_WEIGHT_TYPE : EUC_2D",
        f"CAPACITY : {inst.capacity}",
        "NODE_COORD_SECTION",
    ]
    lines += [f"{i + 1} {_fmt(x)} {_fmt(y)}" for i, (x, y) in enumerate(inst.coords)]
    lines.append("DEMAND_SECTION")
    lines += [f"{i + 1} {q}" for i, q in enumerate(inst.demand)]
    lines += ["DEPOT_SECTION", " 1", " -1", "EOF", ""]
    return "\n".join(lines)


def random_instance(
    n: int,
    rng: random.Random,
    capacity: int = 10,
    max_demand: int = 4,
    grid: int = 100,
    edge_weight_kind: str = ROUNDED,
    name: str | None = None,
) -> Instance:
    coords = [(float(rng.randint(0, grid)), float(rng.randint(0, grid))) for _ in range(n + 1)]
    demand = [0] + [rng.randint(1, min(max_demand, capacity)) for _ in range(n)]
    return Instance(
        name=name or f"rand-n{n}",
        coords=coords,
        demand=demand,
        capacity=capacity,
        edge_weight_kind=edge_weight_kind,
    )


@dataclass(eq=False)
class NeighborData:
    """Granular neighbor lists plus the full closeness ranking of every vertex.

    ``near[v]`` holds the ``phi`` closest other vertices (the depot included);
    ``order[v]`` is the complete ranking and ``rank[v][u]`` the 1-based position
    of ``u`` in it. ``inverse[u]`` lists every vertex whose ``near`` contains u.
    """

    phi: int
    near: list[list[int]]
    order: list[list[int]]
    rank: list[list[int]]
    inverse: list[list[int]]
    near_set: list[frozenset[int]]

    def rank_of(self, v: int, u: int) -> int:
        return self.rank[v][u]


def build_neighbors(inst: Instance, phi: int) -> NeighborData:
    if phi < 1:
        raise ValueError("phi must be at least 1")
    size = inst.n + 1
    dist = inst.dist
    order = []
    rank = []
    for v in range(size):
        row = dist[v]
        ranked = sorted((u for u in range(size) if u != v), key=lambda u: (row[u], u))
        order.append(ranked)
        r = [0] * size
        for pos, u in enumerate(ranked, start=1):
            r[u] = pos
        rank.append(r)
    k = min(phi, inst.n)
    near = [ranked[:k] for ranked in order]
    inverse: list[list[int]] = [[] for _ in range(size)]
    for v in range(size):
        for u in near[v]:
            inverse[u].append(v)
    return NeighborData(
        phi=k,
        near=near,
        order=order,
        rank=rank,
        inverse=inverse,
        near_set=[frozenset(x) for x in near],
    )
