"""AILS and AILS-PR drivers."""

from __future__ import annotations

import configparser
import random
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .adaptive import AcceptState, OmegaState
from .elite import EliteFamily, path_relinking
from .instance import Instance, build_neighbors
from .perturb import REMOVAL_HEURISTICS, construct_initial, perturb
from .search import FEASIBILITY, LOCAL_SEARCH, NeighborhoodSearch, changed_routes
from .solution import EPS, Solution, sym_distance


@dataclass
class Params:
    gamma: int = 20
    kappa: float = 0.35
    d_beta: float = 24
    sigma: int = 63
    phi: int = 60
    epsilon: float = 0.001
    eta0: float = 1.0
    omega0: float | None = None  # None means d_beta
    stop_iters: int = 200_000
    max_iters: int | None = None
    time_limit: float | None = None

    def with_overrides(self, **kw) -> "Params":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def load_params(path: str | Path, base: Params | None = None) -> Params:
    """Read ``key = value`` lines into a Params; unknown keys are an error."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string("[params]\n" + Path(path).read_text())
    base = base or Params()
    types = {f.name: f.type for f in fields(Params)}
    updates = {}
    for key, raw in parser["params"].items():
        if key not in types:
            raise ValueError(f"unknown parameter {key!r}")
        kind = types[key]
        if raw.strip().lower() in ("", "none"):
            updates[key] = None
        elif kind.startswith("int"):
            updates[key] = int(raw)
        else:
            updates[key] = float(raw)
    return replace(base, **updates)


@dataclass
class RunResult:
    best: Solution
    iterations: int
    seconds: float
    acceptance_rate: float
    best_iteration: int
    elite: EliteFamily | None = None

    @property
    def cost(self) -> float:
        return self.best.objective


def _local_optimum(s: Solution, searcher: NeighborhoodSearch, ref: Solution | None = None) -> Solution:
    dirty = None if ref is None else changed_routes(s, ref)
    searcher.run(s, FEASIBILITY, dirty=dirty)
    if ref is not None:
        dirty = changed_routes(s, ref)
    searcher.run(s, LOCAL_SEARCH, dirty=dirty)
    s.prune_empty()
    return s


def solve(
    inst: Instance,
    params: Params | None = None,
    rng: random.Random | None = None,
    use_pr: bool = True,
) -> RunResult:
    """Run the adaptive iterated local search, with Path-Relinking when ``use_pr``.

    Stops after ``params.stop_iters`` iterations without improving the best
    solution, after ``params.max_iters`` iterations in total, or when
    ``params.time_limit`` seconds have elapsed, whichever comes first.
    """
    params = params or Params()
    rng = rng or random.Random(0)
    start = time.perf_counter()
    deadline = start + params.time_limit if params.time_limit else None
    n = inst.n
    gamma = params.gamma
    d_beta = params.d_beta

    nd = build_neighbors(inst, params.phi)
    searcher = NeighborhoodSearch(nd)
    ref = _local_optimum(construct_initial(inst, nd, rng), searcher)
    best = ref.copy()
    best_f = best.objective
    best_it = 0

    acceptance = AcceptState(gamma=gamma, kappa=params.kappa, eta=params.eta0, epsilon=params.epsilon)
    acceptance.observe(ref.objective)
    omega0 = d_beta if params.omega0 is None else params.omega0
    omegas = [OmegaState(omega=min(n, max(1.0, omega0))) for _ in REMOVAL_HEURISTICS]
    fam = EliteFamily(sigma=params.sigma, d_beta=d_beta) if use_pr else None
    if fam is not None:
        fam.update(ref)

    it = 0
    idle = 0
    while idle < params.stop_iters:
        if params.max_iters is not None and it >= params.max_iters:
            break
        if deadline is not None and time.perf_counter() >= deadline:
            break
        it += 1
        idle += 1
        h = rng.randrange(len(REMOVAL_HEURISTICS))
        s = perturb(ref, h, omegas[h].omega, gamma, nd, rng)
        _local_optimum(s, searcher, ref)
        f = s.objective
        if fam is not None:
            fam.update(s)
        omegas[h].update(sym_distance(s, ref), d_beta, gamma, n)
        if acceptance.accept(f):
            ref = s
        acceptance.observe(f)
        if f < best_f - EPS:
            best, best_f, best_it, idle = s.copy(), f, it, 0
        if fam is not None:
            sb = path_relinking(s, fam, nd, rng, searcher)
            if sb.objective < best_f - EPS:
                best, best_f, best_it, idle = sb.copy(), sb.objective, it, 0
                ref = sb

    return RunResult(
        best=best,
        iterations=it,
        seconds=time.perf_counter() - start,
        acceptance_rate=acceptance.acceptance_rate,
        best_iteration=best_it,
        elite=fam,
    )


def run_ails(inst: Instance, params: Params | None = None, rng: random.Random | None = None) -> Solution:
    return solve(inst, params, rng, use_pr=False).best


def run_ails_pr(inst: Instance, params: Params | None = None, rng: random.Random | None = None) -> Solution:
    return solve(inst, params, rng, use_pr=True).best
