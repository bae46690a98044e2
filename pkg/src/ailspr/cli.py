"""Command line: solve, check, bench and oracle-verify."""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from importlib import resources
from pathlib import Path

from .instance import EXACT, ROUNDED, Instance, ParseError, random_instance, read_instance
from .oracle import exact_solve
from .solution import Solution, format_cost, gap, parse_sol
from .solver import Params, load_params, solve

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3
RNG_NAME = "python random.Random (MT19937)"
ORACLE_MAX_N = 7


def bks_registry() -> dict[str, float]:
    return json.loads(resources.files("ailspr").joinpath("data/bks.json").read_text())


def lookup_bks(name: str) -> float | None:
    return bks_registry().get(name)


def _edge_kind(args) -> str | None:
    if getattr(args, "exact", False):
        return EXACT
    if getattr(args, "rounded", False):
        return ROUNDED
    return None


def _params(args) -> Params:
    base = load_params(args.params) if args.params else Params()
    return base.with_overrides(
        stop_iters=args.stop_iters,
        max_iters=args.max_iters,
        time_limit=args.time_limit_secs,
    )


def run_report(inst: Instance, seed: int, params: Params, use_pr: bool, bks: float | None):
    """Solve once and return (solution, report dict)."""
    result = solve(inst, params, random.Random(seed), use_pr=use_pr)
    best = result.best
    problems = validate(inst, [r[1:-1] for r in best.routes])
    if problems:
        raise RuntimeError(f"solver returned an invalid solution: {problems[0]}")
    cost = best.recompute_objective()
    report = {
        "instance": inst.name,
        "seed": seed,
        "algorithm": "ails-pr" if use_pr else "ails",
        "cost": cost,
        "bks": bks,
        "gap": round(gap(cost, bks), 4) if bks else None,
        "routes": best.m,
        "iterations": result.iterations,
        "best_iteration": result.best_iteration,
        "seconds": round(result.seconds, 3),
        "acceptance_rate": round(result.acceptance_rate, 4),
        "edge_weight": inst.edge_weight_kind,
        "rng": RNG_NAME,
        "params": asdict(params),
    }
    return best, report, result


def validate(inst: Instance, routes: list[list[int]]) -> list[str]:
    """Constraint violations of a customer-list solution, first problem first."""
    problems = []
    seen: dict[int, int] = {}
    for k, route in enumerate(routes, start=1):
        load = 0
        for v in route:
            if not 1 <= v <= inst.n:
                problems.append(f"route {k}: vertex {v} is not a customer")
                continue
            if v in seen:
                problems.append(f"customer {v} visited twice (routes {seen[v]} and {k})")
            seen[v] = k
            load += inst.demand[v]
        if load > inst.capacity:
            problems.append(f"route {k} overloaded: load {load} > capacity {inst.capacity}")
    missing = [v for v in inst.customers if v not in seen]
    if missing:
        problems.append(f"customers not visited: {missing[:10]}{' ...' if len(missing) > 10 else ''}")
    return problems


def _emit(rows: list[dict], fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(rows[0] if len(rows) == 1 else rows, indent=2) + "\n")
    elif fmt == "csv":
        if not rows:
            return
        writer = csv.DictWriter(out, fieldnames=[k for k in rows[0] if k != "params"], extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
    else:
        for row in rows:
            out.write("  ".join(f"{k}={v}" for k, v in row.items() if k != "params") + "\n")


# -- solve ------------------------------------------------------------------


def cmd_solve(args) -> int:
    try:
        inst = read_instance(args.instance, _edge_kind(args))
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        params = _params(args)
    except (OSError, ValueError) as exc:
        print(f"error: bad parameter file: {exc}", file=sys.stderr)
        return EXIT_INPUT
    bks = args.bks if args.bks is not None else lookup_bks(inst.name)
    try:
        best, report, result = run_report(inst, args.seed, params, not args.no_pr, bks)
    except RuntimeError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    sol_path = Path(args.sol or f"{inst.name}.sol")
    sol_path.write_text(best.to_sol())
    report["solution_file"] = str(sol_path)
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    if args.dump_elite and result.elite is not None:
        Path(args.dump_elite).write_text(result.elite.to_json() + "\n")
    _emit([report], args.output)
    return EXIT_OK


# -- check ------------------------------------------------------------------


def cmd_check(args) -> int:
    try:
        inst = read_instance(args.instance, _edge_kind(args))
        routes, stated = parse_sol(Path(args.solution).read_text())
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    problems = validate(inst, routes)
    if problems:
        print(f"FAIL {problems[0]}")
        return EXIT_FAIL
    cost = Solution(inst, routes).recompute_objective()
    text = format_cost(cost, inst.exact)
    if stated is not None and abs(stated - float(text)) > (0.005 if inst.exact else 0.5):
        print(f"FAIL stated cost {stated} differs from recomputed {text}")
        return EXIT_FAIL
    print(f"PASS cost {text}")
    return EXIT_OK


# -- bench ------------------------------------------------------------------


def _bench_job(job: dict) -> dict:
    inst = read_instance(job["instance"], job.get("edge_weight"))
    params = Params(**job["params"])
    bks = job.get("bks")
    if bks is None:
        bks = lookup_bks(inst.name)
    _, report, _ = run_report(inst, job["seed"], params, not job.get("no_pr", False), bks)
    return report


def load_manifest(path: Path, defaults: Params) -> list[dict]:
    """Expand a manifest into one job per (instance, seed)."""
    data = json.loads(path.read_text())
    entries = data.get("runs", []) if isinstance(data, dict) else data
    jobs = []
    for entry in entries:
        inst_path = Path(entry["instance"])
        if not inst_path.is_absolute():
            inst_path = path.parent / inst_path
        params = defaults.with_overrides(
            stop_iters=entry.get("stop_iters"),
            max_iters=entry.get("max_iters"),
            time_limit=entry.get("time_limit_secs"),
        )
        for seed in entry.get("seeds", [0]):
            jobs.append({
                "instance": str(inst_path),
                "seed": seed,
                "params": asdict(params),
                "bks": entry.get("bks"),
                "no_pr": entry.get("no_pr", False),
                "edge_weight": entry.get("edge_weight"),
            })
    return jobs


def summarize(raw: list[dict]) -> list[dict]:
    groups: dict[str, list[dict]] = {}
    for row in raw:
        groups.setdefault(row["instance"], []).append(row)
    table = []
    for name, rows in groups.items():
        costs = [r["cost"] for r in rows]
        bks = rows[0]["bks"]
        avg = statistics.fmean(costs)
        table.append({
            "instance": name,
            "runs": len(rows),
            "avg": round(avg, 4),
            "best": min(costs),
            "avg_gap": round(gap(avg, bks), 4) if bks else None,
            "best_gap": round(gap(min(costs), bks), 4) if bks else None,
            "avg_seconds": round(statistics.fmean(r["seconds"] for r in rows), 3),
        })
    return table


RAW_COLUMNS = ("instance", "seed", "cost", "gap", "iters", "seconds")


def raw_csv(raw: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(RAW_COLUMNS)
    for r in raw:
        writer.writerow([r["instance"], r["seed"], r["cost"], r["gap"], r["iterations"], r["seconds"]])
    return buf.getvalue()


def cmd_bench(args) -> int:
    try:
        defaults = _params(args)
        jobs = load_manifest(Path(args.manifest), defaults)
        for job in jobs:
            read_instance(job["instance"], job.get("edge_weight"))
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            raw = list(pool.map(_bench_job, jobs))
    else:
        raw = [_bench_job(job) for job in jobs]
    if args.raw:
        Path(args.raw).write_text(raw_csv(raw))
    table = summarize(raw)
    if args.output == "json":
        sys.stdout.write(json.dumps(table, indent=2) + "\n")
    else:
        _emit(table, args.output)
    return EXIT_OK


# -- oracle-verify ----------------------------------------------------------


def cmd_oracle_verify(args) -> int:
    sizes = args.n
    if any(n > ORACLE_MAX_N or n < 1 for n in sizes):
        print(f"error: oracle verification supports 1 <= n <= {ORACLE_MAX_N}", file=sys.stderr)
        return EXIT_INPUT
    rng = random.Random(args.seed)
    matched = 0
    for t in range(args.count):
        n = sizes[t % len(sizes)]
        inst = random_instance(n, rng, name=f"rand-{args.seed}-{t}")
        exact = exact_solve(inst)
        params = Params(stop_iters=args.stop_iters)
        result = solve(inst, params, random.Random(args.seed + t), use_pr=not args.no_pr)
        ok = abs(result.cost - exact.cost) <= 1e-9
        matched += ok
        if args.verbose or not ok:
            print(f"{inst.name} n={n} exact={exact.cost:g} solver={result.cost:g} {'ok' if ok else 'MISMATCH'}")
    rate = 1.0 if args.count == 0 else matched / args.count
    print(f"matched {matched}/{args.count} ({100 * rate:.1f}%)")
    return EXIT_OK if matched == args.count else EXIT_FAIL


# -- parser -----------------------------------------------------------------


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--stop-iters", type=int, default=None,
                   help="iterations without improvement before stopping (default 200000)")
    p.add_argument("--max-iters", type=int, default=None, help="hard cap on total iterations")
    p.add_argument("--time-limit-secs", type=float, default=None)
    p.add_argument("--params", help="key = value parameter file")
    p.add_argument("--output", choices=("json", "csv", "text"), default="json")


def _add_weight_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="real-valued Euclidean distances")
    g.add_argument("--rounded", action="store_true", help="distances rounded to the nearest integer")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ailspr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one CVRPLIB instance")
    p.add_argument("instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-pr", action="store_true", help="plain AILS without Path-Relinking")
    p.add_argument("--bks", type=float, default=None, help="best-known cost for the gap column")
    p.add_argument("--sol", help="solution output path (default <name>.sol)")
    p.add_argument("--report", help="also write the JSON report here")
    p.add_argument("--dump-elite", metavar="PATH", help="write the final elite family as JSON")
    _add_run_flags(p)
    _add_weight_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="validate a .sol file against an instance")
    p.add_argument("instance")
    p.add_argument("solution")
    _add_weight_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="run a manifest of instances and seeds")
    p.add_argument("manifest")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--raw", help="write per-run CSV (instance, seed, cost, gap, iters, seconds)")
    _add_run_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle-verify", help="compare the solver with exhaustive search on tiny instances")
    p.add_argument("--count", type=int, default=30)
    p.add_argument("--n", type=int, nargs="+", default=[5, 6, 7])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stop-iters", type=int, default=500)
    p.add_argument("--no-pr", action="store_true")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_oracle_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
