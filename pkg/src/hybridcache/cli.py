"""Command-line scenario runner.

    hybridcache analyze  --scenario s.json [--exact-oracle]
    hybridcache simulate --scenario s.json --slots 2000 --seed 1
    hybridcache optimize --scenario s.json --out best.csv
    hybridcache sweep    --scenario s.json --out sweep.csv --threads 4
    hybridcache fig1

Exit codes: 0 ok, 2 parse error, 3 validation error, 4 instance too large.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from pathlib import Path
from string import ascii_uppercase

import numpy as np

from . import __version__
from .analysis import total_load
from .model import DemandMatrix, HeteroPlacement, HybridPlacement, InstanceTooLarge, SystemConfig
from .optimizer import optimize_hetero, optimize_hybrid, optimize_pure_coded, optimize_pure_uncoded
from .oracle import exact_expected_load
from .scenario import Scenario, ScenarioError, ScenarioParseError, load_scenario
from .simulator import run_slot, simulate, write_trace

__all__ = ["main", "run", "emit_fig1_walkthrough", "FIG1_DEMANDS", "COLUMNS"]

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_TOO_LARGE = 0, 2, 3, 4

COLUMNS = [
    "mode", "scheme", "K", "N", "M", "Z", "sigma_Z", "F", "popularity",
    "M1", "N1", "T", "placement", "evaluated", "pruned",
    "r1", "r2", "r", "r_bits",
    "sim_slots", "sim_seed", "sim_r1", "sim_r1_se", "sim_r2", "sim_r2_se", "sim_r", "sim_r_se",
    "exact_r",
]

# Walkthrough demands, one string per SBS; letters are popularity ranks (A most popular).
FIG1_DEMANDS = ("ADEJDFKB", "BGHZ", "CILAMI")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _describe(placement, config):
    if isinstance(placement, HybridPlacement):
        t = placement.replication(config.K, config.M)
        return {"M1": placement.M1, "N1": placement.N1,
                "T": int(t) if placement.N1 > config.M else "",
                "placement": f"M1={placement.M1};N1={placement.N1}"}
    groups = "|".join("".join(str(c) for c in g) for g in placement.groups)
    X = "|".join("".join(str(int(v)) for v in col) for col in placement.X.T)
    Y = "|".join("".join(str(int(v)) for v in col) for col in placement.Y.T)
    Mg = "|".join(str(m) for m in placement.Mg)
    return {"M1": "", "N1": "", "T": "|".join(str(placement.Tg(g)) for g in range(len(placement.groups))),
            "placement": f"groups={groups};Mg={Mg};X={X};Y={Y}"}


def _optimize(scheme, config, pop, sc: Scenario):
    if scheme == "hybrid":
        if not pop.is_homogeneous:
            raise ScenarioError("scheme 'hybrid' needs homogeneous popularity; use 'hetero'")
        return optimize_hybrid(config, pop)
    if scheme == "pure-coded":
        return optimize_pure_coded(config, pop)
    if scheme == "pure-uncoded":
        return optimize_pure_uncoded(config, pop)
    return optimize_hetero(config, pop, max_groups=sc.max_groups, prune=sc.prune)


def _row(mode, scheme, config, pop, sc, placement, search, slots, seed, simulate_it, exact, threads, trace_path,
         alpha=None):
    report = total_load(config, pop, placement)
    row = {
        "mode": mode, "scheme": scheme, "K": config.K, "N": config.N, "M": config.M,
        "Z": " ".join(map(str, config.Z)),
        "sigma_Z": float(np.std(config.Z, ddof=1)) if config.K > 1 else 0.0,
        "F": float(config.F),
        "popularity": f"zipf:{(sc.alpha if alpha is None else alpha)!r}" if isinstance(sc.popularity, dict) else "matrix",
        "evaluated": search.evaluated if search else "",
        "pruned": search.pruned if search else "",
        "r1": report.r1, "r2": report.r2, "r": report.r, "r_bits": report.bits(config.F),
    }
    row.update(_describe(placement, config))
    if simulate_it:
        rep = simulate(config, pop, placement, slots, seed, threads=threads)
        row.update(sim_slots=slots, sim_seed=seed, sim_r1=rep.mean_r1, sim_r1_se=rep.se_r1,
                   sim_r2=rep.mean_r2, sim_r2_se=rep.se_r2, sim_r=rep.mean_r, sim_r_se=rep.se_r)
        if trace_path is not None:
            write_trace(rep, trace_path)
    if exact:
        row["exact_r"] = float(exact_expected_load(config, pop, placement))
    return row


def _points(sc: Scenario):
    axes = [(k, sc.sweep[k]) for k in ("alpha", "M", "Z") if k in sc.sweep]
    if not axes:
        return [{}]
    names = [k for k, _ in axes]
    return [dict(zip(names, combo)) for combo in product(*(v for _, v in axes))]


def run(sc: Scenario, mode: str, seed=None, slots=None, threads=1, exact=False, trace_path=None) -> list:
    """Execute ``mode`` on a parsed scenario and return the result rows (dicts keyed by :data:`COLUMNS`)."""
    seed = sc.seed if seed is None else seed
    slots = sc.slots if slots is None else slots

    if mode in ("analyze", "simulate"):
        if sc.placement is None:
            raise ScenarioError(f"mode '{mode}' needs a 'placement'")
        pop = sc.pop()
        scheme = "hybrid" if isinstance(sc.placement, HybridPlacement) else "hetero"
        if isinstance(sc.placement, HybridPlacement) and not pop.is_homogeneous:
            raise ScenarioError("a hybrid (M1, N1) placement needs homogeneous popularity")
        do_sim = mode == "simulate" or sc.simulate
        return [_row(mode, scheme, sc.config, pop, sc, sc.placement, None, slots, seed, do_sim, exact, threads,
                     trace_path if (sc.trace or trace_path) and do_sim else None)]

    points = _points(sc) if mode == "sweep" else [{}]
    if mode == "sweep" and points == [{}]:
        raise ScenarioError("mode 'sweep' needs a non-empty 'sweep' object")

    def job(index):
        point_i, scheme_i = index
        point, scheme = points[point_i], sc.schemes[scheme_i]
        changes = {}
        if "M" in point:
            changes["M"] = point["M"]
        if "Z" in point:
            changes["Z"] = tuple(point["Z"])
        try:
            config = sc.with_config(**changes)
        except ValueError as exc:
            raise ScenarioError(f"sweep point {point}: {exc}") from None
        pop = sc.pop(config, point.get("alpha"))
        res = _optimize(scheme, config, pop, sc)
        return _row(mode, scheme, config, pop, sc, res.placement, res, slots, seed, sc.simulate, exact, 1, None,
                    alpha=point.get("alpha"))

    jobs = [(i, j) for i in range(len(points)) for j in range(len(sc.schemes))]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(job, jobs))
    else:
        rows = [job(j) for j in jobs]
    # rows follow job order (sweep point, then scheme) whatever the execution order
    return [row for _, row in sorted(zip(jobs, rows), key=lambda t: t[0])]


def write_rows(rows, fh) -> None:
    w = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(row.get(k)) for k in COLUMNS})


def emit_fig1_walkthrough(demands=None) -> str:
    """Text walkthrough of one slot: K=3 SBSs, N=26 contents A..Z, M=5, M1=3, N1=9, Z=(8,4,6).

    ``demands`` is one string (or letter sequence) per SBS; defaults to
    :data:`FIG1_DEMANDS`, whose coded queues hold 3, 2 and 1 requests at
    the three delivery steps.
    """
    demands = FIG1_DEMANDS if demands is None else demands
    rows = tuple(np.array([ascii_uppercase.index(ch) for ch in d], dtype=np.int64) for d in demands)
    config = SystemConfig(K=len(rows), N=26, M=5, Z=[len(r) for r in rows])
    placement = HybridPlacement(M1=3, N1=9)
    out = run_slot(DemandMatrix(rows), placement, config)
    name = lambda n: ascii_uppercase[n]
    T = placement.T(config.K, config.M)
    lines = [
        f"K={config.K} SBSs, N={config.N} contents A..Z (A most popular), M={config.M}, "
        f"M1={placement.M1}, N1={placement.N1}, T={T}",
        "  cached whole: A-C   coded: D-I   not cached: J-Z",
        "",
    ]
    coded_q = out.queues[0] if out.queues else tuple(() for _ in rows)
    for c, row in enumerate(rows):
        local = [name(n) for n in row if n < placement.M1]
        unc = [name(n) for n in row if n >= placement.N1]
        lines.append(f"SBS{c + 1} (Z={len(row)}): {' '.join(name(n) for n in row)}")
        lines.append(f"  local hits: {' '.join(local) or '-'}")
        lines.append(f"  coded queue: {' '.join(name(n) for n in coded_q[c]) or '-'}")
        lines.append(f"  uncoded requests: {' '.join(unc) or '-'}")
    occ = out.occupancy[0] if out.occupancy else ()
    lines += [
        "",
        f"coded steps: {len(occ)}; non-empty queues per step: {tuple(occ)}",
        f"uncoded broadcasts: {' '.join(name(n) for n in out.uncoded) or '-'}",
        f"load (units of F): coded r1={out.r1:.6g}, uncoded r2={out.r2:.6g}, total r={out.r:.6g}",
    ]
    return "\n".join(lines) + "\n"


def _parser():
    p = argparse.ArgumentParser(prog="hybridcache", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="mode", required=True)
    for mode in ("analyze", "simulate", "optimize", "sweep", "fig1"):
        sp = sub.add_parser(mode)
        sp.add_argument("--scenario", required=mode != "fig1", help="scenario JSON file")
        sp.add_argument("--seed", type=int, help="simulation seed (overrides the scenario)")
        sp.add_argument("--slots", type=int, help="simulated slots (overrides the scenario)")
        sp.add_argument("--out", help="results CSV path; a .meta.json file is written next to it")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--exact-oracle", action="store_true", help="add exact expected load (tiny instances)")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.mode == "fig1":
        text = emit_fig1_walkthrough()
        sys.stdout.write(text)
        if args.out:
            Path(args.out).write_text(text)
        return EXIT_OK

    started = time.time()
    try:
        sc = load_scenario(args.scenario)
        trace = Path(args.out).with_suffix(".trace.csv") if args.out else None
        rows = run(sc, args.mode, seed=args.seed, slots=args.slots, threads=args.threads,
                   exact=args.exact_oracle, trace_path=trace)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InstanceTooLarge as exc:
        print(f"instance too large: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    buf = io.StringIO()
    write_rows(rows, buf)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
        meta = {
            "mode": args.mode,
            "scenario": str(args.scenario),
            "seed": sc.seed if args.seed is None else args.seed,
            "slots": sc.slots if args.slots is None else args.slots,
            "threads": args.threads,
            "rows": len(rows),
            "versions": {"hybridcache": __version__, "python": platform.python_version(),
                         "numpy": np.__version__},
            "elapsed_s": round(time.time() - started, 3),
        }
        Path(args.out).with_suffix(".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
