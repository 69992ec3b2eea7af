"""``landscape-lab`` command line.

Every subcommand writes CSV tables into ``--out-dir`` plus a
``manifest.json`` listing them.  Floats are written with ``repr`` so the
files are byte-stable; thread count never changes any number.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import Infinite, check_conditions, check_unbiased, compute_nweights, p_less, parse_size, pn_less
from .descent import DescentSpec, blind_steps, lbd_steps, savings_scan, steps_infinite, write_curve_csv
from .errors import LandscapeError
from .models.benchmark import BenchmarkClassSpec, benchmark_space
from .models.lipschitz import toy_space
from .models.sat2 import sat2_distribution, sat2_kernel
from .models.tsp import read_instance, tsp_enumerate, tsp_generate, tsp_sample, write_instance
from .rates import expected_improvement, expected_improvement_to_target, improvement_curve, rate_crossover
from .simulate import SimConfig, simulate_blind, simulate_lbd, simulate_tsp_descent
from .studies import nonincreasing_trend, smoothed_unimodal, summarise_instance, support_rbar, theorem1_levels

ENV_THREADS = "LANDSCAPE_LAB_THREADS"
TABLE3_LEVELS = (26, 23, 20, 17, 14, 11, 8)
TABLE2_LEVELS = (20, 17, 14, 11, 8, 5)


def _cell(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def _fixed(x: float, digits: int = 2) -> str:
    return "" if math.isnan(x) else f"{x:.{digits}f}"


class Emitter:
    """Writes tables and keeps the list of produced files."""

    def __init__(self, out_dir: Path, fmt: str) -> None:
        self.out_dir = out_dir
        self.fmt = fmt
        self.files: list[str] = []
        out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.out_dir / name

    def table(self, name: str, header, rows) -> None:
        rows = [[_cell(x) for x in r] for r in rows]
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        if self.fmt == "dat":
            stem = name.rsplit(".", 1)[0]
            lines = ["# " + " ".join(header)] + [" ".join(c if c else "nan" for c in r) for r in rows]
            self.path(stem + ".dat").write_text("\n".join(lines) + "\n")


def _threads(args) -> int:
    n = args.threads
    if n is None:
        n = int(os.environ.get(ENV_THREADS, "1"))
    return n if n > 0 else (os.cpu_count() or 1)


def _ints(text: str) -> list[int]:
    """``"1,3,5"`` or ``"1:17:2"`` (inclusive stop)."""
    if ":" in text:
        parts = [int(x) for x in text.split(":")]
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(lo, hi + 1, step))
    return [int(x) for x in text.split(",") if x.strip()]


# ---------------------------------------------------------------------------
# subcommands


def cmd_sat2(args, em: Emitter) -> str:
    dist, kernel = sat2_distribution(), sat2_kernel()
    nw = compute_nweights(dist, kernel)
    rep = check_conditions(dist, kernel, nw)
    em.table("sat2_p.csv", ["k", "p"], [(k, p) for k, p in zip(dist.costs, dist.p)])
    ub = check_unbiased(dist, kernel, nw, args.k)
    em.table(
        "sat2_r17.csv" if args.k == 17 else f"sat2_r{args.k}.csv",
        ["delta", "r", "posr"],
        [(d, nw.r_at(args.k, d), ub.posr.get(d, math.nan)) for d in range(1, 5)],
    )
    em.table("sat2_rbar.csv", ["k", "rbar"], [(k, nw.rbar_at(k)) for k in TABLE2_LEVELS])
    em.table(
        "sat2_ta.csv",
        ["k", "t", "a", "beneficial"],
        [(k, _fixed(rep.at("t", k)), _fixed(rep.at("a", k)), rep.at("t", k) < rep.at("a", k)) for k in TABLE3_LEVELS],
    )
    _conditions_table(em, "sat2_conditions.csv", dist, kernel, nw, rep)
    return f"k_mod={dist.k_mod} p({dist.mode})={dist.prob(dist.mode):.4f}"


def _conditions_table(em, name, dist, kernel, nw, rep) -> None:
    rows = []
    for k in dist.costs:
        i = k - dist.k_opt
        if not rep.defined[i]:
            continue
        rows.append(
            (
                k, dist.p[i], nw.rbar[i], pn_less(kernel, k), p_less(dist, k), rep.ge[i], rep.unbiased[i],
                rep.nsc[i], rep.full_nsc[i], rep.thm1_holds[i], rep.thm2_holds[i], rep.improves[i], rep.t[i], rep.a[i],
                rep.weak_cond_slack[i],
            )
        )
    em.table(
        name,
        ["k", "p", "rbar", "pn_less", "p_less", "ge", "unbiased", "nsc", "full_nsc", "thm1", "thm2", "improves", "t", "a", "slack"],
        rows,
    )


def cmd_tsp(args, em: Emitter) -> str:
    threads = _threads(args)
    if args.study:
        rows = []
        passed = live = cross_ok = 0
        for i in range(args.study):
            s = args.seed + i
            land = tsp_enumerate(tsp_generate(args.cities, s), threads=threads)
            summ = summarise_instance(s, land)
            passed += summ.passes
            live += summ.passes_live
            gap = summ.crossover_gap
            cross_ok += gap is not None and gap >= 20
            rows.append(
                (s, summ.k_opt, summ.k_mod, summ.k_ge, summ.passes, summ.passes_live,
                 " ".join(map(str, summ.failing)), summ.crossover, gap)
            )
        em.table(
            "tsp_study.csv",
            ["seed", "k_opt", "k_mod", "k_ge", "thm1_pass", "thm1_pass_live", "failing_levels", "crossover", "crossover_gap"],
            rows,
        )
        return f"theorem-1 conditions: {passed}/{args.study} strict, {live}/{args.study} ignoring dead ends; crossover >= 20 above optimum: {cross_ok}/{args.study}"

    inst = read_instance(args.instance) if args.instance else tsp_generate(args.cities, args.seed)
    write_instance(inst, em.path("tsp_instance.txt"))
    if args.mode == "enumerate":
        land = tsp_enumerate(inst, threads=threads)
    else:
        land = tsp_sample(inst, args.samples, args.sample_seed if args.sample_seed is not None else args.seed, threads=threads)
    dist, kernel = land.dist, land.kernel
    nw = compute_nweights(dist, kernel)
    rep = check_conditions(dist, kernel, nw, k_mod=land.k_mod)
    em.table("tsp_p.csv", ["k", "p"], [(k, p) for k, p in zip(dist.costs, dist.p)])
    nz = np.argwhere(kernel.pn > 0)
    em.table("tsp_kernel.csv", ["k1", "k2", "pn"], [(dist.k_opt + a, dist.k_opt + b, kernel.pn[a, b]) for a, b in nz])
    em.table(
        "tsp_levels.csv",
        ["k", "rbar", "rbar_support", "pn_less", "rbar_p_less", "r_kk", "shortcut", "thm1", "ok"],
        [(lv.k, lv.rbar, support_rbar(nw, lv.k), lv.pn_less, lv.rbar_p_less, lv.r_kk, lv.shortcut, lv.thm1, lv.ok)
         for lv in theorem1_levels(land, nw)],
    )
    _conditions_table(em, "tsp_conditions.csv", dist, kernel, nw, rep)
    c, e, en = improvement_curve(dist, kernel)
    em.table("tsp_rates.csv", ["k", "e_imp", "en_imp"], list(zip(c, e, en)))
    msg = f"k_opt={land.k_opt} k_mod={land.k_mod} k_ge={land.k_ge} tours={land.tours_evaluated} crossover={rate_crossover(dist, kernel)}"
    if land.sampled:
        tc = nonincreasing_trend(nw, land.k_ge, max_delta=args.max_delta)
        em.table("tsp_rkge.csv", ["delta", "r", "isotonic"], list(zip(tc.deltas, tc.r, tc.fit)))
        msg += f" unimodal(smoothed)={smoothed_unimodal(dist.p)} r(k_ge) trend={tc.trend} explained={tc.explained:.3f} strict={tc.strict}"
    return msg


def cmd_toy(args, em: Emitter) -> str:
    rows4, rows5, rows6 = [], [], []
    for b in args.b:
        dist, kernel = toy_space(b, args.kmax, window=args.window)
        one = expected_improvement(dist, kernel, args.k)
        two = expected_improvement_to_target(dist, kernel, args.k, args.t)
        rows4.append((b, pn_less(kernel, args.k), p_less(dist, args.k)))
        rows5.append((b, one.en_imp, one.e_imp))
        rows6.append((b, two.en_imp, two.e_imp))
    em.table("toy_table4.csv", ["lipschitz_bound", "pn_less", "p_less"], rows4)
    em.table("toy_table5.csv", ["lipschitz_bound", "en_imp", "e_imp"], rows5)
    em.table("toy_table6.csv", ["lipschitz_bound", "en_imp_t", "e_imp_t"], rows6)
    return f"k={args.k} t={args.t} window={args.window}"


def _bench_spec(args) -> BenchmarkClassSpec:
    return BenchmarkClassSpec(interpolation=args.interpolation)


def cmd_benchmark(args, em: Emitter) -> str:
    spec = _bench_spec(args)
    n = parse_size(args.n)
    rows = []
    for b in args.b:
        dist, kernel = benchmark_space(b, n, spec)
        sc = savings_scan(dist, kernel, args.t, n, imp_mode=args.imp_mode)
        rows.append((b, sc.best_k, _fixed(sc.best_savings)))
        write_curve_csv(em.path(f"benchmark_curve_b{b}.csv"), sc)
    em.table("benchmark_table7.csv", ["lipschitz_bound", "starting_cost", "savings"], rows)
    return f"t={args.t} n={n} interpolation={spec.interpolation}"


def cmd_descent(args, em: Emitter) -> str:
    spec = _bench_spec(args)
    n = parse_size(args.n)
    dist, kernel = benchmark_space(args.b, n, spec)
    if args.k is not None:
        t = args.t[0]
        res = lbd_steps(dist, kernel, DescentSpec(args.k, t, n), imp_mode=args.imp_mode)
        em.table("descent_steps.csv", ["j", "steps"], sorted(res.steps_table.items()))
        em.table(
            "descent_lbd.csv",
            ["starting_cost", "target_cost", "blind", "lbd", "savings", "beneficial"],
            [(args.k, t, res.blind_steps, res.lbd_steps, res.savings, res.beneficial)],
        )
        extra = ""
        if isinstance(n, Infinite):
            extra = f" steps_infinite={float(steps_infinite(dist, kernel, args.k, t))!r}"
        return f"lbd={float(res.lbd_steps)!r} blind={float(res.blind_steps)!r} savings={res.savings:.4f}{extra}"
    rows = []
    for t in args.t:
        sc = savings_scan(dist, kernel, t, n, imp_mode=args.imp_mode)
        rows.append((t, sc.best_k, _fixed(sc.best_savings)))
        write_curve_csv(em.path(f"descent_curve_t{t}.csv"), sc)
    em.table("descent_table8.csv", ["target_cost", "starting_cost", "savings"], rows)
    return f"b={args.b} n={n}"


def cmd_rates(args, em: Emitter) -> str:
    dist, kernel = _family(args)
    c, e, en = improvement_curve(dist, kernel)
    em.table(f"rates_{args.family}.csv", ["k", "e_imp", "en_imp"], list(zip(c, e, en)))
    return f"crossover={rate_crossover(dist, kernel)}"


def _family(args):
    n = parse_size(args.n)
    if args.family == "toy":
        return toy_space(args.b, args.kmax, n)
    if args.family == "benchmark":
        return benchmark_space(args.b, n, _bench_spec(args))
    if args.family == "sat2":
        return sat2_distribution(), sat2_kernel()
    land = tsp_enumerate(tsp_generate(args.cities, args.seed), threads=_threads(args))
    return land.dist, land.kernel


class UsageError(Exception):
    pass


def cmd_simulate(args, em: Emitter) -> str:
    if args.family != "tsp" and (args.k is None or args.t is None):
        raise UsageError("--k and --t are required unless --family tsp")
    threads = _threads(args)
    n = parse_size(args.n)
    spec = DescentSpec(args.k, args.t, n)
    cfg = SimConfig(args.runs, args.seed, spec, args.step_cap, threads)
    trace = em.path("simulate_trace.csv") if args.trace else None
    rows = []
    if args.family == "tsp":
        inst = tsp_generate(args.cities, args.instance_seed)
        land = tsp_enumerate(inst, threads=threads)
        k = args.k if args.k is not None else land.k_mod
        t = args.t if args.t is not None else land.k_opt + 10
        n = land.neighbours_per_tour if args.n == "inf" else n
        cfg = SimConfig(args.runs, args.seed, DescentSpec(k, t, n), args.step_cap, threads)
        real = simulate_tsp_descent(inst, cfg, without_replacement=args.without_replacement, trace_path=trace)
        model = simulate_lbd(land.dist, land.kernel, cfg)
        analytic = lbd_steps(land.dist, land.kernel, cfg.spec).lbd_steps
        for label, s in (("tsp_tours", real), ("tsp_kernel", model)):
            rows.append((label, analytic, s.mean_steps, s.std_error, s.z_score(analytic), s.capped_runs,
                         s.empirical_success_rate, abs(s.z_score(analytic)) <= 3))
        em.table("simulate.csv", ["label", "analytic", "mean_steps", "std_error", "z", "capped_runs", "success_rate", "agrees_3sigma"], rows)
        diff = real.mean_steps - model.mean_steps
        return f"k={k} t={t} tours={real.mean_steps:.2f} kernel={model.mean_steps:.2f} discrepancy={diff:.2f} trace={real.trace_hash}"
    dist, kernel = _family(args)
    sb = simulate_blind(dist, args.t, cfg)
    sl = simulate_lbd(dist, kernel, cfg, trace_path=trace)
    for label, analytic, s in (("blind", blind_steps(dist, args.t), sb), ("lbd", lbd_steps(dist, kernel, spec).lbd_steps, sl)):
        z = s.z_score(analytic)
        rows.append((label, analytic, s.mean_steps, s.std_error, z, s.capped_runs, s.empirical_success_rate, abs(z) <= 3))
    em.table("simulate.csv", ["label", "analytic", "mean_steps", "std_error", "z", "capped_runs", "success_rate", "agrees_3sigma"], rows)
    return " ".join(f"{r[0]}: z={r[4]:.2f} agree={bool(r[7])}" for r in rows)


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="base seed (default 0)")
    p.add_argument("--out-dir", type=Path, default=d(Path(".")), help="output directory")
    p.add_argument("--format", choices=["csv", "dat"], default=d("csv"), help="also write whitespace .dat files")
    p.add_argument("--threads", type=int, default=d(None), help=f"worker threads, 0 = auto (env {ENV_THREADS})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="landscape-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    _common(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        _common(p, suppress=True)
        p.set_defaults(fn=fn)
        return p

    p = add("sat2", cmd_sat2, "MAX-2-SAT class: p, NWeights, rbar, t/a")
    p.add_argument("--k", type=int, default=17, help="level for the r/posr table")

    p = add("tsp", cmd_tsp, "TSP under 2-opt: enumerate, sample, or multi-seed study")
    p.add_argument("--cities", type=int, default=10)
    p.add_argument("--mode", choices=["enumerate", "sample"], default="enumerate")
    p.add_argument("--samples", type=int, default=400_000)
    p.add_argument("--sample-seed", type=int, default=None, help="sampling seed (default --seed)")
    p.add_argument("--instance", type=Path, default=None, help="read instance file instead of generating")
    p.add_argument("--study", type=int, default=0, metavar="N", help="enumerate N seeds starting at --seed")
    p.add_argument("--max-delta", type=int, default=50)

    def toy_like(p):
        p.add_argument("--kmax", type=int, default=200)

    p = add("toy", cmd_toy, "uniform toy space, improvement tables")
    p.add_argument("--b", type=_ints, default=[1, 5, 10, 50, 200], help="bounds, e.g. 1,5,10 or 1:17:2")
    toy_like(p)
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--t", type=int, default=15)
    p.add_argument("--window", choices=["clipped", "full"], default="clipped")

    def bench_like(p):
        p.add_argument("--n", default="50", help="neighbourhood size or 'inf'")
        p.add_argument("--interpolation", choices=["next", "literal"], default="next")
        p.add_argument("--imp-mode", choices=["normalized", "reweighted"], default="normalized")

    p = add("benchmark", cmd_benchmark, "benchmark class: best savings per Lipschitz bound")
    p.add_argument("--b", type=_ints, default=list(range(1, 18, 2)))
    p.add_argument("--t", type=int, default=10)
    bench_like(p)

    p = add("descent", cmd_descent, "benchmark class: best savings per target, or one lbd evaluation")
    p.add_argument("--b", type=int, default=7)
    p.add_argument("--t", type=_ints, default=list(range(0, 41, 5)))
    p.add_argument("--k", type=int, default=None, help="single starting cost (uses the first --t)")
    bench_like(p)

    def family_like(p):
        p.add_argument("--family", choices=["toy", "benchmark", "sat2", "tsp"], default="toy")
        p.add_argument("--b", type=int, default=10)
        p.add_argument("--kmax", type=int, default=200)
        p.add_argument("--cities", type=int, default=10)
        p.add_argument("--n", default="50")
        p.add_argument("--interpolation", choices=["next", "literal"], default="next")

    p = add("rates", cmd_rates, "per-level expected improvement curves")
    family_like(p)

    p = add("simulate", cmd_simulate, "Monte Carlo check of blind and local blind descent step counts")
    family_like(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--runs", type=int, default=100_000)
    p.add_argument("--step-cap", type=int, default=10**7)
    p.add_argument("--trace", action="store_true", help="write simulate_trace.csv (run,phase,step,cost)")
    p.add_argument("--instance-seed", type=int, default=0)
    p.add_argument("--without-replacement", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.threads is not None and args.threads < 0:
        ap.error("--threads must be >= 0")
    em = Emitter(args.out_dir, args.format)
    t0 = time.perf_counter()
    try:
        msg = args.fn(args, em)
    except LandscapeError as exc:
        print(f"landscape-lab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError) as exc:
        ap.print_usage(sys.stderr)
        print(f"landscape-lab {args.command}: {exc}", file=sys.stderr)
        return 2
    manifest = {
        "command": ["landscape-lab", *(argv if argv is not None else sys.argv[1:])],
        "seed": args.seed,
        "version": __version__,
        "files": em.files,
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    (args.out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    if msg:
        print(msg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
