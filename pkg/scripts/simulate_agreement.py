#!/usr/bin/env python3
"""Compare simulated mean step counts with the analytic values on toy and benchmark landscapes."""

import argparse
import time
from pathlib import Path

from landscape_lab.core import INFINITE
from landscape_lab.descent import DescentSpec
from landscape_lab.models import benchmark_space, toy_space
from landscape_lab.simulate import SimConfig, blind_agreement, lbd_agreement, write_sim_csv

CAP = 10**18

# (label, family, bound, k, t, n); k == t with bound None means blind search
CASES = [
    ("blind toy t=10", "toy", 10, 10, 10, None),
    ("blind toy t=100", "toy", 10, 100, 100, None),
    ("blind benchmark t=10", "benchmark", 7, 10, 10, None),
    ("lbd toy b=200 k=60 t=10", "toy", 200, 60, 10, 50),
    ("lbd toy b=10 k=60 t=5 n=inf", "toy", 10, 60, 5, INFINITE),
    ("lbd toy b=5 k=100 t=20 n=10", "toy", 5, 100, 20, 10),
    ("lbd toy b=1 k=30 t=0 n=5", "toy", 1, 30, 0, 5),
    ("lbd benchmark b=7 k=23 t=10", "benchmark", 7, 23, 10, 50),
    ("lbd benchmark b=1 k=23 t=10", "benchmark", 1, 23, 10, 50),
    ("lbd benchmark b=5 k=40 t=20 n=10", "benchmark", 5, 40, 20, 10),
    ("lbd benchmark b=3 k=37 t=10", "benchmark", 3, 37, 10, 50),
    ("lbd benchmark b=9 k=22 t=10", "benchmark", 9, 22, 10, 50),
    ("lbd benchmark b=7 k=t=20", "benchmark", 7, 20, 20, 50),
]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=1000)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/simulate_agreement.csv"))
    args = ap.parse_args()

    rows = []
    for i, (label, fam, b, k, t, n) in enumerate(CASES):
        t0 = time.perf_counter()
        dist, kern = toy_space(b) if fam == "toy" else benchmark_space(b)
        cfg = SimConfig(args.runs, args.seed + i, DescentSpec(k, t, n if n is not None else 50), CAP, args.threads)
        a = blind_agreement(dist, t, cfg, label) if label.startswith("blind") else lbd_agreement(dist, kern, cfg, label)
        rows.append(a)
        print(f"{label:34s} analytic={a.analytic:.6g} sim={a.sim.mean_steps:.6g} z={a.z:+.2f} "
              f"ok={a.ok} ({time.perf_counter() - t0:.1f}s)")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_sim_csv(args.out, rows)
    print(f"{sum(a.ok for a in rows)}/{len(rows)} within 3 sigma -> {args.out}")


if __name__ == "__main__":
    main()
