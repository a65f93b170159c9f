#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import argparse
import csv
import os
import statistics
import tempfile
import time
from typing import Dict, List

from qlsw.configs import get_config

# ------------------------------ Config ----------------------------------------

HERE = os.path.dirname(os.path.abspath(__file__))
INSTANCES = os.path.join(HERE, "qlsw", "instances")

# rotated instances with the two input states
ROTATED = ["rotated_R1_b1", "rotated_R1_b2", "rotated_R2_b1", "rotated_R2_b2"]
# one grid over the three eigenvalue sets
GRID = "grid_sets"

# -------------------------- Small helpers -------------------------------------


def _instance(name: str) -> str:
    return os.path.join(INSTANCES, name + ".json")


def stats(xs: List[float]) -> Dict[str, float]:
    return dict(
        mean=statistics.mean(xs),
        median=statistics.median(xs),
        p95=(statistics.quantiles(xs, n=20)[18] if len(xs) >= 20 else max(xs)),
        min=min(xs),
        max=max(xs),
    )


def run_rotated(name: str, out: str, seed: int, shots: int, trials: int, noise: str):
    config = get_config(_instance(name), out=os.path.join(out, name), variant="photonic",
                        noise=noise, seed=seed, shots=shots, trials=trials)
    bench = config.create_workbench()
    t0 = time.perf_counter()
    ideal = bench.solve("optimized")
    t1 = time.perf_counter()
    record, report = bench.photonic()
    t2 = time.perf_counter()
    return dict(
        name=name,
        p=ideal["success_probability"],
        exact=record.fidelity,
        tomo=report.fidelity,
        err=report.fidelity_error,
        share=record.double_share,
        t_solve=t1 - t0,
        t_photonic=t2 - t1,
    )


def run_grid(out: str, seed: int, shots: int, trials: int, noise: str, threaded: bool):
    config = get_config(out=os.path.join(out, GRID), variant="photonic", noise=noise, seed=seed,
                        shots=shots, trials=trials, threaded=threaded)
    t0 = time.perf_counter()
    _, rows = config.create_sweep(_instance(GRID)).save()
    return rows, time.perf_counter() - t0

# ------------------------------ Main ------------------------------------------


def main():
    p = argparse.ArgumentParser(description="Time the photonic runs and print their fidelities.")
    p.add_argument("--iters", type=int, default=3, help="Measured iterations.")
    p.add_argument("--seed", type=int, default=1, help="Seed of the first iteration.")
    p.add_argument("--shots", type=int, default=10000, help="Tomography shots per basis.")
    p.add_argument("--trials", type=int, default=500, help="Monte-Carlo trials.")
    p.add_argument("--noise", default=_instance("noise_default"), help="Noise JSON document.")
    p.add_argument("--threaded", action="store_true", help="Run grid points concurrently.")
    p.add_argument("--csv", help="Optional CSV file to write per-run results.")
    p.add_argument("--res-root", default=os.path.join(tempfile.gettempdir(), "qlsw_bench"),
                   help="Root folder for the reports.")
    args = p.parse_args()

    results = []
    grid_times = []
    for i in range(args.iters):
        seed = args.seed + i
        out = os.path.join(args.res_root, "iter%02d" % i)
        print(f"\nIteration {i + 1}/{args.iters} seed={seed} shots={args.shots} trials={args.trials}")
        print("-----------------------------------------------------------------")
        for name in ROTATED:
            r = run_rotated(name, out, seed, args.shots, args.trials, args.noise)
            r.update(iteration=i, seed=seed)
            results.append(r)
            print(f"  {name:<12} p={r['p']:.4f} F={r['exact']:.4f} "
                  f"F_tomo={r['tomo']:.4f}+-{r['err']:.4f} share={r['share']:.3f} "
                  f"t={r['t_photonic']:.2f}s")
        rows, elapsed = run_grid(out, seed, args.shots, args.trials, args.noise, args.threaded)
        grid_times.append(elapsed)
        for row in rows:
            print(f"  {row['label']:<12} F={row['fidelity']:.4f} "
                  f"F_tomo={row['tomography_fidelity']:.4f}+-{row['fidelity_error']:.4f}")
        print(f"  grid of {len(rows)} points in {elapsed:.2f}s")

    if results:
        t = stats([r["t_photonic"] for r in results])
        g = stats(grid_times)
        print("\n==================== Results ====================")
        print(f"  Photonic run:  mean={t['mean']:.3f}s median={t['median']:.3f}s p95={t['p95']:.3f}s")
        print(f"  Grid sweep:    mean={g['mean']:.3f}s median={g['median']:.3f}s max={g['max']:.3f}s")
        print("=================================================\n")

    if args.csv and results:
        folder = os.path.dirname(os.path.abspath(args.csv))
        os.makedirs(folder, exist_ok=True)
        with open(args.csv, "w", newline="", encoding="utf-8") as f:
            w = csv.DictWriter(f, fieldnames=list(results[0].keys()))
            w.writeheader()
            w.writerows(results)
        print(f"Wrote CSV: {args.csv}")


if __name__ == "__main__":
    main()
