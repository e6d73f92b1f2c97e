#!/usr/bin/env python3
"""Error-vs-distance linearity experiment over many seeded families.

For each seed, sweeps the coupling strength over a log grid, fits
max trajectory error against the computed distance on the small-coupling
half, and reports the distribution of fit quality. Writes one CSV row per
(seed, coupling) pair; pipe the file into any plotter.

Usage: python3 scripts/linearity_experiment.py [seeds] [out.csv]
"""

import sys

import numpy as np

from npdg.families import FamilyParams, sweep_delta

COMBOS = [(1, 2), (2, 2), (3, 2), (1, 3), (2, 3)]


def main(n_seeds=100, out_path="linearity.csv"):
    grid = list(np.logspace(-4.0, -1.0, 8))
    rows = ["seed,delta_in,delta_star,max_error,bound_at_max,holds"]
    r_squared = []
    intercept_ok = 0
    for seed in range(n_seeds):
        nb, players = COMBOS[seed % len(COMBOS)]
        params = FamilyParams(n_per_block=nb, n_players=players, delta=grid[0], seed=seed)
        report = sweep_delta(params, grid)
        for row in report.rows:
            holds = "true" if row.holds else "false"
            rows.append(
                f"{seed},{row.delta_in:.17g},{row.delta_star:.17g},{row.max_error:.17g},{row.bound_at_max:.17g},{holds}"
            )
        fit = report.fit
        r_squared.append(fit.r_squared)
        ds_max = max(r.delta_star for r in report.rows[: fit.n_points])
        if abs(fit.intercept) <= 0.05 * abs(fit.slope * ds_max):
            intercept_ok += 1
        if report.failed:
            print(f"seed {seed}: sweep failed")

    with open(out_path, "w") as fh:
        fh.write("\n".join(rows) + "\n")

    r_squared = np.array(r_squared)
    print(f"wrote {out_path} ({len(rows) - 1} rows)")
    print(f"r^2 over {n_seeds} seeds: min {r_squared.min():.6f}  median {np.median(r_squared):.6f}")
    print(f"seeds with r^2 >= 0.99: {int(np.sum(r_squared >= 0.99))}/{n_seeds}")
    print(f"seeds with near-zero intercept: {intercept_ok}/{n_seeds}")


if __name__ == "__main__":
    seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 100
    out = sys.argv[2] if len(sys.argv) > 2 else "linearity.csv"
    main(seeds, out)
