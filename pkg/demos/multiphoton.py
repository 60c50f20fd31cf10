"""Spectroscopy of a qubit under combined transverse and longitudinal drive."""

import numpy as np

from fluxqubit.driven import DriveParams, resonance_grid, spectroscopy_scan

p = DriveParams(omega_q=1.0, lambda_x=0.02, lambda_z=0.0, omega_0=1.0)
grid = resonance_grid(p.omega_q, (0, 1, 2), 0.012)

for label, x in (("longitudinal drive on (x = 1.5)", 1.5), ("longitudinal drive off", None)):
    scan = spectroscopy_scan(p, grid, horizon=1500.0, x=x, samples=3001)
    print(label)
    for i in scan.extrema:
        print(f"  peak at omega_0 = {grid[i]:.4f}  (omega_q/{scan.n[i] + 1} = "
              f"{1 / (scan.n[i] + 1):.4f}), max population {scan.max_population[i]:.3f}")
    if scan.extrema.size == 0:
        print("  no peaks")
