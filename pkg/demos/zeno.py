"""Decay into a discrete bath switched off by longitudinal modulation."""

import numpy as np

from fluxqubit.driven import DriveParams, bessel_zero
from fluxqubit.zeno import baseline_half_life, decay_rate_scan, default_bath

p = DriveParams(omega_q=1.0, lambda_x=0.0, lambda_z=0.0, omega_0=10.0)
bath = default_bath(p)
horizon = 5 * baseline_half_life(bath)
scan = decay_rate_scan(p, bath, np.linspace(0, 6, 121), horizon)

print(f"survival after {horizon:.1f} (5 undriven half-lives)")
for x, s in zip(scan.x[::10], scan.survival[::10]):
    print(f"  x = {x:4.1f}  {s:.4f}  " + "#" * int(40 * s))
print("decay minima:", np.round(scan.minima_x, 3),
      "  J_0 zeros:", [round(bessel_zero(0, k), 3) for k in (1, 2)])
