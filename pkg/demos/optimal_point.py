"""Spectrum and current matrix elements near the symmetric flux point."""

import textwrap

import numpy as np

from fluxqubit.circuit import CircuitParams, diagonalize

for f in (0.5, 0.49):
    r = diagonalize(CircuitParams(f=f))
    print(f"f = {f}")
    print("  E_k / E_c:", np.round(r.energies, 4))
    if r.parity is not None:
        print("  parity:   ", r.parity)
    print("  |I_ij| / I_0 (loop operator):")
    table = np.array2string(np.abs(r.current_elements), precision=4, suppress_small=True)
    print(textwrap.indent(table, "    "))
