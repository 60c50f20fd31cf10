"""Single- and two-photon exchange between a dressed qubit and a slow oscillator.

Takes about half a minute.
"""

from fluxqubit.oscillator import coexistence_experiment, default_setup

drive, osc = default_setup(0)
report = coexistence_experiment(drive, osc, 0)
print(f"predicted rates: 2 beta1 = {report['predicted']['single']:.4e}, "
      f"2 sqrt2 beta2 = {report['predicted']['two']:.4e}")
for run in report["runs"] + report["controls"]:
    extracted = "none" if run["extracted"] is None else f"{run['extracted']:.4e}"
    print(f"  {run['label']:<36} omega = {run['omega']:.5f}  extracted {extracted}  "
          f"swing {run['amplitude']:.3g}")
