"""Command-line front end: ``fluxqubit <subcommand> [--config FILE] [--set block.key=value ...]``.

Every run writes its CSV/JSON artifacts and a ``manifest.json`` (config
hash, package versions, wall time, sha256 of every file) into
``<output>/<subcommand>/``. The output root comes from ``--output``, the
config's ``output_dir``, the ``FLUXQUBIT_OUTPUT_DIR`` environment variable
or ``./fluxqubit-out``, in that order.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 Fock-cutoff leak.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from dataclasses import asdict, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import config as cfg
from .artifacts import sha256, versions, write_csv, write_json
from .circuit import LOOP, THIRD_JUNCTION, CircuitParams, diagonalize, flux_sweep, sweep_rows
from .driven import (
    DriveParams,
    bessel_zero,
    dressed_states,
    effective_sideband_amplitude,
    nominal_rabi_period,
    resonance_grid,
    spectroscopy_scan,
    transparency_scan,
)
from .errors import CutoffLeakError, FluxQubitError, NumericError, ValidationError
from .oscillator import (
    OscillatorParams,
    coexistence_experiment,
    dispersive_check,
    effective_evolve,
    effective_params,
    build_full_model,
    evolve_stroboscopic,
    product_state,
    tune_oscillator,
)
from .zeno import baseline_half_life, decay_rate_scan, default_bath

log = logging.getLogger("fluxqubit")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CUTOFF = 4

DEFAULT_F_GRID = {"start": 0.46, "stop": 0.54, "num": 81}
DEFAULT_X_GRID = {"start": 0.0, "stop": 6.0, "num": 121}
SPECTROSCOPY_ORDERS = (0, 1, 2)
SPECTROSCOPY_HALF_WIDTH = 0.012
SPECTROSCOPY_HORIZON = 1500.0
TRANSPARENCY_RABI_PERIODS = 20


def _circuit(c: dict, f: float | None = None) -> CircuitParams:
    return CircuitParams(alpha=c["alpha"], ej_over_ec=c["ej_over_ec"],
                         f=c["f"] if f is None else f, truncation=c["truncation"],
                         n_levels=c["n_levels"])


def _drive(d: dict) -> DriveParams:
    p = DriveParams(omega_q=d["omega_q"], lambda_x=d["lambda_x"], lambda_z=d["lambda_z"],
                    omega_0=d["omega_0"], transverse=d["transverse"])
    return p.with_x(d["x"]) if d["x"] is not None else p


def _oscillator(o: dict) -> OscillatorParams:
    return OscillatorParams(omega=o["omega"], g1=o["g1"], g2=o["g2"], fock_cutoff=o["fock_cutoff"])


def _grid(block: dict, key: str, default) -> np.ndarray:
    spec = block[key] if block[key] is not None else default
    return cfg.grid_values(key, spec)


# --- subcommands ----------------------------------------------------------------


def run_spectrum(c: dict, out: Path) -> list[Path]:
    base = _circuit(c["circuit"])
    f = _grid(c["circuit"], "f_grid", DEFAULT_F_GRID)
    results = flux_sweep(base, f)
    files = []
    for op in (LOOP, THIRD_JUNCTION):
        header, rows = sweep_rows(results, op)
        files.append(write_csv(out / f"spectrum_{op}.csv", header, rows))
    return files


def run_matrix_elements(c: dict, out: Path) -> list[Path]:
    r = diagonalize(_circuit(c["circuit"]))
    n = r.n_levels
    levels = [[k, r.energies[k], "" if r.parity is None else r.parity[k]] for k in range(n)]
    rows = []
    for i in range(n):
        for j in range(n):
            a, b = r.current_elements[i, j], r.third_junction_elements[i, j]
            rows.append([i, j, a.real, a.imag, abs(a), b.real, b.imag, abs(b)])
    return [
        write_csv(out / "levels.csv", ["k", "E", "parity"], levels),
        write_csv(out / "matrix_elements.csv",
                  ["i", "j", "Re_I_loop", "Im_I_loop", "abs_I_loop",
                   "Re_I_third", "Im_I_third", "abs_I_third"], rows),
    ]


def run_spectroscopy(c: dict, out: Path) -> list[Path]:
    d = c["drive"]
    p = DriveParams(d["omega_q"], d["lambda_x"], d["lambda_z"], d["omega_0"], d["transverse"])
    if d["omega_0_grid"] is None:
        grid = resonance_grid(p.omega_q, SPECTROSCOPY_ORDERS, SPECTROSCOPY_HALF_WIDTH * p.omega_q)
    else:
        grid = cfg.grid_values("omega_0_grid", d["omega_0_grid"])
    horizon = d["horizon"] or SPECTROSCOPY_HORIZON
    scan = spectroscopy_scan(p, grid, horizon, x=d["x"], samples=d["samples"], tol=d["tol"])
    peak = np.zeros(grid.size, dtype=int)
    peak[scan.extrema] = 1
    rows = zip(grid, scan.max_population, scan.n, peak)
    peaks = [[grid[i], scan.max_population[i], scan.n[i], p.omega_q / (scan.n[i] + 1)]
             for i in scan.extrema]
    return [
        write_csv(out / "spectroscopy.csv", ["omega_0", "max_population", "n", "is_peak"], rows),
        write_csv(out / "peaks.csv", ["omega_0", "max_population", "n", "predicted"], peaks),
    ]


def run_transparency(c: dict, out: Path) -> list[Path]:
    d = c["drive"]
    n = d["n"]
    p = DriveParams(d["omega_q"], d["lambda_x"], 0.0, d["omega_q"] / (n + 1), d["transverse"])
    x = _grid(d, "x_grid", DEFAULT_X_GRID)
    horizon = d["horizon"] or TRANSPARENCY_RABI_PERIODS * nominal_rabi_period(p)
    scan = transparency_scan(n, p, x, horizon, samples=d["samples"], tol=d["tol"])
    zeros = [bessel_zero(n, k) for k in range(1, 21)]
    minima = [[x[i], scan.max_population[i], min(zeros, key=lambda z: abs(z - x[i]))]
              for i in scan.extrema]
    return [
        write_csv(out / "transparency.csv", ["x", "max_population"], zip(x, scan.max_population)),
        write_csv(out / "minima.csv", ["x", "max_population", "nearest_zero"], minima),
    ]


def run_zeno(c: dict, out: Path) -> list[Path]:
    d, b = c["drive"], c["bath"]
    p = DriveParams(d["omega_q"], 0.0, 0.0, d["omega_0"], d["transverse"])
    bath = default_bath(p, d["n"], modes=b["modes"], width=b["width"],
                        half_life_periods=b["half_life_periods"], phase_seed=c["seed"])
    horizon = d["horizon"] or b["horizon_half_lives"] * baseline_half_life(bath)
    x = _grid(d, "x_grid", DEFAULT_X_GRID)
    scan = decay_rate_scan(p, bath, x, horizon, n=d["n"], tol=d["tol"], method=b["method"])
    minima = [[scan.x[i], scan.survival[i], scan.nearest_zero(scan.x[i])] for i in scan.minima]
    bath_rows = [[w, g.real, g.imag] for w, g in zip(bath.frequencies, bath.couplings)]
    return [
        write_csv(out / "zeno.csv", ["x", "survival", "decay"],
                  zip(scan.x, scan.survival, scan.decay)),
        write_csv(out / "minima.csv", ["x", "survival", "nearest_zero"], minima),
        write_csv(out / "bath.csv", ["omega", "Re_g", "Im_g"], bath_rows),
        write_json(out / "zeno.json", {"horizon": horizon,
                                       "baseline_half_life": baseline_half_life(bath)}),
    ]


def run_oscillator(c: dict, out: Path) -> list[Path]:
    """Full-model and effective-model photon traces side by side.

    ``lambda_model = "bessel"`` feeds the effective model ``lambda_x J_n(x)``;
    ``"drive"`` uses the first-order sideband amplitude of the configured
    drive shape, which differs for the linear drive.
    """
    d, o_cfg = c["drive"], c["oscillator"]
    p, o, n = _drive(d), _oscillator(o_cfg), d["n"]
    photons = o_cfg["photons"]
    if photons is not None:
        o = replace(o, omega=tune_oscillator(p, o, n, photons).omega)
    if o_cfg["lambda_model"] not in ("bessel", "drive"):
        raise ValidationError("oscillator.lambda_model must be 'bessel' or 'drive'")
    lam = effective_sideband_amplitude(n, p) if o_cfg["lambda_model"] == "drive" else None
    em = effective_params(p, o, n, lambda_n=lam)
    rate = max(em.single_photon_rate if photons != 2 else em.two_photon_rate, 1e-12)
    periods = o_cfg["periods"] or min(max(int(math.ceil(4 * 2 * math.pi / rate / p.period)), 64),
                                      200_000)
    dressed = dressed_states(p, n)
    full = evolve_stroboscopic(build_full_model(p, o),
                               product_state(dressed.excited, o.fock_cutoff), periods)
    eff = effective_evolve(em, o.omega, product_state([0.0, 1.0], o.fock_cutoff),
                           full.t, fock_cutoff=o.fock_cutoff)
    rows = zip(full.t, full.mean_photon_number, eff.mean_photon_number,
               full.qubit_population(dressed.excited), eff.excited_population)
    return [
        write_csv(out / "oscillator.csv",
                  ["t", "n_full", "n_effective", "dressed_excited_full", "excited_effective"], rows),
        write_json(out / "oscillator.json", {"effective_model": asdict(em), "omega": o.omega,
                                             "dressed_splitting": dressed.omega_r}),
    ]


def run_dispersive_check(c: dict, out: Path) -> list[Path]:
    o_cfg = c["oscillator"]
    chk = dispersive_check(_oscillator(o_cfg), c["drive"]["omega_q"], levels=o_cfg["levels"],
                           form=o_cfg["form"])
    rows = [[branch, k, chk.effective[branch][k], chk.exact[branch][k]]
            for branch in ("ground", "excited") for k in range(chk.levels)]
    return [
        write_csv(out / "dispersive.csv", ["branch", "level", "effective", "exact"], rows),
        write_json(out / "dispersive.json", {"error": chk.error, "bound": chk.bound,
                                             "passed": chk.passed, "form": o_cfg["form"]}),
    ]


def run_coexistence(c: dict, out: Path) -> list[Path]:
    d, o_cfg = c["drive"], c["oscillator"]
    report = coexistence_experiment(_drive(d), _oscillator(o_cfg), d["n"],
                                    min_amplitude=o_cfg["min_amplitude"])
    keys = ["label", "photons", "omega", "predicted", "extracted", "relative_error", "amplitude",
            "detected"]
    rows = [[r[k] for k in keys] for r in report["runs"] + report["controls"]]
    return [write_csv(out / "coexistence.csv", keys, rows),
            write_json(out / "coexistence.json", report)]


COMMANDS = {
    "spectrum": run_spectrum,
    "matrix-elements": run_matrix_elements,
    "spectroscopy": run_spectroscopy,
    "transparency": run_transparency,
    "zeno": run_zeno,
    "oscillator": run_oscillator,
    "dispersive-check": run_dispersive_check,
    "coexistence": run_coexistence,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluxqubit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON configuration file")
        s.add_argument("--set", action="append", default=[], metavar="BLOCK.KEY=VALUE",
                       help="override a scalar field (repeatable)")
        s.add_argument("--output", help="output root directory")
    return parser


def run(command: str, raw: dict, output: str | None = None) -> tuple[int, Path | None]:
    """Validate, execute and record one subcommand; returns the exit code and output directory."""
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    try:
        config = cfg.validate(raw, command)
    except ValidationError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG, None
    out = cfg.output_dir(config, output) / command
    out.mkdir(parents=True, exist_ok=True)
    files: list[Path] = []
    status, error = EXIT_OK, None
    try:
        files = COMMANDS[command](config, out)
    except ValidationError as exc:
        status, error = EXIT_CONFIG, exc
    except CutoffLeakError as exc:
        status, error = EXIT_CUTOFF, exc
    except (NumericError, FluxQubitError, ArithmeticError) as exc:
        status, error = EXIT_NUMERIC, exc
    if error is not None:
        log.error("%s failed: %s", command, error)
    manifest = {
        "subcommand": command,
        "config": config,
        "config_hash": cfg.config_hash(config),
        "versions": versions(),
        "started": started,
        "wall_time_s": time.perf_counter() - t0,
        "exit_status": status,
        "error": None if error is None else f"{type(error).__name__}: {error}",
        "files": {f.name: sha256(f) for f in files},
    }
    write_json(out / "manifest.json", manifest)
    return status, out


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        raw = cfg.apply_overrides(cfg.load(args.config), args.set)
    except ValidationError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    status, out = run(args.command, raw, args.output)
    if out is not None and status == EXIT_OK:
        print(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
