import csv
import json
import subprocess
import sys

import pytest

from fluxqubit import artifacts
from fluxqubit import config as cfg
from fluxqubit.cli import EXIT_CONFIG, EXIT_CUTOFF, EXIT_OK, main
from fluxqubit.errors import ValidationError

SMALL_SPECTRUM = ["--set", "circuit.truncation=8", "--set", "circuit.n_levels=3",
                  "--set", 'circuit.f_grid={"start": 0.49, "stop": 0.51, "num": 3}']


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_spectrum_writes_files_and_manifest(tmp_path):
    assert main(["spectrum", "--output", str(tmp_path)] + SMALL_SPECTRUM) == EXIT_OK
    out = tmp_path / "spectrum"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["exit_status"] == 0 and manifest["error"] is None
    assert manifest["config_hash"] == cfg.config_hash(manifest["config"])
    assert set(manifest["files"]) == {"spectrum_loop.csv", "spectrum_third-junction.csv"}
    for name, digest in manifest["files"].items():
        assert artifacts.sha256(out / name) == digest
    rows = _read_csv(out / "spectrum_loop.csv")
    assert rows[0][:4] == ["f", "E0", "E1", "E2"] and len(rows) == 4
    assert b"\r\n" not in (out / "spectrum_loop.csv").read_bytes()


def test_rerun_is_byte_identical(tmp_path):
    for run in ("a", "b"):
        assert main(["matrix-elements", "--output", str(tmp_path / run),
                     "--set", "circuit.truncation=8"]) == EXIT_OK
    for name in ("levels.csv", "matrix_elements.csv"):
        a = (tmp_path / "a" / "matrix-elements" / name).read_bytes()
        b = (tmp_path / "b" / "matrix-elements" / name).read_bytes()
        assert a == b


def test_config_file_and_override_precedence(tmp_path):
    conf = tmp_path / "run.json"
    conf.write_text(json.dumps({"circuit": {"truncation": 8, "f": 0.45},
                                "output_dir": str(tmp_path / "from-config")}))
    assert main(["matrix-elements", "--config", str(conf), "--set", "circuit.f=0.5"]) == EXIT_OK
    manifest = json.loads((tmp_path / "from-config" / "matrix-elements" / "manifest.json")
                          .read_text())
    assert manifest["config"]["circuit"]["f"] == 0.5
    parity = [r[2] for r in _read_csv(tmp_path / "from-config" / "matrix-elements" / "levels.csv")]
    assert parity[1:] == ["1", "-1", "1", "-1", "1"]


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cfg.OUTPUT_ENV, str(tmp_path / "env"))
    assert main(["matrix-elements", "--set", "circuit.truncation=8"]) == EXIT_OK
    assert (tmp_path / "env" / "matrix-elements" / "levels.csv").exists()


@pytest.mark.parametrize("override", [
    "circuit.bogus=1",
    "circuit.truncation=1.5",
    "circuit.alpha=2.0",
    "nonsense=3",
    "circuit.f_grid=[]",
])
def test_invalid_config_exits_2(tmp_path, override):
    assert main(["spectrum", "--output", str(tmp_path), "--set", override]) == EXIT_CONFIG


def test_missing_block_and_bad_file(tmp_path):
    assert main(["zeno", "--output", str(tmp_path), "--set", "drive.omega_q=1.0"]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["spectrum", "--config", str(bad)]) == EXIT_CONFIG


def test_cutoff_leak_exits_4(tmp_path):
    code = main(["oscillator", "--output", str(tmp_path),
                 "--set", "drive.lambda_x=0.02", "--set", "oscillator.g2=0.05",
                 "--set", "oscillator.fock_cutoff=4", "--set", "oscillator.periods=20"])
    assert code == EXIT_CUTOFF
    manifest = json.loads((tmp_path / "oscillator" / "manifest.json").read_text())
    assert manifest["exit_status"] == EXIT_CUTOFF
    assert manifest["error"].startswith("CutoffLeakError")


def test_dispersive_check_subcommand(tmp_path):
    code = main(["dispersive-check", "--output", str(tmp_path), "--set", "drive.omega_q=1.0",
                 "--set", "oscillator.omega=0.05", "--set", "oscillator.g1=0.0475",
                 "--set", "oscillator.g2=0", "--set", "oscillator.fock_cutoff=30"])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "dispersive-check" / "dispersive.json").read_text())
    assert report["passed"] and report["error"] < report["bound"]


def test_zeno_subcommand_seeded(tmp_path):
    args = ["zeno", "--set", "drive.omega_0=10", "--set", "bath.modes=11", "--set", "seed=7",
            "--set", "drive.x_grid=[0.0, 2.4048]"]
    assert main(args + ["--output", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--output", str(tmp_path / "b")]) == EXIT_OK
    a = (tmp_path / "a" / "zeno" / "bath.csv").read_bytes()
    assert a == (tmp_path / "b" / "zeno" / "bath.csv").read_bytes()
    rows = _read_csv(tmp_path / "a" / "zeno" / "zeno.csv")
    assert float(rows[2][1]) > float(rows[1][1])


def test_overrides_parse_json_values():
    raw = cfg.apply_overrides({}, ["drive.transverse=rotating", "drive.x=1.5", "seed=3"])
    assert raw == {"drive": {"transverse": "rotating", "x": 1.5}, "seed": 3}
    with pytest.raises(ValidationError):
        cfg.apply_overrides({}, ["a.b.c=1"])
    with pytest.raises(ValidationError):
        cfg.apply_overrides({}, ["noequals"])


def test_format_value():
    assert artifacts.format_value(0.1) == "0.10000000000000001"
    assert artifacts.format_value(True) == "1"
    assert artifacts.format_value(None) == ""
    with pytest.raises(TypeError):
        artifacts.format_value(1j)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fluxqubit", "matrix-elements",
                           "--output", str(tmp_path), "--set", "circuit.truncation=8"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip().endswith("matrix-elements")
