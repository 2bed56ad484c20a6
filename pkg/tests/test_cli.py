import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from pfcorr import __version__


def run(*args, env_extra=None, check=False):
    env = dict(os.environ)
    env.pop("PFCORR_SEED", None)
    env.update(env_extra or {})
    cp = subprocess.run([sys.executable, "-m", "pfcorr", *args], capture_output=True, text=True, env=env)
    if check:
        assert cp.returncode == 0, cp.stderr
    return cp


def table(text):
    lines = text.splitlines()
    assert lines[0].startswith("# pfcorr ")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_validate():
    cp = run("validate", "--seed", "7", check=True)
    rows = table(cp.stdout)
    assert len(rows) == 4
    assert all(r["status"] == "pass" and r["failures"] == "0" for r in rows)


def test_partition_gaussian():
    cp = run("partition", "--ensemble", "hermitian-beta1", "--n", "3", check=True)
    (row,) = table(cp.stdout)
    assert float(row["z_pfaffian"]) == pytest.approx(26.6573, abs=1e-4)
    assert float(row["z_bruteforce"]) == pytest.approx(26.6573, abs=1e-4)
    assert float(row["rel_gap"]) < 1e-5


def test_partition_large_n_skips_bruteforce():
    (row,) = table(run("partition", "--n", "7", check=True).stdout)
    assert row["z_bruteforce"] == "nan"


def test_even_n_is_usage_error():
    cp = run("correlate", "--ensemble", "hermitian-beta1", "--n", "4", "--points", "0.0")
    assert cp.returncode == 2
    assert "odd" in cp.stderr


def test_unknown_subcommand_is_usage_error():
    assert run("frobnicate").returncode == 2


def test_header_names_version_and_command():
    cp = run("family", "--n", "3", check=True)
    first, second = cp.stdout.splitlines()[:2]
    assert first == f"# pfcorr {__version__} family"
    assert second.split(",")[:3] == ["k", "r_pair", "s"]


def test_seventeen_digits():
    (row,) = table(run("partition", "--n", "1", check=True).stdout)
    text = row["z_pfaffian"]
    assert text == f"{float(text):.17g}"
    assert len(text.replace(".", "").lstrip("0")) == 17
    assert float(text) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-14)


def test_json_mirror(tmp_path):
    out = tmp_path / "p.json"
    run("partition", "--n", "3", "--format", "json", "--out", str(out), check=True)
    doc = json.loads(out.read_text())
    assert doc["version"] == __version__ and doc["command"] == "partition"
    row = dict(zip(doc["columns"], doc["rows"][0]))
    assert row["z_pfaffian"] == pytest.approx(6 * np.sqrt(2) * np.pi, rel=1e-12)


def test_correlate_mixed_points():
    cp = run("correlate", "--ensemble", "real-asymmetric", "--points", "0.2,0.4+0.7j", "--bruteforce", check=True)
    (row,) = table(cp.stdout)
    assert row["n_real"] == "1" and row["n_pairs"] == "1"
    assert float(row["rel_gap"]) < 1e-3


def test_correlate_hermitian_with_complex_point_fails():
    cp = run("correlate", "--points", "0.5+1j")
    assert cp.returncode == 1
    record = json.loads(cp.stderr.strip().splitlines()[-1])
    assert record["status"] == "error" and record["type"] == "ConfigurationError"


def test_numeric_failure_is_one_json_line():
    cp = run("sample", "--count", "10")
    assert cp.returncode == 1
    lines = cp.stderr.strip().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["command"] == "sample"


def test_kernel_grid():
    rows = table(run("kernel", "--grid=-1:1:3", check=True).stdout)
    assert len(rows) == 9
    diag = [r for r in rows if r["y"] == r["y2"]]
    assert all(float(r["ds"]) == 0 for r in diag)


def test_sample_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        run("sample", "--ensemble", "real-asymmetric", "--count", "20000", "--seed", "5",
            "--bins=-3:3:12", "--out", str(path), check=True)
    assert a.read_bytes() == b.read_bytes()
    rows = table(a.read_text())
    assert [k for k in rows[0]] == ["bin_lo", "bin_hi", "density", "stderr"]


def test_seed_from_environment_and_flag_precedence():
    base = ["sample", "--count", "10000", "--bins=-2:2:4"]
    env_out = run(*base, env_extra={"PFCORR_SEED": "9"}, check=True).stdout
    assert env_out == run(*base, "--seed", "9", check=True).stdout
    assert env_out != run(*base, check=True).stdout
    flag_out = run(*base, "--seed", "3", env_extra={"PFCORR_SEED": "9"}, check=True).stdout
    assert flag_out == run(*base, "--seed", "3", check=True).stdout


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"ensemble": "real-asymmetric", "n": 3, "nodes-complex": "40,30"}))
    (row,) = table(run("partition", "--config", str(cfg), check=True).stdout)
    assert row["ensemble"] == "real-asymmetric"
    (row,) = table(run("partition", "--config", str(cfg), "--ensemble", "hermitian-beta1", check=True).stdout)
    assert row["ensemble"] == "hermitian-beta1"


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "blue"}))
    assert run("partition", "--config", str(cfg)).returncode == 2


def test_custom_weight_table(tmp_path):
    xs = np.arange(-9, 9.001, 0.02)
    path = tmp_path / "w.txt"
    path.write_text("# x w\n" + "\n".join(f"{x:.4f} {np.exp(-x * x / 2):.17g}" for x in xs) + "\n")
    (row,) = table(run("partition", "--n", "3", "--weight-table", str(path), "--nodes-real", "200",
                       check=True).stdout)
    assert row["ensemble"] == "custom"
    assert float(row["z_pfaffian"]) == pytest.approx(6 * np.sqrt(2) * np.pi, rel=1e-5)
    assert run("partition", "--ensemble", "real-asymmetric", "--weight-table", str(path)).returncode == 2


def test_compare_passes():
    cp = run("compare", "--count", "50000", "--seed", "1", "--bins=-3:3:12", check=True)
    rows = table(cp.stdout)
    z = np.array([float(r["z_score"]) for r in rows])
    assert np.mean(np.abs(z) <= 3) >= 0.95


def test_console_script_help():
    cp = subprocess.run(["pfcorr", "--help"], capture_output=True, text=True)
    assert cp.returncode == 0
    assert "correlate" in cp.stdout
