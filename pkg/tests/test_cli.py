"""Command line artifacts: formats, reproducibility, exit codes."""

import json
import subprocess
import sys

import numpy as np
import pytest

from kickedecho.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERIC,
    main,
    read_artifact_config,
    read_series_csv,
)


def strip_timestamps(text):
    return "\n".join(
        line for line in text.splitlines() if not line.startswith("# timestamp")
    )


def run_ok(argv):
    assert main(argv) == 0


def test_evolve_writes_series_csv(tmp_path):
    out = tmp_path / "run.csv"
    run_ok([
        "evolve", "--system", "top", "-J", "12", "-k", "1.1",
        "-d", "0.01", "-g", "46", "-T", "40", "-o", str(out),
    ])
    text = out.read_text()
    assert text.startswith("# kickedecho evolve\n")
    series = read_series_csv(out)
    assert series.size == 41
    assert series[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(series <= 1 + 1e-12)


def test_artifact_config_reproduces_run(tmp_path):
    first = tmp_path / "first.csv"
    run_ok([
        "evolve", "--system", "top", "-J", "12", "-k", "1.1",
        "-d", "0.01", "-g", "46", "-T", "40", "-o", str(first),
    ])
    cfg = read_artifact_config(first)
    assert cfg["spin"] == 12.0
    assert cfg["grid_state"] == [46]
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps(cfg))
    second = tmp_path / "second.csv"
    run_ok(["evolve", "--config", str(cfg_file), "-o", str(second)])
    data1 = [l for l in first.read_text().splitlines() if not l.startswith("#")]
    data2 = [l for l in second.read_text().splitlines() if not l.startswith("#")]
    assert data1 == data2


def test_rerun_is_identical_modulo_timestamp(tmp_path):
    out = tmp_path / "run.csv"
    argv = [
        "evolve", "--system", "rotor", "-N", "16", "-k", "0.3",
        "-d", "0.01", "--point=-0.4,0.1", "-T", "30", "-o", str(out),
    ]
    run_ok(argv)
    text1 = out.read_text()
    out.unlink()
    run_ok(argv)
    assert strip_timestamps(text1) == strip_timestamps(out.read_text())


def test_portrait_rows_and_determinism(tmp_path):
    out1 = tmp_path / "a.csv"
    argv = [
        "portrait", "--system", "top", "-k", "1.1",
        "--orbits", "3", "--steps", "50", "-o", str(out1),
    ]
    run_ok(argv)
    rows = [l.split(",") for l in out1.read_text().splitlines()[4:]]
    assert len(rows) == 3 * 51
    theta = np.array([float(r[3]) for r in rows])
    assert np.all((theta >= 0) & (theta <= np.pi))
    text1 = out1.read_text()
    out1.unlink()
    run_ok(argv)
    assert strip_timestamps(text1) == strip_timestamps(out1.read_text())
    # a different seed must explore different orbits
    out2 = tmp_path / "b.csv"
    run_ok(argv[:-1] + [str(out2), "--seed", "7"])
    assert strip_timestamps(out1.read_text()).splitlines()[4:] != strip_timestamps(
        out2.read_text()
    ).splitlines()[4:]


def test_sweep_parallel_matches_serial(tmp_path):
    base = [
        "sweep", "--system", "top", "-J", "12", "-k", "1.1",
        "-d", "0.01", "-T", "40", "-g", "5", "-g", "52",
    ]
    serial, threaded = tmp_path / "serial.json", tmp_path / "threaded.json"
    run_ok(base + ["-o", str(serial)])
    run_ok(base + ["--jobs", "3", "-o", str(threaded)])
    doc1 = json.loads(serial.read_text())
    doc2 = json.loads(threaded.read_text())
    assert doc1["records"] == doc2["records"]
    rec = doc1["records"][0]
    assert rec["state"] == 5
    assert set(rec) >= {"state", "location", "label", "stages", "saturation", "recurrence_times"}


def test_sweep_rotor_points(tmp_path):
    out = tmp_path / "rotor.json"
    run_ok([
        "sweep", "--system", "rotor", "-N", "16", "-k", "0.3", "-d", "0.02",
        "-T", "40", "--point=-0.4,0.1", "--point", "0.2,0.3", "-o", str(out),
    ])
    doc = json.loads(out.read_text())
    assert len(doc["records"]) == 2
    assert doc["records"][0]["state"] == [-0.4, 0.1]


def test_spectrum_cache_counter(tmp_path):
    out = tmp_path / "spectra.csv"
    argv = [
        "spectrum", "--system", "top", "-J", "10", "-k", "1.1",
        "-g", "46", "--cache-dir", str(tmp_path / "cache"), "-o", str(out),
    ]
    run_ok(argv)
    lines = out.read_text().splitlines()
    assert lines[3] == '# cache {"decompositions": 1}'
    amplitudes = np.array([float(l.split(",")[2]) for l in lines[5:]])
    assert amplitudes.sum() == pytest.approx(1.0, abs=1e-10)
    run_ok(argv)
    assert out.read_text().splitlines()[3] == '# cache {"decompositions": 0}'


def write_gaussian_csv(path, gamma=1e-4, horizon=200, shuffle=False):
    t = np.arange(horizon + 1)
    rows = [f"{x},{np.exp(-gamma * x * x):.17g}" for x in t]
    if shuffle:
        rng = np.random.default_rng(1)
        rng.shuffle(rows)
    path.write_text("# hand-made series\nt,fidelity\n" + "\n".join(rows) + "\n")


def test_fit_on_stored_series(tmp_path):
    src = tmp_path / "series.csv"
    write_gaussian_csv(src)
    out = tmp_path / "fit.json"
    run_ok(["fit", "--input", str(src), "--model", "gaussian", "-o", str(out)])
    doc = json.loads(out.read_text())
    assert doc["fit"]["model"] == "gaussian"
    assert doc["fit"]["params"]["gamma"] == pytest.approx(1e-4, rel=1e-6)
    out2 = tmp_path / "classify.json"
    run_ok(["fit", "--input", str(src), "-o", str(out2)])
    doc2 = json.loads(out2.read_text())
    assert doc2["config"]["model"] == "classify"
    assert doc2["fit"]["label"] == "gaussian"


def test_fit_window_flag(tmp_path):
    src = tmp_path / "series.csv"
    write_gaussian_csv(src)
    out = tmp_path / "fit.json"
    run_ok([
        "fit", "--input", str(src), "--model", "gaussian",
        "--window", "10,150", "-o", str(out),
    ])
    assert json.loads(out.read_text())["fit"]["window"] == [10, 150]


def test_series_reader_sorts_rows(tmp_path):
    ordered, shuffled = tmp_path / "a.csv", tmp_path / "b.csv"
    write_gaussian_csv(ordered)
    write_gaussian_csv(shuffled, shuffle=True)
    assert np.array_equal(read_series_csv(ordered), read_series_csv(shuffled))


def test_scaling_delta_mode(tmp_path):
    # small J keeps this quick; the quadratic law carries visible
    # finite-size softening down here, hence the wide band
    out = tmp_path / "scaling.json"
    run_ok([
        "scaling", "--mode", "delta", "--system", "top", "-J", "16", "-k", "1.1",
        "-g", "46", "-d", "0.005", "-d", "0.01", "-d", "0.02",
        "-T", "150", "-o", str(out),
    ])
    doc = json.loads(out.read_text())["scaling"]
    assert doc["mode"] == "log"
    assert len(doc["points"]) == 3
    assert doc["exponent"] == pytest.approx(2.0, abs=0.5)
    assert doc["r_squared"] > 0.99


def test_scaling_spin_mode(tmp_path):
    out = tmp_path / "scaling.json"
    run_ok([
        "scaling", "--mode", "spin", "--system", "top", "-k", "1.1",
        "-J", "8", "-J", "10", "-J", "12", "-g", "46",
        "-d", "0.02", "-T", "80", "-o", str(out),
    ])
    doc = json.loads(out.read_text())["scaling"]
    assert doc["mode"] == "linear"
    assert doc["exponent"] == 1.0
    assert doc["prefactor"] > 0
    assert doc["r_squared"] > 0.9


def test_figure_bundle(tmp_path):
    out_dir = tmp_path / "fig3"
    run_ok(["figure", "--id", "3", "--out-dir", str(out_dir)])
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["figure"] == 3
    assert manifest["files"]
    for name in manifest["files"]:
        assert (out_dir / name).exists()
    first = out_dir / manifest["files"][0]
    assert first.read_text().startswith("# kickedecho portrait\n")
    assert "reference" in manifest


@pytest.mark.parametrize(
    "argv, code",
    [
        # spin below the physical minimum
        (["evolve", "--system", "top", "-J", "0.3", "-k", "1.1", "-d", "0.01",
          "-g", "5", "-T", "10", "-o", "x.csv"], EXIT_CONFIG),
        # no initial state selected
        (["evolve", "--system", "top", "-J", "10", "-k", "1.1", "-d", "0.01",
          "-T", "10", "-o", "x.csv"], EXIT_CONFIG),
        # evolve takes exactly one state
        (["evolve", "--system", "top", "-J", "10", "-k", "1.1", "-d", "0.01",
          "-g", "5", "-g", "6", "-T", "10", "-o", "x.csv"], EXIT_CONFIG),
        # grid states belong to the top
        (["sweep", "--system", "rotor", "-N", "16", "-k", "0.3", "-d", "0.01",
          "-g", "5", "-T", "10", "-o", "x.json"], EXIT_CONFIG),
        # unknown model name rejected by the parser
        (["fit", "--input", "x.csv", "--model", "cubic", "-o", "x.json"], EXIT_CONFIG),
        # malformed window
        (["fit", "--input", "x.csv", "--window", "5", "-o", "x.json"], EXIT_CONFIG),
        # scaling needs three samples along the swept axis
        (["scaling", "--mode", "delta", "--system", "top", "-J", "10", "-k", "1.1",
          "-g", "46", "-d", "0.01", "-d", "0.02", "-T", "50", "-o", "x.json"],
         EXIT_CONFIG),
        # spectra are defined for the top only
        (["spectrum", "--system", "rotor", "-N", "16", "-k", "0.3",
          "--point", "0.1,0.2", "-o", "x.csv"], EXIT_CONFIG),
        (["figure", "--id", "99", "--out-dir", "figs"], EXIT_CONFIG),
    ],
)
def test_config_errors(tmp_path, monkeypatch, capsys, argv, code):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == code
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "config"
    assert err["message"]


def test_config_file_command_mismatch(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "sweep", "spin": 10}))
    code = main(["evolve", "--config", str(cfg), "-o", str(tmp_path / "x.csv")])
    assert code == EXIT_CONFIG
    assert json.loads(capsys.readouterr().err.strip())["error"] == "config"


def test_io_error_codes(tmp_path, capsys):
    missing = tmp_path / "missing.csv"
    code = main(["fit", "--input", str(missing), "-o", str(tmp_path / "x.json")])
    assert code == EXIT_IO
    assert json.loads(capsys.readouterr().err.strip())["error"] == "io"
    code = main([
        "evolve", "--config", str(tmp_path / "missing.json"),
        "-o", str(tmp_path / "x.csv"),
    ])
    assert code == EXIT_IO


def test_numeric_error_code(tmp_path, capsys):
    src = tmp_path / "short.csv"
    src.write_text("t,fidelity\n0,1.0\n1,0.9\n2,0.8\n")
    code = main(["fit", "--input", str(src), "--model", "gaussian",
                 "-o", str(tmp_path / "x.json")])
    assert code == EXIT_NUMERIC
    assert json.loads(capsys.readouterr().err.strip())["error"] == "numeric"


def test_module_entry_point(tmp_path):
    out = tmp_path / "run.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "kickedecho.cli", "portrait", "--system", "rotor",
         "-k", "0.3", "--orbits", "2", "--steps", "10", "-o", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert out.exists()
