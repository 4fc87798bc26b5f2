"""Command-line interface: configs, CSV/manifest outputs, exit codes.

Everything drives `main(argv)` in-process; outputs land in tmp_path.
"""

import json
import math
from textwrap import dedent

import numpy as np
import pytest

from drivenspin.cli import ConfigError, load_scenario, main

BASE_CONFIG = dedent(
    """
    drive:
      delta_mhz: 10.0
      h_d_mhz: 17.320508075688775
      h_i_mhz: 2.0
    environment:
      t1_us: 15.0
      t2_us: 3.0
    ensemble:
      n_nodes: 32
    burst:
      duration_us: 1.0
    output:
      basename: run
    """
)


def _write(tmp_path, text, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# ------------------------------------------------------------- simulate


def test_simulate_writes_trace_and_manifest(tmp_path, capsys):
    cfg = _write(tmp_path, BASE_CONFIG)
    assert main(["simulate", cfg, "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "wrote" in out

    csv_path = tmp_path / "run.csv"
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "t_us,sx,sy,sz"
    data = np.genfromtxt(csv_path, delimiter=",", names=True)
    assert data["t_us"][0] == 0.0
    assert data.size > 100

    manifest = json.loads((tmp_path / "run_manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["results"]["n_rows"] == data.size
    assert manifest["outputs"] == ["run.csv"]
    assert set(manifest["versions"]) >= {"drivenspin", "numpy", "scipy", "python"}
    assert manifest["config"]["drive"]["delta_mhz"] == 10.0  # inputs echoed


def test_simulate_output_is_byte_identical_across_runs(tmp_path):
    cfg = _write(tmp_path, BASE_CONFIG)
    argv = ["simulate", cfg, "--out-dir", str(tmp_path)]
    assert main(argv) == 0
    first_csv = (tmp_path / "run.csv").read_bytes()
    first_manifest = (tmp_path / "run_manifest.json").read_bytes()
    assert main(argv) == 0
    assert (tmp_path / "run.csv").read_bytes() == first_csv
    assert (tmp_path / "run_manifest.json").read_bytes() == first_manifest


def test_explicit_sequence_config(tmp_path):
    text = dedent(
        """
        drive: {delta_mhz: 10.0, n_crossing: 2, h_i_ratio: 0.12}
        environment: {t1_us: 15.0, t2_us: 3.0}
        ensemble: {n_nodes: 16}
        sequence:
          - prepare: "+X"
          - burst: {duration_us: 0.5}
          - wait: {duration_us: 10.0}
          - acquire_echo: {tau_free_us: 0.3, readout: "+X"}
        output: {basename: seq}
        """
    )
    cfg = _write(tmp_path, text)
    assert main(["simulate", cfg, "--out-dir", str(tmp_path)]) == 0
    manifest = json.loads((tmp_path / "seq_manifest.json").read_text())
    assert manifest["results"]["signal"] is not None


# ------------------------------------------------------------ validation


def test_unknown_key_names_the_full_path(tmp_path, capsys):
    cfg = _write(tmp_path, BASE_CONFIG.replace("h_d_mhz", "h_x_mhz"))
    assert main(["simulate", cfg]) == 3
    err = capsys.readouterr().err
    assert "config error" in err
    assert "drive.h_x_mhz" in err


def test_unphysical_environment_is_rejected(tmp_path, capsys):
    cfg = _write(tmp_path, BASE_CONFIG.replace("t2_us: 3.0", "t2_us: 40.0"))
    assert main(["simulate", cfg]) == 3
    assert "T2" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["simulate", str(tmp_path / "nope.yaml")]) == 3
    assert "not found" in capsys.readouterr().err


def test_config_without_burst_window(tmp_path, capsys):
    text = dedent(
        """
        drive: {delta_mhz: 10.0, h_d_mhz: 17.3}
        sequence:
          - prepare: "+Z"
          - acquire_echo: {}
        """
    )
    cfg = _write(tmp_path, text)
    assert main(["simulate", cfg, "--out-dir", str(tmp_path)]) == 3
    assert "burst" in capsys.readouterr().err


def test_drive_requires_exactly_one_amplitude_spec(tmp_path):
    both = BASE_CONFIG.replace("h_d_mhz: 17.320508075688775", "h_d_mhz: 17.3\n  n_crossing: 2")
    with pytest.raises(ConfigError, match="h_d_mhz"):
        load_scenario(_write(tmp_path, both, "both.yaml"))
    neither = BASE_CONFIG.replace("h_d_mhz: 17.320508075688775\n", "")
    with pytest.raises(ConfigError):
        load_scenario(_write(tmp_path, neither, "neither.yaml"))


def test_bad_cli_usage_exits_2(tmp_path):
    cfg = _write(tmp_path, BASE_CONFIG)
    with pytest.raises(SystemExit) as err:
        main(["sweep", cfg, "--param", "tau_mhz", "--from", "1", "--to", "2", "--steps", "2"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2


# ---------------------------------------------------------------- sweep


def test_single_step_sweep_matches_simulate(tmp_path):
    cfg = _write(tmp_path, BASE_CONFIG)
    sim_dir, swp_dir = tmp_path / "sim", tmp_path / "swp"
    assert main(["simulate", cfg, "--out-dir", str(sim_dir)]) == 0
    assert main(
        ["sweep", cfg, "--param", "delta_mhz", "--from", "10.0", "--to", "10.0",
         "--steps", "1", "--jobs", "1", "--out-dir", str(swp_dir)]
    ) == 0
    sim = np.genfromtxt(sim_dir / "run.csv", delimiter=",", names=True)
    grid_lines = (swp_dir / "run_grid.csv").read_text().splitlines()
    assert grid_lines[0] == "t_us,10"
    grid = np.genfromtxt(swp_dir / "run_grid.csv", delimiter=",", skip_header=1)
    assert np.array_equal(grid[:, 0], sim["t_us"])
    assert np.array_equal(grid[:, 1], sim["sz"])  # degenerate sweep == simulate


def test_sweep_shares_one_axis_and_flags_failed_rows(tmp_path, capsys):
    cfg = _write(tmp_path, BASE_CONFIG)
    assert main(
        ["sweep", cfg, "--param", "h_i_mhz", "--from", "0.5", "--to", "2.0",
         "--steps", "4", "--jobs", "1", "--out-dir", str(tmp_path)]
    ) == 0
    grid = np.genfromtxt(tmp_path / "run_grid.csv", delimiter=",", skip_header=1)
    fft = np.genfromtxt(tmp_path / "run_fft.csv", delimiter=",", skip_header=1)
    assert grid.shape[1] == 5  # t axis + 4 swept columns
    assert not np.isnan(grid).any()
    assert fft.shape[1] == 5
    manifest = json.loads((tmp_path / "run_manifest.json").read_text())
    assert manifest["results"]["rows_ok"] == 4
    assert manifest["results"]["row_errors"] == []
    assert manifest["cli"]["param"] == "h_i_mhz"


def test_parallel_sweep_equals_serial(tmp_path):
    cfg = _write(tmp_path, BASE_CONFIG)
    ser, par = tmp_path / "ser", tmp_path / "par"
    base = ["sweep", cfg, "--param", "phi_deg", "--from", "0", "--to", "45", "--steps", "3"]
    assert main(base + ["--jobs", "1", "--out-dir", str(ser)]) == 0
    assert main(base + ["--jobs", "2", "--out-dir", str(par)]) == 0
    assert (ser / "run_grid.csv").read_bytes() == (par / "run_grid.csv").read_bytes()
    assert (ser / "run_fft.csv").read_bytes() == (par / "run_fft.csv").read_bytes()


# -------------------------------------------------------------- floquet


def _floquet_rows(path):
    rows = {}
    for line in path.read_text().splitlines()[1:]:
        key, value = line.split(",")
        rows[key] = float(value)
    return rows


def test_floquet_table_and_truncation_stability(tmp_path):
    # weak-image regime (h_i/delta = 0.1), where 5 blocks already converge
    cfg = _write(tmp_path, BASE_CONFIG.replace("h_i_mhz: 2.0", "h_i_mhz: 1.0"))
    d5, d7 = tmp_path / "n5", tmp_path / "n7"
    assert main(["floquet", cfg, "--n-blocks", "5", "--out-dir", str(d5)]) == 0
    assert main(["floquet", cfg, "--n-blocks", "7", "--out-dir", str(d7)]) == 0
    r5 = _floquet_rows(d5 / "run_quasi_energies.csv")
    r7 = _floquet_rows(d7 / "run_quasi_energies.csv")
    assert len([k for k in r7 if k.startswith("quasi_energy_")]) == 14
    assert abs(r5["splitting_at_resonance"] - r7["splitting_at_resonance"]) < 1e-8
    assert r7["splitting_closed_form"] == pytest.approx(
        3.0 * 1.0**2 / (8.0 * 10.0), rel=1e-9
    )
    assert r7["splitting_crossing_block"] == pytest.approx(
        r7["splitting_closed_form"], rel=0.05
    )


def test_floquet_without_image_reports_zero_splitting(tmp_path, capsys):
    text = BASE_CONFIG.replace("  h_i_mhz: 2.0\n", "")
    cfg = _write(tmp_path, text)
    assert main(["floquet", cfg, "--out-dir", str(tmp_path)]) == 0
    rows = _floquet_rows(tmp_path / "run_quasi_energies.csv")
    assert rows["splitting_at_resonance"] == 0.0
    assert rows["splitting_crossing_block"] == 0.0
    assert rows["splitting_closed_form"] == 0.0


def test_floquet_does_not_clobber_simulate_trace(tmp_path):
    # same config, same basename, same directory: both artifacts survive
    cfg = _write(tmp_path, BASE_CONFIG)
    assert main(["simulate", cfg, "--out-dir", str(tmp_path)]) == 0
    trace_bytes = (tmp_path / "run.csv").read_bytes()
    assert main(["floquet", cfg, "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "run.csv").read_bytes() == trace_bytes
    assert (tmp_path / "run_quasi_energies.csv").exists()


def test_floquet_rejects_zero_detuning(tmp_path, capsys):
    cfg = _write(tmp_path, BASE_CONFIG.replace("delta_mhz: 10.0", "delta_mhz: 0.0"))
    assert main(["floquet", cfg, "--out-dir", str(tmp_path)]) == 3
    assert "delta" in capsys.readouterr().err


# ------------------------------------------------------------ fit


def test_fit_reads_simulate_csv_and_reports_json(tmp_path, capsys):
    t = np.linspace(0.0, 25.0, 400)
    sz = 0.4 * np.exp(-t / 5.0) + 0.05
    path = tmp_path / "decay.csv"
    with open(path, "w", newline="\n") as fh:
        fh.write("t_us,sx,sy,sz\n")
        for row in zip(t, np.zeros_like(t), np.zeros_like(t), sz):
            fh.write(",".join("%.12g" % v for v in row) + "\n")
    out_json = tmp_path / "fit.json"
    assert main(["fit", str(path), "--model", "plain_exp", "--column", "sz",
                 "--out", str(out_json)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["T_us"] == pytest.approx(5.0, rel=1e-3)
    assert payload["model"] == "plain_exp"
    assert json.loads(out_json.read_text()) == payload


def test_fit_missing_column_fails_cleanly(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n3,4\n")
    assert main(["fit", str(path)]) in (3, 4)
    assert capsys.readouterr().err != ""


# ------------------------------------------------------- materials


def test_materials_lists_presets(capsys):
    assert main(["materials"]) == 0
    out = capsys.readouterr().out
    for name in ("P1", "MnMgO", "GdCaWO4"):
        assert name in out


# ------------------------------------------------------- scenario API


def test_load_scenario_builds_typed_objects(tmp_path):
    text = dedent(
        """
        material: MnMgO
        cubic_a_mhz: 55.5
        b0_mt: 353.7
        level_pair: [17, 18]
        f0_mhz: 9734.0
        drive: {delta_mhz: 9.734, n_crossing: 2, h_i_ratio: 0.12}
        burst: {duration_us: 2.0}
        """
    )
    scn = load_scenario(_write(tmp_path, text))
    assert scn.tls is not None
    assert scn.tls.drive_scale == pytest.approx(3.0, abs=0.01)
    assert scn.env.T1 == 15.0 and scn.env.T2 == 3.0  # preset defaults
    assert scn.drive.h_d == pytest.approx(9.734 * math.sqrt(3.0))
    assert scn.drive.h_i == pytest.approx(0.12 * scn.drive.h_d, rel=1e-12)
