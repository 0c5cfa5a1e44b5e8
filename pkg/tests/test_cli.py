"""End-to-end command-line runs through cli.main (no subprocesses)."""

import json

import numpy as np
import pytest

from rbfilter import cli
from rbfilter.fitting import model_transmission
from rbfilter.io import read_spectrum_csv, write_spectrum_csv
from rbfilter.lineshape import CellConfig, TRANSVERSE


def run(*argv) -> int:
    return cli.main(list(argv))


# ------------------------------------------------------------ subcommands

def test_constants_command(tmp_path):
    assert run("constants", "--out", str(tmp_path)) == 0
    doc = json.loads((tmp_path / "constants.json").read_text())
    assert doc["reference_frequency_thz"] == pytest.approx(377.107, abs=0.01)
    assert set(doc["isotopes"]) == {"Rb85", "Rb87"}
    assert doc["isotopes"]["Rb87"]["nuclear_spin"] == 1.5
    assert doc["vapor_pressure_pa_at_config_temperature"] > 0


def test_lines_command_writes_one_file_per_present_isotope(tmp_path):
    assert run("lines", "--out", str(tmp_path), "--cell", "absorption") == 0
    assert (tmp_path / "lines_rb85.csv").exists()
    assert (tmp_path / "lines_rb87.csv").exists()

    faraday_dir = tmp_path / "faraday"
    assert run("lines", "--out", str(faraday_dir), "--cell", "faraday") == 0
    assert (faraday_dir / "lines_rb87.csv").exists()
    assert not (faraday_dir / "lines_rb85.csv").exists()
    header = (faraday_dir / "lines_rb87.csv").read_text().splitlines()[0]
    assert header == "offset_ghz,component,strength"


def test_spectrum_command_absorption(tmp_path):
    assert run("spectrum", "--out", str(tmp_path), "--grid-points", "101") == 0
    grid, cols = read_spectrum_csv(str(tmp_path / "spectrum_absorption.csv"))
    assert grid.size == 101
    assert set(cols) == {"transmission", "transmission_db"}
    assert np.all((cols["transmission"] >= 0) & (cols["transmission"] <= 1 + 1e-9))


def test_spectrum_command_faraday_adds_rotation_columns(tmp_path):
    assert run("spectrum", "--out", str(tmp_path), "--cell", "faraday",
               "--grid-points", "101") == 0
    _, cols = read_spectrum_csv(str(tmp_path / "spectrum_faraday.csv"))
    assert {"transmission", "transmission_db",
            "rotation_rad", "rotation_transmission"} == set(cols)


def test_cascade_command(tmp_path):
    assert run("cascade", "--out", str(tmp_path), "--grid-points", "101") == 0
    grid, cols = read_spectrum_csv(str(tmp_path / "cascade.csv"))
    assert grid.size == 101 and "transmission" in cols


def test_cascade_psi_sweep(tmp_path):
    assert run("cascade", "--out", str(tmp_path), "--grid-points", "51",
               "--psi-sweep") == 0
    _, cols = read_spectrum_csv(str(tmp_path / "cascade_psi_sweep.csv"))
    assert len(cols) == 7
    assert "transmission_psi_0_deg" in cols
    assert "transmission_psi_90_deg" in cols
    for arr in cols.values():
        assert np.all((arr >= 0) & (arr <= 1 + 1e-9))


def test_optimize_command_with_trace(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "optimizer": {
            "budget": 150,
            "box": {"t_abs_c": [100, 100], "t_far_c": [102, 102],
                    "b_abs_mt": [10, 10], "b_far_mt": [10, 10]},
        },
    }))
    assert run("optimize", "--out", str(tmp_path), "--config", str(cfg),
               "--trace") == 0
    doc = json.loads((tmp_path / "optimize.json").read_text())
    assert doc["best_params"]["t_abs_c"] == pytest.approx(100.0)
    assert doc["best_params"]["b_far_mt"] == pytest.approx(10.0)
    assert doc["objective"] == pytest.approx(0.27792, abs=2e-4)
    assert doc["signal_transmissions"]["-2.3"] == pytest.approx(0.66871, abs=2e-4)
    assert "config_hash" in doc
    _, trace_cols = read_spectrum_csv(str(tmp_path / "optimize_trace.csv"))
    assert len(trace_cols["objective"]) == doc["trace_length"]


def test_photon_sim_command(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"noise": {"frames": 5000}}))
    assert run("photon-sim", "--out", str(tmp_path), "--config", str(cfg),
               "--frames-csv") == 0
    doc = json.loads((tmp_path / "photon_summary.json").read_text())
    assert doc["summary"]["n_frames"] == 5000
    assert doc["summary"]["analytic_pair_correlation"] == pytest.approx(0.38529, abs=1e-4)
    assert abs(doc["summary"]["mean_on_pair"] - 0.38529) < 0.05
    _, cols = read_spectrum_csv(str(tmp_path / "correlation_map.csv"))
    assert len(cols) == 10

    lines = (tmp_path / "frames.csv").read_text().splitlines()
    assert lines[0] == "frame,region,n_s,n_as"
    assert len(lines) == 1 + 5000 * 10


def test_photon_sim_seed_override_changes_sample_not_analytic(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"noise": {"frames": 2000}}))
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    assert run("photon-sim", "--out", str(a_dir), "--config", str(cfg),
               "--seed", "1") == 0
    assert run("photon-sim", "--out", str(b_dir), "--config", str(cfg),
               "--seed", "2") == 0
    a = json.loads((a_dir / "photon_summary.json").read_text())["summary"]
    b = json.loads((b_dir / "photon_summary.json").read_text())["summary"]
    assert a["analytic_pair_correlation"] == b["analytic_pair_correlation"]
    assert a["mean_on_pair"] != b["mean_on_pair"]


def test_fit_command_round_trip(tmp_path):
    template = CellConfig(name="absorption", length_m=0.30, temperature_k=373.15,
                          b_field_t=1.0e-2, geometry=TRANSVERSE,
                          rb85_fraction=0.985, rb87_fraction=0.015)
    grid = np.linspace(-12.0, 12.0, 201)
    data = str(tmp_path / "measured.csv")
    write_spectrum_csv(data, grid, {"transmission": model_transmission(template, grid)})

    assert run("fit", "--out", str(tmp_path), "--data", data,
               "--free", "temperature_c", "--initial", "temperature_c=95") == 0
    doc = json.loads((tmp_path / "fit.json").read_text())
    assert doc["fitted_params"]["temperature_c"] == pytest.approx(100.0, abs=0.05)
    assert doc["rms_transmission_error"] < 1e-6
    assert doc["degenerate"] is False
    assert doc["free_params"] == ["temperature_c"]
    assert doc["n_rows"] == 201


def test_preset_flag_accepted(tmp_path):
    assert run("cascade", "--out", str(tmp_path), "--grid-points", "51",
               "--preset", "paper-optimum") == 0
    assert (tmp_path / "cascade.csv").exists()


# ------------------------------------------------------------- exit codes

def test_exit_2_on_bad_grid_points(tmp_path):
    assert run("spectrum", "--out", str(tmp_path), "--grid-points", "1") == 2


def test_exit_2_on_negative_seed(tmp_path):
    assert run("constants", "--out", str(tmp_path), "--seed", "-5") == 2


def test_exit_2_on_malformed_config(tmp_path):
    cfg = tmp_path / "broken.json"
    cfg.write_text("{not json")
    assert run("constants", "--out", str(tmp_path), "--config", str(cfg)) == 2


def test_exit_2_on_invalid_config_value(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"cells": {"absorption": {"temperature_c": 500}}}))
    assert run("spectrum", "--out", str(tmp_path), "--config", str(cfg)) == 2


def test_exit_2_on_preset_config_conflict(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{}")
    assert run("constants", "--out", str(tmp_path), "--preset", "paper-optimum",
               "--config", str(cfg)) == 2


def test_exit_3_on_missing_config_file(tmp_path):
    assert run("constants", "--out", str(tmp_path),
               "--config", str(tmp_path / "absent.json")) == 3


def test_exit_3_on_missing_fit_data(tmp_path):
    assert run("fit", "--out", str(tmp_path), "--data", str(tmp_path / "no.csv"),
               "--free", "temperature_c", "--initial", "temperature_c=95") == 3


def test_exit_2_on_unknown_fit_parameter(tmp_path):
    grid = np.linspace(-5.0, 5.0, 60)
    data = str(tmp_path / "m.csv")
    write_spectrum_csv(data, grid, {"transmission": np.full(60, 0.5)})
    assert run("fit", "--out", str(tmp_path), "--data", data,
               "--free", "pressure_pa", "--initial", "pressure_pa=1") == 2
    assert run("fit", "--out", str(tmp_path), "--data", data,
               "--free", "temperature_c", "--initial", "temperature_c:95") == 2


def test_version_flag():
    with pytest.raises(SystemExit) as exc_info:
        run("--version")
    assert exc_info.value.code == 0
