import sys

import numpy as np
import pytest

from holoretina.cli.main import main
from holoretina.core.io import load_phase_map, read_sidecar
from holoretina.core.patterns import letter_f
from holoretina.errors import NumericalError

FOCUSED = "focal_length_m = 0.022727272727272728\n"


def run(monkeypatch, *argv) -> int:
    monkeypatch.setattr(sys, "argv", ["holoretina", *map(str, argv)])
    with pytest.raises(SystemExit) as e:
        main()
    return e.value.code


@pytest.fixture
def small_config(write_file):
    return write_file("small.conf", "grid_n = 512\n" + FOCUSED)


@pytest.fixture
def f_pattern(monkeypatch, tmp_path):
    assert run(monkeypatch, "pattern", "F", "--out", tmp_path) == 0
    return tmp_path / "pattern_F.txt"


@pytest.fixture
def designed(monkeypatch, tmp_path, small_config, f_pattern):
    out = tmp_path / "design"
    assert run(monkeypatch, "design", f_pattern, "--config", small_config, "--out", out) == 0
    return out / "phase.pgm"


def test_version_and_help(monkeypatch, capsys):
    assert run(monkeypatch, "--version") == 0
    assert "holoretina" in capsys.readouterr().out
    assert run(monkeypatch) == 0
    assert run(monkeypatch, "design", "--help") == 0


def test_unknown_arguments_are_input_errors(monkeypatch):
    assert run(monkeypatch, "grating", "--colour", "red") == 2
    assert run(monkeypatch, "simulate") == 2


def test_init_refuses_to_overwrite(monkeypatch, tmp_path):
    assert run(monkeypatch, "init", "--out", tmp_path) == 0
    assert (tmp_path / "holoretina.conf").read_text().startswith("# holoretina run configuration")
    assert run(monkeypatch, "init", "--out", tmp_path) == 1
    assert run(monkeypatch, "init", "--out", tmp_path, "--force") == 0


def test_pattern_files(monkeypatch, tmp_path, f_pattern):
    assert f_pattern.read_text().splitlines() == [
        "".join("1" if v else "0" for v in row) for row in letter_f(10, 500e-6).mask
    ]
    assert run(monkeypatch, "pattern", "bar", "--column", 3, "--out", tmp_path) == 0
    assert (tmp_path / "pattern_bar_3.txt").read_text().splitlines()[0] == "0001000000"
    assert run(monkeypatch, "pattern", "bar", "--column", 12, "--out", tmp_path) == 2


def test_design_outputs(designed):
    out = designed.parent
    phase = load_phase_map(designed)
    assert phase.shape == (512, 512)
    assert phase.levels == 8
    assert read_sidecar(designed)["cells"] == "10"
    assert (out / "resolved_config.yaml").is_file()
    report = (out / "design_report.txt").read_text()
    assert "cells = 10x10" in report


def test_design_is_deterministic(monkeypatch, tmp_path, small_config, f_pattern):
    for name in ("a", "b"):
        code = run(monkeypatch, "design", f_pattern, "--config", small_config, "--out", tmp_path / name, "--seed", 9)
        assert code == 0
    for name in ("phase.pgm", "phase.meta.txt", "design_report.txt", "resolved_config.yaml"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_malformed_pattern_exits_2(monkeypatch, tmp_path, write_file, small_config):
    bad = write_file("bad.txt", "1x0\n010\n")
    assert run(monkeypatch, "design", bad, "--config", small_config, "--out", tmp_path / "o") == 2


def test_bad_config_exits_2(monkeypatch, tmp_path, write_file):
    conf = write_file("bad.conf", "pixles = 10\n")
    assert run(monkeypatch, "design", "--config", conf, "--out", tmp_path / "o") == 2


def test_simulate_identifies_the_letter(monkeypatch, tmp_path, designed, f_pattern, small_config):
    out = tmp_path / "sim"
    assert run(monkeypatch, "simulate", designed, f_pattern, "--config", small_config, "--out", out) == 0
    report = (out / "metrics.txt").read_text()
    assert "identification_accuracy = 1\n" in report
    assert "lit_recall = 1\nlit_precision = 1\n" in report
    expected = " ".join(f"{i},{j}" for i, j in letter_f(10, 500e-6).lit())
    assert f"lit_cells = {expected}\n" in report
    assert read_sidecar(out / "retina.pgm")["plane"] == "retina"


def test_simulate_is_deterministic(monkeypatch, tmp_path, designed, f_pattern, small_config):
    for name in ("a", "b"):
        argv = ("simulate", designed, f_pattern, "--config", small_config, "--out", tmp_path / name)
        assert run(monkeypatch, *argv) == 0
    for name in ("retina.pgm", "retina.meta.txt", "metrics.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_analyzer_flag(monkeypatch, tmp_path, designed, f_pattern, write_file):
    conf = write_file("leaky.conf", FOCUSED + "t_tm = -0.8\n")
    out = tmp_path / "sim"
    assert run(monkeypatch, "simulate", designed, f_pattern, "--config", conf, "--out", out, "--analyzer", "on") == 0
    assert "zeroth_order_fraction = 0\n" in (out / "metrics.txt").read_text()
    assert run(monkeypatch, "simulate", designed, f_pattern, "--config", conf, "--out", out, "--analyzer", "off") == 0
    assert "zeroth_order_fraction = 0\n" not in (out / "metrics.txt").read_text()


def test_conjugate_plane(monkeypatch, tmp_path, designed, f_pattern):
    out = tmp_path / "conj"
    assert run(monkeypatch, "simulate", designed, f_pattern, "--plane", "conjugate", "--out", out) == 0
    assert "plane = conjugate" in (out / "metrics.txt").read_text()
    assert (out / "conjugate.pgm").is_file()


def test_unresolved_accommodation_keeps_configured_lens(monkeypatch, tmp_path, designed, f_pattern, write_file):
    sweep = "accommodation_min_m = 0.020\naccommodation_max_m = 0.025\naccommodation_steps = 3\n"
    conf = write_file("sweep.conf", FOCUSED + sweep)
    out = tmp_path / "acc"
    assert run(monkeypatch, "simulate", designed, f_pattern, "--config", conf, "--out", out) == 0
    report = (out / "metrics.txt").read_text()
    assert "accommodation_defocus_ratio = 0.046" in report
    assert "best_focal_length_m" not in report
    assert "identification_accuracy = 1\n" in report


def test_simulate_grid_mismatch(monkeypatch, tmp_path, designed, write_file):
    small = write_file("five.txt", "\n".join(["10000"] + ["00000"] * 4) + "\n")
    assert run(monkeypatch, "simulate", designed, small, "--out", tmp_path / "o") == 2


def test_numerical_failure_exits_3(monkeypatch, tmp_path, small_config, f_pattern):
    def diverge(*args, **kwargs):
        raise NumericalError("diverged")

    monkeypatch.setattr("holoretina.cli.commands.design.assemble_hologram", diverge)
    assert run(monkeypatch, "design", f_pattern, "--config", small_config, "--out", tmp_path / "o") == 3


def test_grating_sweep(monkeypatch, tmp_path, write_file):
    conf = write_file("sweep.conf", "thickness_nm = 150:160:5\nharmonics = 5\n")
    out = tmp_path / "g"
    assert run(monkeypatch, "grating", "--config", conf, "--out", out) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[0] == "lambda_nm,period_nm,width_nm,thickness_nm,pol,t_abs,t_phase_rad,dphi_rad,sum_eff"
    assert len(rows) == 1 + 2 * 3
    report = (out / "grating_report.txt").read_text()
    assert "best_conversion_efficiency = " in report
    assert "halfwave_thickness_nm[543,230,70]" in report


def test_grating_outside_dispersion_table(monkeypatch, tmp_path, write_file):
    conf = write_file("far.conf", "lambda_nm = 900\nperiod_nm = 230\n")
    assert run(monkeypatch, "grating", "--config", conf, "--out", tmp_path / "g") == 2


def test_layout_pipeline(monkeypatch, tmp_path, write_file):
    conf = write_file("tiny.conf", "aperture_m = 23e-6\ngrid_n = 64\n")
    one = write_file("one.txt", "1\n")
    design_out = tmp_path / "d"
    assert run(monkeypatch, "design", one, "--config", conf, "--out", design_out) == 0
    out = tmp_path / "l"
    assert run(monkeypatch, "layout", design_out / "phase.pgm", "--config", conf, "--out", out) == 0
    report = (out / "layout_report.txt").read_text()
    assert "cells_per_side = 100\n" in report
    assert "beams = 10000\n" in report
    for fmt in ("json", "csv", "svg"):
        assert (out / f"layout.{fmt}").is_file()
    assert len((out / "layout.csv").read_text().splitlines()) == 10001
    angles = [float(a) for a in report.split("orientations_deg = ")[1].split()]
    assert len(angles) <= 8
    assert np.all(np.abs(np.array(angles) / 22.5 - np.round(np.array(angles) / 22.5)) < 1e-6)


def test_layout_rejects_continuous_maps(monkeypatch, tmp_path, write_file):
    conf = write_file("cont.conf", "aperture_m = 23e-6\ngrid_n = 64\nlevels = 0\n")
    one = write_file("one.txt", "1\n")
    assert run(monkeypatch, "design", one, "--config", conf, "--out", tmp_path / "d") == 0
    assert run(monkeypatch, "layout", tmp_path / "d" / "phase.pgm", "--out", tmp_path / "l") == 2
