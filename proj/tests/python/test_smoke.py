import math
import os
import pathlib

import numpy as np
import pytest

import superlattice as sl

SOURCE = pathlib.Path(os.environ.get("SUPERLATTICE_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))


def pump(cut_deg):
    return sl.PumpSpec(wavelength=532e-9, beam_diameter=3e-3, cut_angle=math.radians(cut_deg))


def test_collinear_wavelength():
    signal, idler = sl.collinear_signal_wavelength(pump(50.34))
    assert abs(signal * 1e9 - 610.4) < 3.0
    assert idler == pytest.approx(sl.idler_wavelength(532e-9, signal), rel=1e-12)


def test_pattern_and_metrics():
    config = sl.uniform_lattice(pump(50.34), 3, 1e-3, 8.2e-3)
    grid = sl.GridAxes.uniform(609e-9, 612e-9, 5, math.radians(0.85), 601)
    p = sl.pattern(config, grid, threads=1)
    assert p.intensity.shape == (5, 601)
    assert p.intensity.max() == 1.0
    np.testing.assert_allclose(p.intensity, p.intensity[:, ::-1], atol=1e-10)
    section = sl.cross_section(p, 610.4e-9)
    metrics = sl.fringe_metrics(section)
    assert metrics.window_peaks > 0
    assert 0.9 < metrics.visibility <= 1.0


def test_closed_form_vectorized():
    phi = np.array([0.0, 2 * math.pi / 5, math.pi])
    values = sl.closed_form_intensity(0.0, phi, 5, 1e-3)
    assert values[0] == pytest.approx(25.0)
    assert values[1] < 1e-20


def test_validation_errors_are_value_errors():
    with pytest.raises(ValueError):
        sl.uniform_lattice(pump(50.34), 0, 1e-3, 8.2e-3).validate()
    with pytest.raises(ValueError):
        sl.medium("unobtainium")


def test_run_scenario_matches_golden(tmp_path):
    scenario = SOURCE / "scenarios" / "fig8.toml"
    text = scenario.read_text().replace("wavelength_points = 801", "wavelength_points = 21")
    text = text.replace("angle_points = 601", "angle_points = 241")
    small = tmp_path / "fig8.toml"
    small.write_text(text)
    result = sl.run_scenario(small, tmp_path / "out", threads=1)
    assert result["exit_code"] == 0
    assert [t["name"] for t in result["tasks"]] == ["defect", "uniform_N4"]
    passed, report = sl.regression_check(SOURCE / "tests" / "golden" / "fig8", tmp_path / "out")
    assert passed, report


def test_bad_scenario_reports_location(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text((SOURCE / "tests" / "data" / "missing_unit.toml").read_text())
    with pytest.raises(ValueError, match="missing unit"):
        sl.run_scenario(bad, tmp_path / "out")
