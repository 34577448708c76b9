"""Frozen scan fixtures: regenerated data must match byte for byte."""
import importlib.util

from conftest import FIXTURES
from motprobe.experiments import fit_series
from motprobe.series import read_csv

SCRIPT = FIXTURES.parent.parent / "scripts" / "make_fixtures.py"


def _fits():
    tnf = fit_series(read_csv(FIXTURES / "scan_tnf.csv"), "gaussian", gate_s=0.1)
    cam = fit_series(read_csv(FIXTURES / "scan_camera.csv"), "gaussian")
    return tnf.one_over_e_diameter, cam.one_over_e_diameter


def test_fixture_diameters():
    d_tnf, d_cam = _fits()
    assert round(d_tnf, 2) == 1.31
    assert round(d_cam, 2) == 1.27


def test_fixtures_regenerate_identically(tmp_path):
    spec = importlib.util.spec_from_file_location("make_fixtures", SCRIPT)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    mod.main(tmp_path)
    for name in ("scan_tnf.csv", "scan_camera.csv"):
        assert (tmp_path / name).read_bytes() == (FIXTURES / name).read_bytes()
