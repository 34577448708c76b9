import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from motprobe.cloud import (CloudModel, RegimeParams, cloud_for_atom_number, density_at,
                            effective_atom_number, total_atoms, translate)
from motprobe.errors import InvalidGeometryError, ValidationError
from motprobe.physics import FiberSpec
from oracles import riemann_shell

REF_CLOUD = CloudModel("gaussian", (0, 0, 0), (650, 650, 1000), 4e-3)
REF_FIBER = FiberSpec(0.6, 0.3)
coords = st.floats(-3000, 3000)


def test_density_peak_and_one_over_e():
    c = CloudModel("gaussian", (1, 2, 3), (10, 20, 30), 7.0)
    assert density_at(c, (1, 2, 3)) == 7.0
    assert density_at(c, (11, 2, 3)) == pytest.approx(7.0 / math.e, rel=1e-15)


def test_flattop_membership():
    c = CloudModel("flattop", (0, 0, 0), (1, 1, 1), 5.0)
    assert density_at(c, (0.5, 0.5, 0.5)) == 5.0
    assert density_at(c, (1, 1, 1)) == 0.0


@given(st.tuples(coords, coords, coords), st.sampled_from(["gaussian", "flattop"]))
def test_density_nonnegative(p, shape):
    assert density_at(CloudModel(shape, (0, 0, 0), (500, 500, 900), 1e-3), p) >= 0


def test_total_atoms():
    assert total_atoms(CloudModel("gaussian", (0, 0, 0), (1, 1, 1), 1 / math.pi ** 1.5)) == pytest.approx(1)
    assert total_atoms(CloudModel("flattop", (0, 0, 0), (1, 1, 1), 3 / (4 * math.pi))) == pytest.approx(1)
    # Closed-form Gaussian integral for the default cloud.
    assert total_atoms(REF_CLOUD) == pytest.approx(9.41e6, rel=0.01)


def test_effective_atom_number_uniform_slab():
    # Flat-top long enough that the 2000 um of fiber lie well inside: the
    # integral is shell area x length x density.
    slab = CloudModel("flattop", (0, 0, 0), (1e6, 1e6, 200.0), 4e-3)
    exact = math.pi * (0.6 ** 2 - 0.3 ** 2) * 400.0 * 4e-3
    assert effective_atom_number(slab, REF_FIBER) == pytest.approx(exact, rel=1e-6)
    analytic_2000 = math.pi * (0.6 ** 2 - 0.3 ** 2) * 2000 * 4e-3
    assert analytic_2000 == pytest.approx(6.79, rel=5e-3)
    slab2000 = CloudModel("flattop", (0, 0, 0), (1e6, 1e6, 1000.0), 4e-3)
    assert effective_atom_number(slab2000, REF_FIBER) == pytest.approx(analytic_2000, rel=5e-3)


def test_effective_atom_number_reference_cloud():
    n_eff = effective_atom_number(REF_CLOUD, REF_FIBER)
    analytic = 4e-3 * math.pi * (0.36 - 0.09) * math.sqrt(math.pi) * 1000 * math.erf(5)
    assert n_eff == pytest.approx(analytic, rel=1e-6)
    assert 4.2 <= n_eff <= 7.8


def test_zero_density_and_far_cloud():
    assert effective_atom_number(CloudModel(peak_density_per_um3=0.0), REF_FIBER) == 0.0
    centred = effective_atom_number(REF_CLOUD, REF_FIBER)
    far = effective_atom_number(translate(REF_CLOUD, (6500, 0, 0)), REF_FIBER)
    assert far < 1e-20 * centred


def test_invalid_geometry():
    class Thin:
        waist_radius_um = 0.3
        interaction_range_um = 0.0
    with pytest.raises(InvalidGeometryError):
        effective_atom_number(REF_CLOUD, Thin())
    with pytest.raises(InvalidGeometryError):
        FiberSpec(interaction_range_um=0.0)


def _random_geometries(n, seed):
    rng = np.random.default_rng(seed)
    for i in range(n):
        shape = "gaussian" if i % 2 == 0 else "flattop"
        a, dr = rng.uniform(0.1, 0.5), rng.uniform(0.1, 0.5)
        radii = (rng.uniform(100, 1000), rng.uniform(100, 1000), rng.uniform(200, 2000))
        center = (rng.uniform(-1.2, 1.2) * radii[0], rng.uniform(-1.2, 1.2) * radii[1],
                  rng.uniform(-500, 500))
        yield shape, center, radii, rng.uniform(1e-4, 1e-2), a, dr


@pytest.mark.parametrize("geom", list(_random_geometries(20, seed=7)))
def test_matches_riemann_oracle(geom):
    shape, center, radii, density, a, dr = geom
    value = effective_atom_number(CloudModel(shape, center, radii, density), FiberSpec(2 * a, dr))
    oracle = riemann_shell(shape, center, radii, density, a, dr)
    assert value == pytest.approx(oracle, rel=0.01, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(1.001, 3.0), st.floats(-1500, 1500))
def test_monotone_in_range(dr, factor, x0):
    cloud = translate(REF_CLOUD, (x0, 0, 0))
    small = effective_atom_number(cloud, FiberSpec(0.6, dr))
    large = effective_atom_number(cloud, FiberSpec(0.6, dr * factor))
    assert large >= small


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-6, 1e-2), st.floats(1.0, 10.0))
def test_monotone_in_density(n0, factor):
    lo = effective_atom_number(CloudModel(peak_density_per_um3=n0), REF_FIBER)
    hi = effective_atom_number(CloudModel(peak_density_per_um3=n0 * factor), REF_FIBER)
    assert hi >= lo


REGIME = RegimeParams(5e4)


def test_cloud_for_zero_atoms():
    c = cloud_for_atom_number(0.0, REGIME, REF_CLOUD)
    assert c.peak_density_per_um3 == 0.0
    assert c.radii_um == REF_CLOUD.radii_um


def test_crossover_continuity():
    n_x = REGIME.crossover_atoms
    below = cloud_for_atom_number(n_x, REGIME, REF_CLOUD)
    above = cloud_for_atom_number(n_x * (1 + 1e-12), REGIME, REF_CLOUD)
    assert below.shape == "gaussian" and above.shape == "flattop"
    assert total_atoms(below) == pytest.approx(n_x, rel=1e-12)
    assert total_atoms(above) == pytest.approx(n_x, rel=1e-9)
    vol_below = n_x / below.peak_density_per_um3
    vol_above = n_x / above.peak_density_per_um3
    assert vol_above == pytest.approx(vol_below, rel=1e-3)


def test_flattop_cube_root_scaling():
    n_x = REGIME.crossover_atoms
    at = cloud_for_atom_number(n_x * (1 + 1e-15), REGIME, REF_CLOUD)
    big = cloud_for_atom_number(8 * n_x, REGIME, REF_CLOUD)
    for r_big, r_at in zip(big.radii_um, at.radii_um):
        assert r_big == pytest.approx(2 * r_at, rel=1e-12)


@given(st.floats(0, 8))
def test_cloud_for_atom_number_conserves_atoms(log_n):
    n = 10.0 ** log_n
    c = cloud_for_atom_number(n, REGIME, REF_CLOUD)
    assert total_atoms(c) == pytest.approx(n, rel=1e-6)


def test_cloud_for_negative_atoms():
    with pytest.raises(ValidationError):
        cloud_for_atom_number(-1.0, REGIME, REF_CLOUD)


def test_translate_identity_and_inverse():
    assert translate(REF_CLOUD, (0, 0, 0)) == REF_CLOUD
    v = (12.5, -3.0, 7.25)
    back = translate(translate(REF_CLOUD, v), tuple(-x for x in v))
    assert back.center_um == pytest.approx(REF_CLOUD.center_um)


@given(st.tuples(coords, coords, coords), st.tuples(coords, coords, coords),
       st.sampled_from(["gaussian", "flattop"]))
def test_translation_covariance(p, v, shape):
    c = CloudModel(shape, (10, -20, 30), (700, 600, 1000), 2e-3)
    moved = translate(c, v)
    shifted = tuple(pi + vi for pi, vi in zip(p, v))
    q = sum(((pi - ci) / ri) ** 2 for pi, ci, ri in zip(p, c.center_um, c.radii_um))
    if shape == "flattop" and abs(q - 1) < 1e-9:
        return
    assert density_at(moved, shifted) == pytest.approx(density_at(c, p), rel=1e-9, abs=1e-300)


def test_validation():
    with pytest.raises(ValidationError):
        CloudModel(shape="cube")
    with pytest.raises(ValidationError):
        CloudModel(radii_um=(1, 0, 1))
    with pytest.raises(ValidationError):
        RegimeParams(central_density_exponent_alpha=1.5)
