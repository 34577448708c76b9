"""Cloud scans across the fiber and the camera cross-section channel."""
import math

import numpy as np

from .cloud import FLATTOP, GAUSSIAN, _gl_on, density_at, effective_atom_number, translate
from .detectors import spcm_sample_many, split_state
from .errors import ValidationError
from .physics import PhotonBudget, photon_rate, scattering_rate
from .series import TimeSeries

SCAN_STREAM = 2
_LOS_HALF_SPAN_RADII = 6.0
_LOS_PANELS = 6
_LOS_ORDER = 16


def _positions(positions_um):
    xs = np.asarray(positions_um, dtype=float).ravel()
    if xs.size == 0 or not np.all(np.isfinite(xs)):
        raise ValidationError("positions must be finite and non-empty")
    if np.any(np.diff(xs) <= 0):
        raise ValidationError("positions must be strictly increasing")
    return xs


def scan_expected_rates(cloud, fiber, laser, spcm, positions_um):
    """Noise-free SPCM rate with the cloud displaced by each x offset.

    All three light/field subsystems are on, so the repump, cooling and
    dark/ambient backgrounds are included.
    """
    xs = _positions(positions_um)
    gamma = scattering_rate(laser)
    background = (spcm.dark_ambient_rate_per_s + spcm.repump_scatter_rate_per_s
                  + spcm.cooling_scatter_rate_per_s)
    rates = np.empty(xs.size)
    for i, x in enumerate(xs):
        n_eff = effective_atom_number(translate(cloud, (x, 0.0, 0.0)), fiber)
        budget = PhotonBudget(n_eff, gamma, fiber.coupling_eta_f,
                              spcm.quantum_efficiency_eta_D, fiber.transmission_T)
        rates[i] = background + photon_rate(budget)
    return rates


def simulate_scan(cloud, fiber, laser, spcm, positions_um, seed, noise=True):
    """Photon rate versus cloud offset along x, as a position-indexed series (mm)."""
    xs = _positions(positions_um)
    rates = scan_expected_rates(cloud, fiber, laser, spcm, xs)
    if noise:
        counts, _ = spcm_sample_many(rates, spcm, split_state(seed, SCAN_STREAM))
        rates = counts / spcm.gate_time_s
    return TimeSeries("position", "mm", "spcm_rate", "counts/s", xs * 1e-3, rates,
                      {"seed": int(seed), "noise": bool(noise)})


def _line_of_sight(cloud, axis_index, view_index, pos, height):
    """Integral of density along the viewing axis through one image column."""
    c = cloud.center_um
    r = cloud.radii_um
    if cloud.shape == FLATTOP:
        q = ((pos - c[axis_index]) / r[axis_index]) ** 2 + ((height - c[2]) / r[2]) ** 2
        if q >= 1.0:
            return 0.0
        half = r[view_index] * math.sqrt(1.0 - q)
        edges = [c[view_index] - half, c[view_index] + half]
        panels = 1
    else:
        half = _LOS_HALF_SPAN_RADII * r[view_index]
        edges = [c[view_index] - half, c[view_index] + half]
        panels = _LOS_PANELS
    grid = np.linspace(edges[0], edges[1], panels + 1)
    total = 0.0
    for lo, hi in zip(grid[:-1], grid[1:]):
        s, w = _gl_on(lo, hi, _LOS_ORDER)
        pts = np.empty((s.size, 3))
        pts[:, axis_index] = pos
        pts[:, view_index] = s
        pts[:, 2] = height
        total += float(w @ density_at(cloud, pts))
    return total


def camera_cross_section(cloud, axis, positions_um, height_um=None):
    """Column density across the cloud, normalised to a peak of 1.

    For ``axis='x'`` the camera looks along y, and vice versa; the cut is
    taken at ``height_um`` (default the cloud centre) perpendicular to the
    fiber.
    """
    if axis not in ("x", "y"):
        raise ValidationError("axis must be 'x' or 'y'")
    xs = _positions(positions_um)
    axis_index, view_index = (0, 1) if axis == "x" else (1, 0)
    height = cloud.center_um[2] if height_um is None else float(height_um)
    col = np.array([_line_of_sight(cloud, axis_index, view_index, p, height) for p in xs])
    peak = col.max()
    if peak > 0:
        col = col / peak
    return TimeSeries("position", "mm", "column_density", "normalized", xs * 1e-3, col,
                      {"axis": axis, "shape": cloud.shape})


__all__ = ["simulate_scan", "scan_expected_rates", "camera_cross_section", "GAUSSIAN", "FLATTOP"]
