"""Atom-density fields and their overlap with the nanofiber sensing shell.

The fiber runs along z through x = y = 0. Clouds are axis aligned: x and y
horizontal, z vertical (along the fiber).
"""
from dataclasses import dataclass, replace
from functools import lru_cache
import math

import numpy as np

from ._backend import kernels
from ._kernels_py import SHAPE_FLATTOP, SHAPE_GAUSSIAN
from .errors import InvalidGeometryError, ValidationError

GAUSSIAN = "gaussian"
FLATTOP = "flattop"
_SHAPE_CODES = {GAUSSIAN: SHAPE_GAUSSIAN, FLATTOP: SHAPE_FLATTOP}

PI_3_2 = math.pi ** 1.5
UNIT_BALL = 4.0 * math.pi / 3.0

# Overlap quadrature orders.
RADIAL_ORDER = 16
AZIMUTHAL_ORDER = 32
Z_ORDER = 8
Z_HALF_SPAN_RADII = 5.0
ABS_FLOOR = 1e-9
# Flat-top clouds: (rho, phi) orders double until successive sums agree.
FLATTOP_XY_RTOL = 1e-6
FLATTOP_MAX_DOUBLINGS = 4


@dataclass(frozen=True)
class CloudModel:
    """Axis-aligned atom cloud.

    For ``gaussian`` clouds ``radii_um`` are 1/e radii and
    ``peak_density_per_um3`` is the central density. For ``flattop`` clouds
    the radii are the hard semi-axes of a uniformly filled ellipsoid.
    """

    shape: str = GAUSSIAN
    center_um: tuple = (0.0, 0.0, 0.0)
    radii_um: tuple = (650.0, 650.0, 1000.0)
    peak_density_per_um3: float = 4e-3

    def __post_init__(self):
        if self.shape not in _SHAPE_CODES:
            raise ValidationError(f"shape must be one of {sorted(_SHAPE_CODES)}")
        center = tuple(float(c) for c in self.center_um)
        radii = tuple(float(r) for r in self.radii_um)
        if len(center) != 3 or len(radii) != 3:
            raise ValidationError("center_um and radii_um must be 3-vectors")
        if not all(math.isfinite(c) for c in center):
            raise ValidationError("center_um must be finite")
        if not all(math.isfinite(r) and r > 0 for r in radii):
            raise ValidationError("radii_um must be finite and > 0")
        if not (math.isfinite(self.peak_density_per_um3) and self.peak_density_per_um3 >= 0):
            raise ValidationError("peak_density_per_um3 must be finite and >= 0")
        object.__setattr__(self, "center_um", center)
        object.__setattr__(self, "radii_um", radii)

    @property
    def one_over_e_diameters_um(self):
        return tuple(2.0 * r for r in self.radii_um)


@dataclass(frozen=True)
class RegimeParams:
    """Temperature-limited / constant-density crossover.

    ``constant_density_per_um3=None`` ties the constant density to the
    template cloud so that the cloud volume is continuous at the crossover.
    """

    crossover_atoms: float = 5e4
    constant_density_per_um3: float | None = None
    central_density_exponent_alpha: float = 0.723

    def __post_init__(self):
        if not (math.isfinite(self.crossover_atoms) and self.crossover_atoms > 0):
            raise ValidationError("crossover_atoms must be > 0")
        n_c = self.constant_density_per_um3
        if n_c is not None and not (math.isfinite(n_c) and n_c > 0):
            raise ValidationError("constant_density_per_um3 must be > 0")
        if not 0.0 <= self.central_density_exponent_alpha <= 1.0:
            raise ValidationError("central_density_exponent_alpha must lie in [0, 1]")


def density_at(cloud, point_um):
    """Atom density at ``point_um`` (shape ``(3,)`` or ``(..., 3)``)."""
    p = np.asarray(point_um, dtype=float)
    q = np.sum(((p - np.asarray(cloud.center_um)) / np.asarray(cloud.radii_um)) ** 2, axis=-1)
    if cloud.shape == GAUSSIAN:
        out = cloud.peak_density_per_um3 * np.exp(-q)
    else:
        out = np.where(q < 1.0, cloud.peak_density_per_um3, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def total_atoms(cloud):
    wx, wy, wz = cloud.radii_um
    volume = PI_3_2 if cloud.shape == GAUSSIAN else UNIT_BALL
    return cloud.peak_density_per_um3 * volume * wx * wy * wz


def translate(cloud, offset_um):
    cx, cy, cz = cloud.center_um
    dx, dy, dz = (float(v) for v in offset_um)
    return replace(cloud, center_um=(cx + dx, cy + dy, cz + dz))


@lru_cache(maxsize=None)
def _gauss_legendre(order):
    return np.polynomial.legendre.leggauss(order)


def _gl_on(lo, hi, order):
    x, w = _gauss_legendre(order)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _shell_nodes(fiber, radial=RADIAL_ORDER, azimuthal=AZIMUTHAL_ORDER):
    a = fiber.waist_radius_um
    rho, w_rho = _gl_on(a, a + fiber.interaction_range_um, radial)
    phi, w_phi = _gl_on(0.0, 2.0 * math.pi, azimuthal)
    rr, pp = np.meshgrid(rho, phi, indexing="ij")
    weights = np.outer(w_rho * rho, w_phi)
    return (rr * np.cos(pp)).ravel(), (rr * np.sin(pp)).ravel(), weights.ravel()


def _flattop_overlap(cloud, fiber):
    """Shell integral of a uniform ellipsoid.

    Along z each shell node sees a chord of length 2 rz sqrt(1 - q), the
    exact limit of the z panels. Where the ellipsoid surface cuts the shell
    the chord has a square-root edge, so the (rho, phi) orders are doubled
    until two successive sums agree.
    """
    cx, cy, _ = cloud.center_um
    rx, ry, rz = cloud.radii_um

    def at(radial, azimuthal):
        xs, ys, wxy = _shell_nodes(fiber, radial, azimuthal)
        q = ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2
        chord = 2.0 * rz * np.sqrt(np.clip(1.0 - q, 0.0, None))
        return cloud.peak_density_per_um3 * float(wxy @ chord)

    radial, azimuthal = RADIAL_ORDER, AZIMUTHAL_ORDER
    prev = at(radial, azimuthal)
    for _ in range(FLATTOP_MAX_DOUBLINGS):
        radial, azimuthal = 2 * radial, 2 * azimuthal
        cur = at(radial, azimuthal)
        if abs(cur - prev) <= FLATTOP_XY_RTOL * abs(cur):
            return cur
        prev = cur
    return prev


def effective_atom_number(cloud, fiber, rtol=1e-10):
    """Atoms inside the hollow cylinder a <= rho <= a + range around the fiber.

    Product Gauss-Legendre in (rho, phi) and adaptive Gauss-Legendre panels
    along z, over +-5 z-radii around the cloud centre. Flat-top clouds take
    the exact z chord per node instead (see :func:`_flattop_overlap`).
    """
    if not fiber.interaction_range_um > 0:
        raise InvalidGeometryError("interaction_range_um must be > 0")
    if cloud.peak_density_per_um3 == 0.0:
        return 0.0
    if cloud.shape == FLATTOP:
        return _flattop_overlap(cloud, fiber)
    xs, ys, wxy = _shell_nodes(fiber)
    code = _SHAPE_CODES[cloud.shape]
    cz = cloud.center_um[2]
    rz = cloud.radii_um[2]
    z_lo = cz - Z_HALF_SPAN_RADII * rz
    z_hi = cz + Z_HALF_SPAN_RADII * rz
    breaks = [z_lo, z_hi]

    def panel(lo, hi):
        zs, wz = _gl_on(lo, hi, Z_ORDER)
        return kernels.shell_sum(code, cloud.center_um, cloud.radii_um,
                                 cloud.peak_density_per_um3, xs, ys, wxy, zs, wz)

    stack = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        edges = np.linspace(lo, hi, 5)
        stack += [(l, h, panel(l, h), 0) for l, h in zip(edges[:-1], edges[1:])]
    estimate = abs(sum(s[2] for s in stack))
    if estimate == 0.0:
        return 0.0
    span = z_hi - z_lo
    total = 0.0
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        diff = abs(left + right - whole)
        if diff <= rtol * estimate * (hi - lo) / span or diff <= ABS_FLOOR * estimate or depth >= 40:
            total += left + right
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    return total


def cloud_for_atom_number(n_atoms, regime, template):
    """Cloud holding ``n_atoms`` in the regime appropriate to that number.

    At or below the crossover the Gaussian template keeps its radii and its
    peak density scales with N. Above it the cloud is a flat-top ellipsoid
    at the constant density, growing as N**(1/3) with the template aspect
    ratio.
    """
    if not (math.isfinite(n_atoms) and n_atoms >= 0):
        raise ValidationError("atom number must be finite and >= 0")
    wx, wy, wz = template.radii_um
    gauss_volume = PI_3_2 * wx * wy * wz
    if n_atoms <= regime.crossover_atoms:
        return CloudModel(GAUSSIAN, template.center_um, template.radii_um,
                          n_atoms / gauss_volume)
    n_c = regime.constant_density_per_um3
    if n_c is None:
        n_c = regime.crossover_atoms / gauss_volume
    scale = (n_atoms / (n_c * UNIT_BALL * wx * wy * wz)) ** (1.0 / 3.0)
    return CloudModel(FLATTOP, template.center_um,
                      (wx * scale, wy * scale, wz * scale), n_c)
