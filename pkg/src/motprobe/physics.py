"""Physical constants, the two-level scattering rate and the fiber photon budget.

Canonical units inside the package: seconds, micrometres, atoms/um^3 and
photons/s. Laser parameters keep their laboratory units (MHz, mW/cm^2)
because they only ever appear as ratios.
"""
from dataclasses import dataclass
import math

from .errors import InvalidGeometryError, ValidationError

PLANCK_J_S = 6.62607015e-34
SPEED_OF_LIGHT_M_S = 299792458.0

RB_D2_LINEWIDTH_MHZ = 6.066
RB_D2_WAVELENGTH_UM = 0.780241
# Calibrated so that the default beam reproduces gamma_sc = 6.5e5 /s.
ISAT_EFF_DEFAULT_MW_CM2 = 4.08


def _finite(name, value):
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class LaserConfig:
    """Cooling light seen by one atom.

    ``detuning_MHz`` is negative for red detuning. ``beam_intensity_mW_cm2``
    is the single-beam intensity; saturation uses the single-beam
    convention, with ``isat_eff_mW_cm2`` absorbing the choice.
    """

    detuning_MHz: float = -12.0
    beam_intensity_mW_cm2: float = 2.4
    n_beams: int = 6
    linewidth_MHz: float = RB_D2_LINEWIDTH_MHZ
    isat_eff_mW_cm2: float = ISAT_EFF_DEFAULT_MW_CM2
    wavelength_um: float = RB_D2_WAVELENGTH_UM

    def __post_init__(self):
        for name in ("detuning_MHz", "beam_intensity_mW_cm2", "linewidth_MHz",
                     "isat_eff_mW_cm2", "wavelength_um"):
            _finite(name, getattr(self, name))
        if self.beam_intensity_mW_cm2 < 0:
            raise ValidationError("beam_intensity_mW_cm2 must be >= 0")
        if int(self.n_beams) != self.n_beams or self.n_beams < 1:
            raise ValidationError("n_beams must be an integer >= 1")
        if self.linewidth_MHz <= 0:
            raise ValidationError("linewidth_MHz must be > 0")
        if self.isat_eff_mW_cm2 <= 0:
            raise ValidationError("isat_eff_mW_cm2 must be > 0")
        if self.wavelength_um <= 0:
            raise ValidationError("wavelength_um must be > 0")

    @property
    def gamma_rad_per_s(self):
        return 2.0 * math.pi * self.linewidth_MHz * 1e6

    @property
    def saturation(self):
        return self.beam_intensity_mW_cm2 / self.isat_eff_mW_cm2


@dataclass(frozen=True)
class FiberSpec:
    """Nanofiber waist and the shell of surrounding space it can hear."""

    waist_diameter_um: float = 0.6
    interaction_range_um: float = 0.3
    transmission_T: float = 0.8
    coupling_eta_f: float = 0.2

    def __post_init__(self):
        for name in ("waist_diameter_um", "interaction_range_um",
                     "transmission_T", "coupling_eta_f"):
            value = getattr(self, name)
            _finite(name, value)
            if value <= 0:
                err = InvalidGeometryError if name.endswith("_um") else ValidationError
                raise err(f"{name} must be > 0")
        if self.transmission_T > 1:
            raise ValidationError("transmission_T must be <= 1")
        if self.coupling_eta_f >= 1:
            raise ValidationError("coupling_eta_f must be < 1")

    @property
    def waist_radius_um(self):
        return 0.5 * self.waist_diameter_um


@dataclass(frozen=True)
class PhotonBudget:
    n_eff: float
    gamma_sc_per_s: float
    eta_f: float
    eta_D: float
    transmission_T: float

    def __post_init__(self):
        for name in ("n_eff", "gamma_sc_per_s", "eta_f", "eta_D", "transmission_T"):
            value = getattr(self, name)
            _finite(name, value)
            if value < 0:
                raise ValidationError(f"{name} must be >= 0")
        for name in ("eta_f", "eta_D", "transmission_T"):
            if getattr(self, name) > 1:
                raise ValidationError(f"{name} must be <= 1")


def scattering_rate(laser):
    """Photons scattered per atom per second, two-level steady state.

    ``(Gamma/2) s / (1 + s + (2 delta / Gamma)^2)`` with both the detuning
    and the linewidth in MHz, so the ratio is unit free.
    """
    s = laser.saturation
    x = 2.0 * laser.detuning_MHz / laser.linewidth_MHz
    return 0.5 * laser.gamma_rad_per_s * s / (1.0 + s + x * x)


def photon_rate(budget):
    """Detected count rate: N_eff * eta_f * gamma_sc * eta_D * T."""
    return (budget.n_eff * budget.eta_f * budget.gamma_sc_per_s
            * budget.eta_D * budget.transmission_T)


def photon_energy(wavelength_um):
    if not wavelength_um > 0 or not math.isfinite(wavelength_um):
        raise ValidationError("wavelength_um must be a finite positive number")
    return PLANCK_J_S * SPEED_OF_LIGHT_M_S / (wavelength_um * 1e-6)
