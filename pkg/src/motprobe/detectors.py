"""SPCM photon counting and the photodiode voltage chain.

Random state is an explicit unsigned 64-bit integer that callers pass in
and get back; nothing here touches a process-global generator. The
generator and the Poisson algorithm are documented in ``_kernels_py``.
"""
from dataclasses import dataclass
import math

import numpy as np

from ._backend import kernels
from ._kernels_py import GOLDEN_GAMMA, MASK64, splitmix64
from .errors import InvalidRateError, ValidationError
from .physics import photon_energy


@dataclass(frozen=True)
class SpcmSpec:
    """Single-photon counter: efficiency, background terms and gate.

    The backgrounds are the count-rate steps seen as the repump and the
    cooling light come on, on top of the dark plus ambient floor.
    """

    quantum_efficiency_eta_D: float = 0.6
    dark_ambient_rate_per_s: float = 1.5e5
    repump_scatter_rate_per_s: float = 2e4
    cooling_scatter_rate_per_s: float = 4e4
    gate_time_s: float = 0.1

    def __post_init__(self):
        if not 0 < self.quantum_efficiency_eta_D <= 1:
            raise ValidationError("quantum_efficiency_eta_D must lie in (0, 1]")
        for name in ("dark_ambient_rate_per_s", "repump_scatter_rate_per_s",
                     "cooling_scatter_rate_per_s"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValidationError(f"{name} must be finite and >= 0")
        if not (math.isfinite(self.gate_time_s) and self.gate_time_s > 0):
            raise ValidationError("gate_time_s must be > 0")


@dataclass(frozen=True)
class PhotodiodeSpec:
    collection_fraction: float = 0.01
    responsivity_A_per_W: float = 0.5
    load_resistance_ohm: float = 1e6
    background_volts: float = 0.02

    def __post_init__(self):
        for name in ("collection_fraction", "responsivity_A_per_W",
                     "load_resistance_ohm", "background_volts"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValidationError(f"{name} must be finite and >= 0")
        if self.collection_fraction >= 1:
            raise ValidationError("collection_fraction must be < 1")


def seed_state(seed):
    """Initial generator state for an integer seed."""
    return int(seed) & MASK64


def split_state(seed, stream):
    """Independent state for sub-stream ``stream`` of ``seed``."""
    mixed, _ = splitmix64((int(seed) ^ ((int(stream) * GOLDEN_GAMMA) & MASK64)) & MASK64)
    return mixed


def _check_rate(rate):
    if not (math.isfinite(rate) and rate >= 0):
        raise InvalidRateError(f"expected rate must be finite and >= 0, got {rate!r}")


def spcm_sample(expected_rate, spec, state):
    """Counts registered in one gate; returns ``(counts, new_state)``."""
    expected_rate = float(expected_rate)
    _check_rate(expected_rate)
    k, state = kernels.poisson_one(expected_rate * spec.gate_time_s, state)
    return int(k), int(state)


def spcm_sample_many(expected_rates, spec, state):
    """Vectorised :func:`spcm_sample`, drawing in array order."""
    rates = np.asarray(expected_rates, dtype=float).ravel()
    if not np.all(np.isfinite(rates)) or np.any(rates < 0):
        raise InvalidRateError("expected rates must be finite and >= 0")
    counts, state = kernels.poisson_draws(rates * spec.gate_time_s, state)
    return counts, int(state)


def photodiode_voltage(n_atoms, gamma_sc, spec, wavelength_um):
    """Voltage across the load for fluorescence from ``n_atoms`` atoms.

    Background is not included; it is added by the caller when the cooling
    light is on.
    """
    if np.any(np.asarray(n_atoms) < 0):
        raise ValidationError("atom number must be >= 0")
    watts = np.asarray(n_atoms, dtype=float) * gamma_sc * photon_energy(wavelength_um)
    volts = watts * spec.collection_fraction * spec.responsivity_A_per_W * spec.load_resistance_ohm
    return float(volts) if np.ndim(volts) == 0 else volts
