"""Digital twin of a magneto-optical trap probed through a tapered nanofiber.

Forward models (photon budget, cloud overlap, trap dynamics, detectors)
produce synthetic SPCM and photodiode signals; the estimation module
recovers cloud width, loading time and lifetime from them.
"""
from ._backend import BACKEND
from .cloud import (CloudModel, RegimeParams, cloud_for_atom_number, density_at,
                    effective_atom_number, total_atoms, translate)
from .config import ExperimentConfig, load_config, paper_default
from .detectors import PhotodiodeSpec, SpcmSpec, photodiode_voltage, spcm_sample
from .dynamics import (Schedule, TrapDynamics, decay_curve, loading_curve,
                       simulate_schedule, tnf_visible_signal)
from .estimation import FitResult, fit_decay, fit_gaussian, fit_loading, step_levels
from .physics import (FiberSpec, LaserConfig, PhotonBudget, photon_energy, photon_rate,
                      scattering_rate)
from .scan import camera_cross_section, simulate_scan
from .series import TimeSeries

__version__ = "0.1.0"
