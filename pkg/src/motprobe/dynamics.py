"""Atom-number evolution and what the two detectors see of it.

The trap obeys dN/dt = R - N / tau between switching events. Atoms are
trapped only while repump, cooling light and the quadrupole field are all
on; switching any of them off empties the trap at once (untrapped atoms
leave in milliseconds).
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .cloud import cloud_for_atom_number, effective_atom_number
from .detectors import photodiode_voltage, spcm_sample_many, split_state
from .errors import InvalidScheduleError, ValidationError
from .physics import scattering_rate
from .series import TimeSeries

SUBSYSTEMS = ("repump", "cooling", "bfield", "dispenser")
EVENTS = tuple(f"{s}_{state}" for s in SUBSYSTEMS for state in ("on", "off"))
SCHEDULE_STREAM = 1


@dataclass(frozen=True)
class TrapDynamics:
    capture_rate_R_per_s: float = 0.0
    lifetime_tau_s: float = 1.0
    initial_atoms_N0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.capture_rate_R_per_s) and self.capture_rate_R_per_s >= 0):
            raise ValidationError("capture_rate_R_per_s must be >= 0")
        if not (math.isfinite(self.lifetime_tau_s) and self.lifetime_tau_s > 0):
            raise ValidationError("lifetime_tau_s must be > 0")
        if not (math.isfinite(self.initial_atoms_N0) and self.initial_atoms_N0 >= 0):
            raise ValidationError("initial_atoms_N0 must be >= 0")

    @property
    def steady_state_atoms(self):
        return self.capture_rate_R_per_s * self.lifetime_tau_s


def loading_curve(dyn, t):
    """N(t) = R tau (1 - exp(-t/tau)) + N0 exp(-t/tau)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("t must be >= 0")
    e = np.exp(-t / dyn.lifetime_tau_s)
    n = dyn.steady_state_atoms * -np.expm1(-t / dyn.lifetime_tau_s) + dyn.initial_atoms_N0 * e
    return float(n) if n.ndim == 0 else n


def decay_curve(dyn, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("t must be >= 0")
    n = dyn.initial_atoms_N0 * np.exp(-t / dyn.lifetime_tau_s)
    return float(n) if n.ndim == 0 else n


class TnfResponse:
    """Effective atoms seen by the fiber as a function of total atom number.

    Linear below the crossover (fixed Gaussian geometry), a power law
    ``E_x (N / N_x)**alpha`` above it. ``E_x`` is computed once.
    """

    def __init__(self, regime, template, fiber):
        self.regime = regime
        n_x = regime.crossover_atoms
        self.crossover_signal = effective_atom_number(
            cloud_for_atom_number(n_x, regime, template), fiber)

    def __call__(self, n_atoms):
        n = np.asarray(n_atoms, dtype=float)
        if np.any(n < 0):
            raise ValidationError("atom number must be >= 0")
        n_x = self.regime.crossover_atoms
        alpha = self.regime.central_density_exponent_alpha
        ratio = n / n_x
        upper = np.power(np.maximum(ratio, 1.0), alpha)
        out = self.crossover_signal * np.where(ratio <= 1.0, ratio, upper)
        return float(out) if out.ndim == 0 else out

    def inverse(self, signal):
        """Atom number producing ``signal`` effective atoms (alpha > 0)."""
        ratio = signal / self.crossover_signal
        if ratio <= 1.0:
            return ratio * self.regime.crossover_atoms
        alpha = self.regime.central_density_exponent_alpha
        if alpha == 0:
            raise ValidationError("signal above the crossover level is unreachable with alpha = 0")
        return self.regime.crossover_atoms * ratio ** (1.0 / alpha)


def tnf_visible_signal(n_atoms, regime, template, fiber):
    """Effective atom number the fiber responds to when the trap holds ``n_atoms``."""
    if not (math.isfinite(n_atoms) and n_atoms >= 0):
        raise ValidationError("atom number must be finite and >= 0")
    if n_atoms <= regime.crossover_atoms:
        return effective_atom_number(cloud_for_atom_number(n_atoms, regime, template), fiber)
    return TnfResponse(regime, template, fiber)(n_atoms)


@dataclass(frozen=True)
class Schedule:
    """Switching events on a uniformly sampled time axis.

    ``initially_on`` lists the subsystems on at t = 0 and ``initial_atoms``
    the trap population at t = 0.
    """

    events: tuple = ()
    duration_s: float = 10.0
    sample_interval_s: float = 0.1
    initially_on: frozenset = field(default_factory=lambda: frozenset({"dispenser"}))
    initial_atoms: float = 0.0

    def __post_init__(self):
        events = tuple((float(t), str(e)) for t, e in self.events)
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "initially_on", frozenset(self.initially_on))
        if not (math.isfinite(self.duration_s) and self.duration_s > 0):
            raise InvalidScheduleError("duration_s must be > 0")
        if not (math.isfinite(self.sample_interval_s) and self.sample_interval_s > 0):
            raise InvalidScheduleError("sample_interval_s must be > 0")
        if not self.initially_on <= set(SUBSYSTEMS):
            raise InvalidScheduleError(f"initially_on must be a subset of {SUBSYSTEMS}")
        if not (math.isfinite(self.initial_atoms) and self.initial_atoms >= 0):
            raise InvalidScheduleError("initial_atoms must be >= 0")
        times = [t for t, _ in events]
        if any(e not in EVENTS for _, e in events):
            raise InvalidScheduleError(f"events must be drawn from {EVENTS}")
        if any(b <= a for a, b in zip(times[:-1], times[1:])):
            raise InvalidScheduleError("event times must be strictly increasing")
        if times and (times[0] < 0 or times[-1] > self.duration_s):
            raise InvalidScheduleError("event times must lie within [0, duration]")

    def sample_times(self):
        n = int(math.floor(self.duration_s / self.sample_interval_s + 1e-9)) + 1
        return np.arange(n) * self.sample_interval_s


def trajectory(sched, cfg):
    """Atom number and subsystem states at every sample time.

    Returns ``(times, atoms, states)`` where ``states`` maps each subsystem
    name to a boolean array.
    """
    times = sched.sample_times()
    eps = 1e-9 * sched.sample_interval_s
    on = set(sched.initially_on)
    t_ref, n_ref = 0.0, float(sched.initial_atoms)
    pending = list(sched.events)
    atoms = np.empty(times.size)
    states = {s: np.empty(times.size, dtype=bool) for s in SUBSYSTEMS}

    def evolve(n0, dt):
        if not {"repump", "cooling", "bfield"} <= on:
            return 0.0
        dyn = cfg.dynamics if "dispenser" in on else cfg.decay
        return loading_curve(TrapDynamics(dyn.capture_rate_R_per_s, dyn.lifetime_tau_s, n0), dt)

    if not {"repump", "cooling", "bfield"} <= on:
        n_ref = 0.0
    for k, t in enumerate(times):
        while pending and pending[0][0] <= t + eps:
            t_event, event = pending.pop(0)
            n_ref = evolve(n_ref, max(t_event - t_ref, 0.0))
            t_ref = t_event
            name, state = event.rsplit("_", 1)
            (on.add if state == "on" else on.discard)(name)
            n_ref = evolve(n_ref, 0.0)
        atoms[k] = evolve(n_ref, max(t - t_ref, 0.0))
        for s in SUBSYSTEMS:
            states[s][k] = s in on
    return times, atoms, states


def expected_channels(sched, cfg):
    """Noise-free SPCM rate (counts/s) and photodiode voltage per sample."""
    times, atoms, states = trajectory(sched, cfg)
    gamma = scattering_rate(cfg.laser)
    spcm = cfg.spcm
    response = TnfResponse(cfg.regime, cfg.cloud, cfg.fiber)
    efficiency = cfg.fiber.coupling_eta_f * spcm.quantum_efficiency_eta_D * cfg.fiber.transmission_T
    rate = (spcm.dark_ambient_rate_per_s
            + spcm.repump_scatter_rate_per_s * states["repump"]
            + spcm.cooling_scatter_rate_per_s * states["cooling"]
            + response(atoms) * efficiency * gamma)
    volts = (photodiode_voltage(atoms, gamma, cfg.photodiode, cfg.laser.wavelength_um)
             + cfg.photodiode.background_volts * states["cooling"])
    return times, atoms, rate, volts


def simulate_schedule(sched, cfg, seed=None, noise=True):
    """Run ``sched`` and return ``(spcm_series, photodiode_series)``.

    With noise each SPCM sample is one Poisson gate reported as counts/s;
    the photodiode channel is deterministic.
    """
    if not isinstance(sched, Schedule):
        raise InvalidScheduleError("sched must be a Schedule")
    seed = cfg.seed if seed is None else seed
    times, _, rate, volts = expected_channels(sched, cfg)
    if noise:
        counts, _ = spcm_sample_many(rate, cfg.spcm, split_state(seed, SCHEDULE_STREAM))
        rate = counts / cfg.spcm.gate_time_s
    meta = {"seed": int(seed), "noise": bool(noise)}
    spcm_series = TimeSeries("time", "s", "spcm_rate", "counts/s", times, rate, dict(meta))
    pd_series = TimeSeries("time", "s", "photodiode", "V", times, volts, dict(meta))
    return spcm_series, pd_series
