"""Experiment configuration: reference defaults, JSON loading, hashing.

Config files carry units in their key names and use laboratory units
(mm, mW/cm^2, MHz, atoms/mm^3); they are converted to micrometres and
atoms/um^3 here and nowhere else.
"""
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache
import hashlib
import json
import logging
import math

from .cloud import GAUSSIAN, CloudModel, RegimeParams
from .detectors import PhotodiodeSpec, SpcmSpec
from .dynamics import TnfResponse, TrapDynamics
from .errors import ConfigError, OutputError, ValidationError
from .physics import FiberSpec, LaserConfig, scattering_rate

log = logging.getLogger(__name__)

DEFAULT_SEED = 20090101
# Fluorescence step observed when the field switches on and the MOT loads.
MOT_SIGNAL_PER_S = 4e5
LOADING_TAU_S = 0.43
LIFETIME_TAU_S = 9.4

UM_PER_MM = 1e3
UM3_PER_MM3 = 1e9


@dataclass(frozen=True)
class Sampling:
    sample_interval_s: float = 0.1
    step_segment_s: float = 10.0
    loading_duration_s: float = 4.0
    decay_duration_s: float = 20.0
    scan_half_width_mm: float = 3.25
    scan_points: int = 101

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"sampling.{f.name} must be > 0")
        if int(self.scan_points) != self.scan_points or self.scan_points < 5:
            raise ValidationError("sampling.scan_points must be an integer >= 5")


@dataclass(frozen=True)
class ExperimentConfig:
    laser: LaserConfig = field(default_factory=LaserConfig)
    fiber: FiberSpec = field(default_factory=FiberSpec)
    spcm: SpcmSpec = field(default_factory=SpcmSpec)
    photodiode: PhotodiodeSpec = field(default_factory=PhotodiodeSpec)
    cloud: CloudModel = field(default_factory=CloudModel)
    regime: RegimeParams = field(default_factory=RegimeParams)
    dynamics: TrapDynamics = field(default_factory=TrapDynamics)
    decay: TrapDynamics = field(default_factory=TrapDynamics)
    sampling: Sampling = field(default_factory=Sampling)
    seed: int = DEFAULT_SEED

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def scan_positions_um(self):
        half = self.sampling.scan_half_width_mm * UM_PER_MM
        n = int(self.sampling.scan_points)
        return [-half + 2.0 * half * i / (n - 1) for i in range(n)]


@lru_cache(maxsize=None)
def _reference_capture_rate():
    """Capture rate whose steady state gives the observed MOT count step."""
    laser, fiber, spcm = LaserConfig(), FiberSpec(), SpcmSpec()
    efficiency = fiber.coupling_eta_f * spcm.quantum_efficiency_eta_D * fiber.transmission_T
    target = MOT_SIGNAL_PER_S / (efficiency * scattering_rate(laser))
    n_ss = TnfResponse(RegimeParams(), CloudModel(), fiber).inverse(target)
    return n_ss / LOADING_TAU_S


def paper_default():
    """Every default parameter of the reference experiment."""
    regime = RegimeParams()
    return ExperimentConfig(
        dynamics=TrapDynamics(_reference_capture_rate(), LOADING_TAU_S, 0.0),
        decay=TrapDynamics(0.0, LIFETIME_TAU_S, 10.0 * regime.crossover_atoms),
        regime=regime,
    )


# JSON section name -> (attribute, type, {json key: (field, scale)}).
def _plain(cls):
    return {f.name: (f.name, 1.0) for f in fields(cls)}


_SECTIONS = {
    "laser": ("laser", LaserConfig, _plain(LaserConfig)),
    "fiber": ("fiber", FiberSpec, _plain(FiberSpec)),
    "spcm": ("spcm", SpcmSpec, _plain(SpcmSpec)),
    "photodiode": ("photodiode", PhotodiodeSpec, _plain(PhotodiodeSpec)),
    "cloud": ("cloud", CloudModel, {
        "shape": ("shape", None),
        "center_mm": ("center_um", UM_PER_MM),
        "diameters_mm": ("radii_um", 0.5 * UM_PER_MM),
        "peak_density_per_mm3": ("peak_density_per_um3", 1.0 / UM3_PER_MM3),
    }),
    "regime": ("regime", RegimeParams, {
        "crossover_atoms": ("crossover_atoms", 1.0),
        "constant_density_per_mm3": ("constant_density_per_um3", 1.0 / UM3_PER_MM3),
        "central_density_exponent_alpha": ("central_density_exponent_alpha", 1.0),
    }),
    "loading": ("dynamics", TrapDynamics, _plain(TrapDynamics)),
    "decay": ("decay", TrapDynamics, _plain(TrapDynamics)),
    "sampling": ("sampling", Sampling, _plain(Sampling)),
}


def _to_internal(section, key, value, scale):
    if scale is None:
        if not isinstance(value, str):
            raise ValidationError(f"{section}.{key} must be a string")
        return value
    if value is None and key == "constant_density_per_mm3":
        return None
    if isinstance(value, list):
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ValidationError(f"{section}.{key} must be a list of numbers")
        return tuple(v * scale for v in value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{section}.{key} must be a number")
    return value if scale == 1.0 else value * scale


def config_from_dict(doc, base=None):
    """Build a config from a parsed JSON document, defaults filling gaps."""
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    base = paper_default() if base is None else base
    unknown = set(doc) - set(_SECTIONS) - {"seed"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    updates = {}
    for section, (attr, cls, keys) in _SECTIONS.items():
        given = doc.get(section)
        if given is None:
            log.info("config: section %r not given, using defaults", section)
            continue
        if not isinstance(given, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        bad = set(given) - set(keys)
        if bad:
            raise ConfigError(f"unknown keys in {section!r}: {sorted(bad)}")
        for key in sorted(set(keys) - set(given)):
            log.info("config: %s.%s not given, using default", section, key)
        changes = {}
        for key, value in given.items():
            name, scale = keys[key]
            changes[name] = _to_internal(section, key, value, scale)
        try:
            updates[attr] = replace(getattr(base, attr), **changes)
        except TypeError as exc:
            raise ValidationError(f"{section}: {exc}") from exc
    if "seed" in doc:
        seed = doc["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
            raise ValidationError("seed must be an integer in [0, 2**64)")
        updates["seed"] = seed
    else:
        log.info("config: seed not given, using default %d", base.seed)
    return replace(base, **updates)


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(doc)


def config_to_dict(cfg):
    """JSON-ready document in file units; inverse of :func:`config_from_dict`."""
    doc = {"seed": cfg.seed}
    for section, (attr, _, keys) in _SECTIONS.items():
        obj = getattr(cfg, attr)
        values = asdict(obj)
        out = {}
        for key, (name, scale) in keys.items():
            v = values[name]
            if scale is None or v is None:
                out[key] = v
            elif isinstance(v, (tuple, list)):
                out[key] = [x / scale for x in v]
            else:
                out[key] = v / scale if scale != 1.0 else v
        doc[section] = out
    return doc


def _canonical(value):
    # 6 and 6.0 are the same setting and must hash alike.
    if isinstance(value, dict):
        return {k: _canonical(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_canonical(v) for v in value]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    return value


def config_hash(cfg):
    doc = _canonical(config_to_dict(cfg))
    doc["seed"] = int(cfg.seed)
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


__all__ = ["ExperimentConfig", "Sampling", "paper_default", "load_config",
           "config_from_dict", "config_to_dict", "config_hash", "GAUSSIAN"]
