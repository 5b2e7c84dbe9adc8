"""Run configuration: INI-style ``key = value`` sections over module defaults."""

import configparser
from dataclasses import dataclass, field, fields, replace

from .formants import FormantConfig
from .interpret.mlp import MlpConfig
from .pitch import PitchConfig
from .profile import AnalysisConfig
from .spectral import SpectralConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class InterpretConfig:
    alpha: float = 0.05
    heldout_fraction: float = 0.2
    n_pcs: int = 8
    folds: int = 5
    gmm_restarts: int = 5
    bimodality_threshold: float = 2.0
    bimodality_min_weight: float = 0.1
    ridge_lambda: float = 1.0
    min_cluster: int = 50


@dataclass(frozen=True)
class RunOptions:
    seed: int = 0
    jobs: int = 1
    min_chunk_seconds: float = 30.0


@dataclass(frozen=True)
class RunConfig:
    pitch: PitchConfig = field(default_factory=PitchConfig)
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    formants: FormantConfig = field(default_factory=FormantConfig)
    interpret: InterpretConfig = field(default_factory=InterpretConfig)
    mlp: MlpConfig = field(default_factory=MlpConfig)
    run: RunOptions = field(default_factory=RunOptions)

    @property
    def analysis(self):
        return AnalysisConfig(self.pitch, self.spectral, self.formants)

    def with_overrides(self, **run_values):
        values = {k: v for k, v in run_values.items() if v is not None}
        return replace(self, run=replace(self.run, **values)) if values else self

    def as_dict(self):
        return {f.name: {g.name: getattr(getattr(self, f.name), g.name)
                         for g in fields(getattr(self, f.name))}
                for f in fields(self)}


def _coerce(raw, default, where):
    try:
        if isinstance(default, bool):
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = [s for s in (p.strip() for p in raw.split(",")) if s]
            kind = type(default[0]) if default else float
            return tuple(kind(s) for s in items)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r}") from None


def load_config(path=None):
    """Defaults, optionally overridden by the sections of an INI file."""
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    with open(path) as fh:
        parser.read_file(fh)
    sections = {f.name: f for f in fields(RunConfig)}
    updates = {}
    for section in parser.sections():
        if section not in sections:
            raise ConfigError(f"unknown config section [{section}]")
        current = getattr(cfg, section)
        known = {f.name for f in fields(current)}
        values = {}
        for key, raw in parser.items(section):
            if key not in known:
                raise ConfigError(f"unknown config key {section}.{key}")
            values[key] = _coerce(raw, getattr(current, key), f"{section}.{key}")
        updates[section] = replace(current, **values)
    cfg = replace(cfg, **updates)
    validate(cfg)
    return cfg


def validate(cfg):
    p = cfg.pitch
    if not 0 < p.f0_min < p.f0_max:
        raise ConfigError("pitch.f0_min must be positive and below f0_max")
    if not 0 < p.voicing_ncc_threshold <= 1:
        raise ConfigError("pitch.voicing_ncc_threshold must lie in (0, 1]")
    if p.ppq_half_width < 1:
        raise ConfigError("pitch.ppq_half_width must be at least 1")
    if cfg.formants.lpc_order < 8:
        raise ConfigError("formants.lpc_order must be at least 8")
    if cfg.formants.speed_of_sound_mps <= 0:
        raise ConfigError("formants.speed_of_sound_mps must be positive")
    i = cfg.interpret
    if not 0 < i.alpha < 1:
        raise ConfigError("interpret.alpha must lie in (0, 1)")
    if not 0 < i.heldout_fraction < 1:
        raise ConfigError("interpret.heldout_fraction must lie in (0, 1)")
    if i.folds < 2:
        raise ConfigError("interpret.folds must be at least 2")
    if cfg.mlp.epochs < 0 or cfg.mlp.learning_rate <= 0:
        raise ConfigError("mlp.epochs must be >= 0 and learning_rate > 0")
    if cfg.run.jobs < 1:
        raise ConfigError("run.jobs must be at least 1")
