"""Pipeline configuration: TOML file plus ``SYNTHTAB_*`` environment overrides.

Example::

    workers = 4

    [humanize]
    timing_ms = 8.0
    velocity_range = 6
    vibrato_variation = 0.25
    seed = 0

    [synth]
    sample_rate = 22050
    timbres = []              # empty: every built-in preset
    timbre_policy = "family"  # or "all"

    [labels]
    hop_samples = 512

    [splits]
    ratios = [8, 1, 1]
    holdout_timbres = []
    holdout_song_fraction = 0.0
    seed = 0

Environment variables override file values: ``SYNTHTAB_WORKERS=8``,
``SYNTHTAB_SYNTH_SAMPLE_RATE=44100``, ``SYNTHTAB_SPLITS_RATIOS="[10, 1, 1]"``.
Values are read as TOML literals, falling back to plain strings.
"""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction

import tomli

from ..compiler import GUITAR_PROGRAMS, HumanizeConfig
from ..errors import ConfigError
from ..synth.audio import DEFAULT_SAMPLE_RATE

ENV_PREFIX = "SYNTHTAB_"
SECTIONS = ("humanize", "synth", "labels", "splits")


@dataclass(frozen=True)
class SynthConfig:
    sample_rate: int = DEFAULT_SAMPLE_RATE
    timbres: tuple = ()
    timbre_policy: str = "family"
    presets: str = ""
    programs: tuple = tuple(sorted(GUITAR_PROGRAMS))

    def __post_init__(self):
        if self.timbre_policy not in ("family", "all"):
            raise ConfigError(f"unknown timbre_policy {self.timbre_policy!r}")
        if self.sample_rate < 8000:
            raise ConfigError("sample_rate must be at least 8000")
        object.__setattr__(self, "timbres", tuple(self.timbres))
        object.__setattr__(self, "programs", tuple(self.programs))


@dataclass(frozen=True)
class LabelConfig:
    hop_samples: int = 512

    def __post_init__(self):
        if self.hop_samples < 1:
            raise ConfigError("hop_samples must be positive")


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple = (8, 1, 1)
    holdout_timbres: frozenset = frozenset()
    holdout_song_fraction: Fraction = Fraction(0)
    seed: int = 0

    def __post_init__(self):
        ratios = tuple(int(r) for r in self.ratios)
        if len(ratios) != 3 or any(r <= 0 for r in ratios):
            raise ConfigError(f"ratios must be three positive integers, got {self.ratios!r}")
        frac = Fraction(str(self.holdout_song_fraction)) if isinstance(
            self.holdout_song_fraction, float) else Fraction(self.holdout_song_fraction)
        if not 0 <= frac < 1:
            raise ConfigError("holdout_song_fraction must be in [0, 1)")
        object.__setattr__(self, "ratios", ratios)
        object.__setattr__(self, "holdout_timbres", frozenset(self.holdout_timbres))
        object.__setattr__(self, "holdout_song_fraction", frac)


@dataclass(frozen=True)
class PipelineConfig:
    humanize: HumanizeConfig = field(default_factory=HumanizeConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    labels: LabelConfig = field(default_factory=LabelConfig)
    splits: SplitSpec = field(default_factory=SplitSpec)
    workers: int = 0  # 0: one per logical core

    @property
    def worker_count(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    @property
    def hop_s(self) -> float:
        return self.labels.hop_samples / self.synth.sample_rate


_SECTION_TYPES = {"humanize": HumanizeConfig, "synth": SynthConfig,
                  "labels": LabelConfig, "splits": SplitSpec}


def _parse_env_value(text: str):
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def _env_overrides(env) -> dict:
    out = {}
    for key, raw in env.items():
        if not key.startswith(ENV_PREFIX):
            continue
        rest = key[len(ENV_PREFIX):].lower()
        if rest == "workers":
            out["workers"] = _parse_env_value(raw)
            continue
        for section in SECTIONS:
            if rest.startswith(section + "_"):
                out.setdefault(section, {})[rest[len(section) + 1:]] = _parse_env_value(raw)
                break
    return out


def config_from_dict(doc: dict) -> PipelineConfig:
    unknown = set(doc) - set(SECTIONS) - {"workers"}
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    kwargs = {}
    for section, cls in _SECTION_TYPES.items():
        values = doc.get(section, {})
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        allowed = {f.name for f in fields(cls)}
        bad = set(values) - allowed
        if bad:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(bad)}")
        try:
            kwargs[section] = cls(**values)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}]: {exc}") from exc
    workers = doc.get("workers", 0)
    if not isinstance(workers, int) or workers < 0:
        raise ConfigError("workers must be a non-negative integer")
    return PipelineConfig(workers=workers, **kwargs)


def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = value
    return out


def load_config(path=None, env=None, **overrides) -> PipelineConfig:
    """Read ``path`` (optional), apply environment overrides, then keyword overrides."""
    doc = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                doc = tomli.load(fh)
        except (OSError, tomli.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    doc = _merge(doc, _env_overrides(os.environ if env is None else env))
    doc = _merge(doc, {k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(doc)


def config_to_dict(config: PipelineConfig) -> dict:
    d = asdict(config)
    d["splits"]["holdout_timbres"] = sorted(d["splits"]["holdout_timbres"])
    d["splits"]["holdout_song_fraction"] = str(d["splits"]["holdout_song_fraction"])
    return d


def with_workers(config: PipelineConfig, workers: int) -> PipelineConfig:
    return replace(config, workers=workers)
