from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import tomli

FAMILIES = ("acoustic_nylon", "acoustic_steel", "electric_clean", "electric_jazz")

# MIDI program -> family; General MIDI order (24 nylon, 25 steel, 26 jazz, 27 clean)
PROGRAM_FAMILY = {24: "acoustic_nylon", 25: "acoustic_steel", 26: "electric_jazz", 27: "electric_clean"}


def family_group(family: str) -> str:
    """``acoustic`` or ``electric``."""
    return family.split("_", 1)[0]


def program_group(program: int) -> str:
    family = PROGRAM_FAMILY.get(program)
    return family_group(family) if family else "other"


@dataclass(frozen=True)
class TimbreProfile:
    """Parameter set for the plucked-string voice.

    ``loop_damping`` is the amplitude a sustaining string keeps per 10 ms;
    ``excitation_brightness`` opens both the pluck noise filter and the
    in-loop lowpass; ``pick_position`` is the pluck point as a fraction of the
    string length; ``body_resonance`` is a list of peaking filters
    ``(freq_hz, gain_db, q)``.
    """

    name: str
    family: str
    excitation_brightness: float = 0.5
    loop_damping: float = 0.998
    pick_position: float = 0.2
    body_resonance: tuple = ()
    output_gain_db: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not 0.0 <= self.excitation_brightness <= 1.0:
            raise ValueError("excitation_brightness must be in [0, 1]")
        if not 0.0 < self.loop_damping < 1.0:
            raise ValueError("loop_damping must be in (0, 1)")
        if not 0.0 < self.pick_position < 1.0:
            raise ValueError("pick_position must be in (0, 1)")
        bands = tuple(tuple(float(v) for v in band) for band in self.body_resonance)
        for freq, gain, q in bands:
            if not (freq > 0 and math.isfinite(gain) and q > 0):
                raise ValueError(f"unstable body resonance {(freq, gain, q)}")
        object.__setattr__(self, "body_resonance", bands)
        if not math.isfinite(self.output_gain_db):
            raise ValueError("output_gain_db must be finite")

    @property
    def group(self) -> str:
        return family_group(self.family)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "family": self.family,
            "excitation_brightness": self.excitation_brightness,
            "loop_damping": self.loop_damping,
            "pick_position": self.pick_position,
            "body_resonance": [list(b) for b in self.body_resonance],
            "output_gain_db": self.output_gain_db,
        }


def profiles_from_toml(text: str) -> dict:
    doc = tomli.loads(text)
    out = {}
    for entry in doc.get("timbre", []):
        profile = TimbreProfile(**entry)
        if profile.name in out:
            raise ValueError(f"duplicate timbre {profile.name!r}")
        out[profile.name] = profile
    return out


def load_presets(path=None) -> dict:
    """Built-in presets, or the ``[[timbre]]`` tables of a TOML file at ``path``."""
    if path is None:
        text = resources.files("synthtab.synth").joinpath("timbres.toml").read_text("utf-8")
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    return profiles_from_toml(text)
