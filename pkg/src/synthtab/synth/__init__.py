from .audio import AudioBuffer, DEFAULT_SAMPLE_RATE, mix, read_wav, write_wav
from .karplus import RELEASE_TAIL_S, render_string
from .timbre import FAMILIES, TimbreProfile, load_presets

__all__ = [
    "AudioBuffer", "DEFAULT_SAMPLE_RATE", "FAMILIES", "RELEASE_TAIL_S", "TimbreProfile",
    "load_presets", "mix", "read_wav", "render_string", "write_wav",
]
