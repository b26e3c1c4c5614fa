"""Synthetic guitar audio with frame-exact tablature labels.

Tablature in, per-string performance events, physically modelled audio,
six-channel MIDI and string/fret label tensors out.
"""
from .compiler import HumanizeConfig, PerformanceEvent, PerformanceScore, compile_track, filter_tracks
from .dsl import parse_tab_dsl
from .errors import SynthTabError
from .interchange import parse_interchange, serialize_interchange
from .labels import FrameLabelMatrix, labels_from_score, load_labels, save_labels
from .metrics import MetricReport, aggregate, tab_f1
from .midi import KeyswitchMap, export_smf
from .synth import AudioBuffer, TimbreProfile, load_presets, mix, render_string, write_wav
from .tablature import NoteEvent, Tablature, Technique, Track, Tuning

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer", "FrameLabelMatrix", "HumanizeConfig", "KeyswitchMap", "MetricReport",
    "NoteEvent", "PerformanceEvent", "PerformanceScore", "SynthTabError", "Tablature",
    "Technique", "TimbreProfile", "Track", "Tuning", "aggregate", "compile_track",
    "export_smf", "filter_tracks", "labels_from_score", "load_labels", "load_presets", "mix",
    "parse_interchange", "parse_tab_dsl", "render_string", "save_labels",
    "serialize_interchange", "tab_f1", "write_wav",
]
