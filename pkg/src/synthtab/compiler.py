"""Track filtering and compilation of tick-based notes into timed per-string events."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CompileError
from .tablature import N_STRINGS, NoteEvent, Tablature, Track, as_fraction

GUITAR_PROGRAMS = frozenset({24, 25, 26, 27})
MAX_CURVE_CENTS = 400.0
SLIDE_OUT_CENTS = -200.0
# separation imposed when onset jitter would swap two notes on one string
MIN_ONSET_GAP_S = 1e-3

_CONTRADICTIONS = (
    ("dead_note", "bend"),
    ("dead_note", "vibrato"),
    ("dead_note", "slide"),
    ("dead_note", "harmonic"),
    ("dead_note", "hammer_on"),
    ("dead_note", "pull_off"),
    ("hammer_on", "pull_off"),
)


@dataclass(frozen=True)
class FilterReport:
    kept: tuple
    rejected: tuple  # (track index, reason)

    def reason_for(self, track_id):
        return dict(self.rejected).get(track_id)


def filter_tracks(tab: Tablature, programs=GUITAR_PROGRAMS) -> FilterReport:
    """Keep guitar tracks with at most six strings; tempo-change songs lose every track."""
    kept, rejected = [], []
    for i, track in enumerate(tab.tracks):
        if tab.tempo_changes:
            rejected.append((i, "tempo_change"))
        elif track.string_count > N_STRINGS:
            rejected.append((i, "too_many_strings"))
        elif track.midi_program not in programs:
            rejected.append((i, "program_out_of_range"))
        else:
            kept.append(i)
    return FilterReport(tuple(kept), tuple(rejected))


def tick_to_seconds(tick: int, tempo_bpm, ticks_per_beat: int) -> float:
    """``tick * 60 / (tempo_bpm * ticks_per_beat)``, exact, rounded to the nanosecond."""
    exact = Fraction(tick) * 60 / (as_fraction(tempo_bpm) * ticks_per_beat)
    return round(exact * 1_000_000_000) / 1e9


@dataclass(frozen=True)
class HumanizeConfig:
    timing_ms: float = 8.0
    velocity_range: int = 6
    vibrato_variation: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.timing_ms < 0 or self.velocity_range < 0:
            raise ValueError("humanize ranges must be non-negative")
        if not 0 <= self.vibrato_variation < 1:
            raise ValueError("vibrato_variation must be in [0, 1)")

    @classmethod
    def off(cls, seed: int = 0) -> "HumanizeConfig":
        return cls(timing_ms=0.0, velocity_range=0, vibrato_variation=0.0, seed=seed)


@dataclass(frozen=True)
class PitchCurve:
    """Piecewise-linear cents offset over note-relative time ``[0, duration]``."""

    times: tuple
    cents: tuple

    @classmethod
    def flat(cls, duration: float) -> "PitchCurve":
        return cls((0.0, float(duration)), (0.0, 0.0))

    @property
    def duration(self) -> float:
        return self.times[-1]

    @property
    def is_flat(self) -> bool:
        return all(c == 0.0 for c in self.cents)

    def __call__(self, t):
        return np.interp(t, self.times, self.cents)

    def max_abs(self) -> float:
        return max(abs(c) for c in self.cents)


@dataclass(frozen=True)
class PerformanceEvent:
    string: int
    fret: int
    pitch: int
    onset_s: float
    duration_s: float
    velocity: int
    pitch_curve: PitchCurve
    excitation: str = "pluck"
    damping: str = "normal"
    techniques: frozenset = field(default_factory=frozenset)

    @property
    def end_s(self) -> float:
        return self.onset_s + self.duration_s


@dataclass(frozen=True)
class PerformanceScore:
    strings: tuple  # six tuples of PerformanceEvent, string 1 first
    total_duration_s: float

    @property
    def events(self) -> list:
        return sorted((e for s in self.strings for e in s), key=lambda e: (e.onset_s, e.string))

    def __len__(self):
        return sum(len(s) for s in self.strings)


def _check_techniques(note: NoteEvent, index: int):
    kinds = note.technique_kinds
    for a, b in _CONTRADICTIONS:
        if a in kinds and b in kinds:
            raise CompileError(f"note {index}: {a} cannot be combined with {b}")


def build_pitch_curve(duration: float, bend_semitones=None, slide_cents=None,
                      vibrato_depth=None, vibrato_rate=None) -> PitchCurve:
    """Sum of bend (rise over the first half, then hold), slide (linear over the
    whole note) and sinusoidal vibrato, clipped to +-400 cents."""
    times = {0.0, duration}
    if bend_semitones is not None:
        times.add(duration / 2)
    if vibrato_depth is not None:
        # 32 breakpoints per cycle keeps the linear approximation within 0.5% of depth
        step = 1.0 / (vibrato_rate * 32)
        n = int(math.ceil(duration / step))
        times.update(np.linspace(0.0, duration, n + 1).tolist())
    t = np.array(sorted(times))
    cents = np.zeros_like(t)
    if bend_semitones is not None:
        cents += 100.0 * float(bend_semitones) * np.minimum(t / (duration / 2), 1.0)
    if slide_cents is not None:
        cents += slide_cents * t / duration
    if vibrato_depth is not None:
        cents += vibrato_depth * np.sin(2 * np.pi * vibrato_rate * t)
    cents = np.clip(cents, -MAX_CURVE_CENTS, MAX_CURVE_CENTS)
    return PitchCurve(tuple(t.tolist()), tuple(cents.tolist()))


def note_rng(seed: int, track_index: int, note_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, track_index, note_index]))


def compile_track(track: Track, tempo_bpm, ticks_per_beat: int,
                  humanize: HumanizeConfig = HumanizeConfig(), seed: int | None = None,
                  track_index: int = 0) -> PerformanceScore:
    """Turn a filtered track into a :class:`PerformanceScore`.

    Randomness is drawn per note from ``(seed, track_index, note_index)`` so the
    result does not depend on the order in which tracks are compiled.
    """
    if track.string_count > N_STRINGS:
        raise CompileError(f"track has {track.string_count} strings")
    if seed is None:
        seed = humanize.seed
    tempo = as_fraction(tempo_bpm)

    drafts = []
    for i, note in enumerate(track.notes):
        _check_techniques(note, i)
        rng = note_rng(seed, track_index, i)
        jitter_s = rng.uniform(-1.0, 1.0) * humanize.timing_ms / 1000.0
        dv = int(rng.integers(-humanize.velocity_range, humanize.velocity_range + 1))
        depth_factor, rate_factor = rng.uniform(1 - humanize.vibrato_variation,
                                                1 + humanize.vibrato_variation, 2)
        start = tick_to_seconds(note.onset_tick, tempo, ticks_per_beat)
        end = tick_to_seconds(note.end_tick, tempo, ticks_per_beat)
        onset = max(0.0, start + jitter_s) if jitter_s else start
        drafts.append({
            "note": note, "index": i, "onset": onset, "duration": end - start,
            "velocity": min(127, max(1, note.velocity + dv)),
            "depth_factor": depth_factor, "rate_factor": rate_factor,
        })

    per_string = [[] for _ in range(N_STRINGS)]
    for d in drafts:
        per_string[d["note"].string - 1].append(d)

    strings = []
    total = 0.0
    for lane in per_string:
        for prev, cur in zip(lane, lane[1:]):
            if cur["onset"] <= prev["onset"]:
                cur["onset"] = prev["onset"] + MIN_ONSET_GAP_S
        for prev, cur in zip(lane, lane[1:]):
            prev["duration"] = min(prev["duration"], cur["onset"] - prev["onset"])
        events = []
        for j, d in enumerate(lane):
            note = d["note"]
            successor = lane[j + 1]["note"] if j + 1 < len(lane) else None
            events.append(_make_event(track, note, d, successor))
            total = max(total, d["onset"] + d["duration"])
        strings.append(tuple(events))
    return PerformanceScore(tuple(strings), total)


def _make_event(track: Track, note: NoteEvent, d: dict, successor: NoteEvent | None):
    kinds = note.technique_kinds
    duration = d["duration"]
    bend = note.get_technique("bend")
    vibrato = note.get_technique("vibrato")
    slide_cents = None
    if "slide" in kinds:
        if successor is not None:
            slide_cents = 100.0 * (successor.fret - note.fret)
            slide_cents = float(np.clip(slide_cents, -MAX_CURVE_CENTS, MAX_CURVE_CENTS))
        else:
            slide_cents = SLIDE_OUT_CENTS
    if bend is None and vibrato is None and slide_cents is None:
        curve = PitchCurve.flat(duration)
    else:
        curve = build_pitch_curve(
            duration,
            bend_semitones=bend.target_semitones if bend else None,
            slide_cents=slide_cents,
            vibrato_depth=vibrato.depth_cents * d["depth_factor"] if vibrato else None,
            vibrato_rate=vibrato.rate_hz * d["rate_factor"] if vibrato else None,
        )
    if "dead_note" in kinds:
        damping = "dead"
    elif "palm_mute" in kinds:
        damping = "muted"
    else:
        damping = "normal"
    excitation = "legato" if kinds & {"hammer_on", "pull_off"} else "pluck"
    return PerformanceEvent(
        string=note.string, fret=note.fret, pitch=track.pitch_of(note),
        onset_s=d["onset"], duration_s=duration, velocity=d["velocity"],
        pitch_curve=curve, excitation=excitation, damping=damping, techniques=kinds,
    )



def score_to_dict(score: PerformanceScore) -> dict:
    return {
        "total_duration_s": score.total_duration_s,
        "strings": [
            [
                {
                    "string": e.string, "fret": e.fret, "pitch": e.pitch,
                    "onset_s": e.onset_s, "duration_s": e.duration_s, "velocity": e.velocity,
                    "excitation": e.excitation, "damping": e.damping,
                    "techniques": sorted(e.techniques),
                    "pitch_curve": {"times": list(e.pitch_curve.times),
                                    "cents": list(e.pitch_curve.cents)},
                }
                for e in lane
            ]
            for lane in score.strings
        ],
    }
