"""Random tablature generators for fixtures, property tests and benchmarks."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .tablature import (
    MAX_FRET,
    NoteEvent,
    STANDARD_TUNING,
    Tablature,
    Technique,
    Track,
    Tuning,
)

_SIMPLE = ("hammer_on", "pull_off", "slide", "palm_mute", "harmonic", "dead_note")


def random_techniques(rng: np.random.Generator, p: float = 0.3) -> list:
    if rng.random() > p:
        return []
    kind = rng.choice(["bend", "vibrato", *_SIMPLE])
    out = []
    if kind == "bend":
        out.append(Technique.bend(Fraction(int(rng.integers(1, 9)), 2)))
    elif kind == "vibrato":
        out.append(Technique.vibrato(float(rng.integers(10, 80)), float(rng.uniform(3.0, 8.0))))
    else:
        out.append(str(kind))
    if kind in ("bend", "slide") and rng.random() < 0.3:
        out.append(Technique.vibrato(30.0, 5.5))
    return out


def random_tuning(rng: np.random.Generator, strings: int = 6) -> Tuning:
    if strings == 6 and rng.random() < 0.7:
        return STANDARD_TUNING
    # drop or lowered tunings stay inside the supported pitch range
    shift = int(rng.integers(-4, 1))
    pitches = [p + shift for p in (64, 59, 55, 50, 45, 40, 35, 30)[:strings]]
    if rng.random() < 0.3:
        pitches[-1] = max(pitches[-1] - 2, 28)
    return Tuning(tuple(pitches))


def random_track(rng: np.random.Generator, n_notes: int = 24, ticks_per_beat: int = 960,
                 program: int | None = None, strings: int = 6, techniques: bool = True,
                 name: str = "") -> Track:
    """A riff-like track: notes on random strings with gaps and occasional chords."""
    if program is None:
        program = int(rng.integers(24, 28))
    tuning = random_tuning(rng, strings)
    notes = []
    tick = 0
    step_choices = np.array([1, 2, 4, 8]) * ticks_per_beat // 4
    for _ in range(n_notes):
        chord = rng.random() < 0.2
        n_voices = int(rng.integers(2, 4)) if chord else 1
        chosen = rng.choice(np.arange(1, strings + 1), size=min(n_voices, strings), replace=False)
        step = int(rng.choice(step_choices))
        for s in chosen:
            dur = int(rng.integers(ticks_per_beat // 8, 2 * ticks_per_beat))
            notes.append(NoteEvent(
                string=int(s), fret=int(rng.integers(0, MAX_FRET + 1)),
                velocity=int(rng.integers(30, 128)), onset_tick=tick, duration_tick=dur,
                techniques=random_techniques(rng) if techniques else [],
            ))
        tick += step
    return Track.from_notes(program, tuning, notes, name)


def random_tablature(rng: np.random.Generator, n_tracks: int = 2, n_notes: int = 24,
                     techniques: bool = True) -> Tablature:
    tpb = int(rng.choice([96, 192, 480, 960]))
    tempo = Fraction(int(rng.integers(120, 400)), int(rng.choice([1, 2])))
    tracks = [random_track(rng, n_notes, tpb, techniques=techniques, name=f"gtr{i}")
              for i in range(n_tracks)]
    return Tablature(tempo, tpb, tracks, title=f"song-{int(rng.integers(1 << 30))}")


def riff_tablature(rng: np.random.Generator, seconds: float, tempo_bpm: int = 120,
                   program: int | None = None, title: str = "") -> Tablature:
    """One-track song of roughly ``seconds`` length, used by the throughput benchmark."""
    tpb = 480
    beats = seconds * tempo_bpm / 60.0
    n_notes = max(1, int(beats * 2))
    track = random_track(rng, n_notes, tpb, program=program, name="lead")
    return Tablature(tempo_bpm, tpb, [track], title=title)
