"""Immutable in-memory tablature model.

A :class:`Tablature` owns a single global tempo and a list of :class:`Track`
objects; every track carries its own tuning and a time-sorted list of
:class:`NoteEvent` objects addressed by string and fret.  All validation happens
at construction, so an invalid score cannot be built through the public API.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import InvariantError

N_STRINGS = 6
N_FRETS = 20
MAX_FRET = N_FRETS - 1
MAX_TUNING_STRINGS = 12
MIN_OPEN_PITCH = 28
MAX_OPEN_PITCH = 76
MAX_BEND_SEMITONES = 4

SIMPLE_TECHNIQUES = ("hammer_on", "pull_off", "slide", "palm_mute", "harmonic", "dead_note")
TECHNIQUES = ("hammer_on", "pull_off", "slide", "bend", "vibrato", "palm_mute", "harmonic", "dead_note")


def as_fraction(value) -> Fraction:
    """Exact rational from int, Fraction, decimal string or float.

    Floats go through ``str`` so that ``120.5`` becomes ``241/2`` rather than
    its binary expansion.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


@dataclass(frozen=True, order=True)
class Technique:
    kind: str
    target_semitones: Fraction | None = None
    depth_cents: float | None = None
    rate_hz: float | None = None

    def __post_init__(self):
        if self.kind not in TECHNIQUES:
            raise InvariantError(f"unknown technique {self.kind!r}")
        if self.kind == "bend":
            if self.target_semitones is None:
                raise InvariantError("bend needs target_semitones")
            target = as_fraction(self.target_semitones)
            object.__setattr__(self, "target_semitones", target)
            if not 0 < target <= MAX_BEND_SEMITONES:
                raise InvariantError(f"bend target {target} outside (0, {MAX_BEND_SEMITONES}]")
        elif self.target_semitones is not None:
            raise InvariantError(f"{self.kind} takes no bend target")
        if self.kind == "vibrato":
            if self.depth_cents is None or self.rate_hz is None:
                raise InvariantError("vibrato needs depth_cents and rate_hz")
            depth, rate = float(self.depth_cents), float(self.rate_hz)
            object.__setattr__(self, "depth_cents", depth)
            object.__setattr__(self, "rate_hz", rate)
            if not 0 < depth <= 200:
                raise InvariantError(f"vibrato depth {depth} cents outside (0, 200]")
            if not 0 < rate <= 20:
                raise InvariantError(f"vibrato rate {rate} Hz outside (0, 20]")
        elif self.depth_cents is not None or self.rate_hz is not None:
            raise InvariantError(f"{self.kind} takes no vibrato parameters")

    @classmethod
    def bend(cls, target_semitones) -> "Technique":
        return cls("bend", target_semitones=as_fraction(target_semitones))

    @classmethod
    def vibrato(cls, depth_cents: float, rate_hz: float) -> "Technique":
        return cls("vibrato", depth_cents=depth_cents, rate_hz=rate_hz)


def technique_set(items: Iterable[Technique | str]) -> frozenset:
    """Normalise a technique collection; ``"none"`` entries are dropped."""
    out = []
    for item in items:
        if isinstance(item, str):
            if item == "none":
                continue
            if item not in SIMPLE_TECHNIQUES:
                raise InvariantError(f"technique {item!r} needs parameters or is unknown")
            item = Technique(item)
        out.append(item)
    kinds = [t.kind for t in out]
    if len(set(kinds)) != len(kinds):
        raise InvariantError(f"duplicate technique kinds in {sorted(kinds)}")
    return frozenset(out)


@dataclass(frozen=True)
class Tuning:
    """Open-string MIDI pitches, string 1 (highest) first."""

    pitches: tuple

    def __post_init__(self):
        pitches = tuple(self.pitches)
        object.__setattr__(self, "pitches", pitches)
        if not 1 <= len(pitches) <= MAX_TUNING_STRINGS:
            raise InvariantError(f"tuning has {len(pitches)} strings")
        for p in pitches:
            if not isinstance(p, int) or isinstance(p, bool):
                raise InvariantError(f"tuning pitch {p!r} is not an integer")
            if not MIN_OPEN_PITCH <= p <= MAX_OPEN_PITCH:
                raise InvariantError(f"open pitch {p} outside [{MIN_OPEN_PITCH}, {MAX_OPEN_PITCH}]")
        if any(a <= b for a, b in zip(pitches, pitches[1:])):
            raise InvariantError(f"tuning {pitches} is not strictly decreasing")

    @property
    def string_count(self) -> int:
        return len(self.pitches)

    def open_pitch(self, string: int) -> int:
        return self.pitches[string - 1]


STANDARD_TUNING = Tuning((64, 59, 55, 50, 45, 40))


@dataclass(frozen=True)
class NoteEvent:
    string: int
    fret: int
    velocity: int
    onset_tick: int
    duration_tick: int
    techniques: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        for name in ("string", "fret", "velocity", "onset_tick", "duration_tick"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise InvariantError(f"{name}={value!r} is not an integer")
        if not 1 <= self.string <= MAX_TUNING_STRINGS:
            raise InvariantError(f"string {self.string} out of range")
        if not 0 <= self.fret <= MAX_FRET:
            raise InvariantError(f"fret {self.fret} outside [0, {MAX_FRET}]")
        if not 1 <= self.velocity <= 127:
            raise InvariantError(f"velocity {self.velocity} outside [1, 127]")
        if self.onset_tick < 0:
            raise InvariantError(f"negative onset_tick {self.onset_tick}")
        if self.duration_tick <= 0:
            raise InvariantError(f"duration_tick {self.duration_tick} must be positive")
        object.__setattr__(self, "techniques", technique_set(self.techniques))

    @property
    def end_tick(self) -> int:
        return self.onset_tick + self.duration_tick

    @property
    def technique_kinds(self) -> frozenset:
        return frozenset(t.kind for t in self.techniques)

    def get_technique(self, kind: str) -> Technique | None:
        for t in self.techniques:
            if t.kind == kind:
                return t
        return None

    def sort_key(self):
        return (self.onset_tick, self.string)


def resolve_overlaps(notes: Iterable[NoteEvent]) -> list:
    """Sort notes and truncate any note cut short by a later onset on its string.

    Two onsets at the same tick on the same string cannot be resolved and raise
    :class:`InvariantError`.
    """
    ordered = sorted(notes, key=NoteEvent.sort_key)
    last_on_string = {}
    out = []
    for note in ordered:
        prev_idx = last_on_string.get(note.string)
        if prev_idx is not None:
            prev = out[prev_idx]
            if prev.onset_tick == note.onset_tick:
                raise InvariantError(
                    f"two notes on string {note.string} start at tick {note.onset_tick}"
                )
            if prev.end_tick > note.onset_tick:
                out[prev_idx] = NoteEvent(
                    prev.string, prev.fret, prev.velocity, prev.onset_tick,
                    note.onset_tick - prev.onset_tick, prev.techniques,
                )
        last_on_string[note.string] = len(out)
        out.append(note)
    return out


@dataclass(frozen=True)
class Track:
    midi_program: int
    tuning: Tuning
    notes: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "notes", tuple(self.notes))
        if not isinstance(self.midi_program, int) or not 0 <= self.midi_program <= 127:
            raise InvariantError(f"midi_program {self.midi_program!r} outside [0, 127]")
        last_end = {}
        prev_key = None
        for i, note in enumerate(self.notes):
            if note.string > self.tuning.string_count:
                raise InvariantError(
                    f"note {i} uses string {note.string} on a {self.tuning.string_count}-string tuning"
                )
            key = note.sort_key()
            if prev_key is not None and key < prev_key:
                raise InvariantError(f"note {i} is out of (onset, string) order")
            if note.onset_tick < last_end.get(note.string, 0):
                raise InvariantError(f"note {i} overlaps the previous note on string {note.string}")
            last_end[note.string] = note.end_tick
            prev_key = key

    @classmethod
    def from_notes(cls, midi_program, tuning, notes, name="") -> "Track":
        """Build a track from unordered notes, applying the truncation policy."""
        return cls(midi_program, tuning, tuple(resolve_overlaps(notes)), name)

    @property
    def string_count(self) -> int:
        return self.tuning.string_count

    def pitch_of(self, note: NoteEvent) -> int:
        return self.tuning.open_pitch(note.string) + note.fret


@dataclass(frozen=True)
class Tablature:
    tempo_bpm: Fraction
    ticks_per_beat: int
    tracks: tuple = ()
    title: str = ""
    tempo_changes: bool = False

    def __post_init__(self):
        try:
            tempo = as_fraction(self.tempo_bpm)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InvariantError(f"bad tempo {self.tempo_bpm!r}") from exc
        if tempo <= 0:
            raise InvariantError(f"tempo {tempo} must be positive")
        object.__setattr__(self, "tempo_bpm", tempo)
        object.__setattr__(self, "tracks", tuple(self.tracks))
        if not isinstance(self.ticks_per_beat, int) or self.ticks_per_beat < 1:
            raise InvariantError(f"ticks_per_beat {self.ticks_per_beat!r} must be >= 1")
