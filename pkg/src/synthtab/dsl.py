"""Line-oriented tab DSL for hand-written fixtures.

Example::

    # two-note riff
    tempo 120 tpq 960
    track 25 "Rhythm"
    tuning E4 B3 G3 D3 A2 E2
    note s1 f0 v96 @0 d960
    note s2 f3 @960 d480 hammer_on bend=1/2 vibrato=40:5.5

``tempo`` and ``tpq`` may share a line.  ``track <program> [name]`` opens a new
track; ``tuning`` applies to the current track and takes note names or MIDI
numbers.  Notes appearing before any ``track`` go to a default track (program
24, standard tuning).  Velocity defaults to 96.
"""
from __future__ import annotations

import re
import shlex

from .errors import DslError, InvariantError
from .tablature import (
    NoteEvent,
    SIMPLE_TECHNIQUES,
    STANDARD_TUNING,
    Tablature,
    Technique,
    Track,
    Tuning,
    as_fraction,
)

DEFAULT_PROGRAM = 24
DEFAULT_VELOCITY = 96

_NOTE_NAME = re.compile(r"^([A-Ga-g])([#b]?)(-?\d+)$")
_SEMITONE = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
_NOTE_FIELD = re.compile(r"^([sfvd@])(\d+)$")


def note_name_to_pitch(name: str) -> int:
    """``C4`` -> 60, ``E2`` -> 40, ``F#3`` -> 54."""
    m = _NOTE_NAME.match(name)
    if not m:
        raise ValueError(f"bad note name {name!r}")
    letter, accidental, octave = m.groups()
    pitch = 12 * (int(octave) + 1) + _SEMITONE[letter.upper()]
    return pitch + {"#": 1, "b": -1, "": 0}[accidental]


class _TrackDraft:
    def __init__(self, program, name):
        self.program = program
        self.name = name
        self.tuning = STANDARD_TUNING
        self.notes = []


def _parse_technique(token, lineno):
    if token == "none" or token in SIMPLE_TECHNIQUES:
        return token
    key, sep, value = token.partition("=")
    if not sep:
        raise DslError(f"unknown technique or field {token!r}", lineno)
    try:
        if key == "bend":
            return Technique.bend(as_fraction(value))
        if key == "vibrato":
            depth, _, rate = value.partition(":")
            return Technique.vibrato(float(depth), float(rate))
    except (ValueError, ZeroDivisionError, InvariantError) as exc:
        raise DslError(f"bad {key} parameters {value!r}: {exc}", lineno) from exc
    raise DslError(f"unknown technique {key!r}", lineno)


def _parse_note(args, lineno):
    fields = {}
    techniques = []
    for token in args:
        m = _NOTE_FIELD.match(token)
        if m:
            if m.group(1) in fields:
                raise DslError(f"duplicate field {m.group(1)!r}", lineno)
            fields[m.group(1)] = int(m.group(2))
        else:
            techniques.append(_parse_technique(token, lineno))
    missing = [k for k in "sf@d" if k not in fields]
    if missing:
        raise DslError(f"note is missing field(s) {missing}", lineno)
    try:
        return NoteEvent(
            string=fields["s"], fret=fields["f"], velocity=fields.get("v", DEFAULT_VELOCITY),
            onset_tick=fields["@"], duration_tick=fields["d"], techniques=techniques,
        )
    except InvariantError as exc:
        raise DslError(str(exc), lineno) from exc


def parse_tab_dsl(text: str) -> Tablature:
    tempo = tpq = None
    tracks = []
    current = None
    lineno = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        try:
            tokens = shlex.split(line, comments=True)
        except ValueError as exc:
            raise DslError(str(exc), lineno) from exc
        if not tokens:
            continue
        head = tokens[0]
        if head in ("tempo", "tpq"):
            if len(tokens) % 2:
                raise DslError("expected 'tempo <bpm>' / 'tpq <ticks>' pairs", lineno)
            for key, value in zip(tokens[::2], tokens[1::2]):
                try:
                    if key == "tempo":
                        tempo = as_fraction(value)
                    elif key == "tpq":
                        tpq = int(value)
                    else:
                        raise DslError(f"unexpected {key!r} after {head!r}", lineno)
                except (ValueError, ZeroDivisionError) as exc:
                    raise DslError(f"bad {key} value {value!r}", lineno) from exc
        elif head == "track":
            if len(tokens) < 2:
                raise DslError("track needs a MIDI program", lineno)
            try:
                program = int(tokens[1])
            except ValueError as exc:
                raise DslError(f"bad program {tokens[1]!r}", lineno) from exc
            current = _TrackDraft(program, " ".join(tokens[2:]))
            tracks.append(current)
        elif head == "tuning":
            if current is None:
                current = _TrackDraft(DEFAULT_PROGRAM, "")
                tracks.append(current)
            try:
                pitches = tuple(int(t) if t.lstrip("-").isdigit() else note_name_to_pitch(t)
                                for t in tokens[1:])
                current.tuning = Tuning(pitches)
            except (ValueError, InvariantError) as exc:
                raise DslError(f"bad tuning: {exc}", lineno) from exc
        elif head == "note":
            if current is None:
                current = _TrackDraft(DEFAULT_PROGRAM, "")
                tracks.append(current)
            current.notes.append((_parse_note(tokens[1:], lineno), lineno))
        else:
            raise DslError(f"unknown directive {head!r}", lineno)

    if tempo is None or tpq is None:
        raise DslError("document needs both tempo and tpq", lineno)
    built = []
    for draft in tracks:
        for note, note_line in draft.notes:
            if note.string > draft.tuning.string_count:
                raise DslError(f"string {note.string} not in tuning", note_line)
        try:
            built.append(Track.from_notes(draft.program, draft.tuning,
                                          [n for n, _ in draft.notes], draft.name))
        except InvariantError as exc:
            raise DslError(str(exc), lineno) from exc
    try:
        return Tablature(tempo, tpq, built)
    except InvariantError as exc:
        raise DslError(str(exc), lineno) from exc
