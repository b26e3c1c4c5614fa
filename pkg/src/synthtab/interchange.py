"""JSON interchange format (``synthtab-ir/1``) for tablatures.

Document layout::

    {"schema": "synthtab-ir/1", "title": "...", "tempo_bpm": 120,
     "ticks_per_beat": 960, "tempo_changes": false,
     "tracks": [{"name": "...", "midi_program": 25, "tuning": [64, 59, ...],
                 "notes": [{"string": 1, "fret": 0, "velocity": 96,
                            "onset_tick": 0, "duration_tick": 960,
                            "techniques": ["hammer_on",
                                           {"type": "bend", "target_semitones": "1/2"}]}]}]}

Rationals (tempo, bend targets) are written as integers when whole and as
``"p/q"`` strings otherwise.
"""
from __future__ import annotations

import json
from fractions import Fraction

from .errors import InvariantError, SchemaError
from .tablature import (
    NoteEvent,
    SIMPLE_TECHNIQUES,
    Tablature,
    Technique,
    Track,
    Tuning,
    as_fraction,
    resolve_overlaps,
)

SCHEMA_VERSION = "synthtab-ir/1"

_DOC_KEYS = {"schema", "title", "tempo_bpm", "ticks_per_beat", "tempo_changes", "tracks"}
_TRACK_KEYS = {"name", "midi_program", "tuning", "notes"}
_NOTE_KEYS = {"string", "fret", "velocity", "onset_tick", "duration_tick", "techniques"}


def _require(obj, key, path):
    if key not in obj:
        raise SchemaError(f"missing field {key!r}", path)
    return obj[key]


def _check_keys(obj, allowed, path):
    if not isinstance(obj, dict):
        raise SchemaError(f"expected an object, got {type(obj).__name__}", path)
    extra = set(obj) - allowed
    if extra:
        raise SchemaError(f"unknown field(s) {sorted(extra)}", path)


def _int(value, path):
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaError(f"expected an integer, got {value!r}", path)
    return value


def _str(value, path):
    if not isinstance(value, str):
        raise SchemaError(f"expected a string, got {value!r}", path)
    return value


def _rational(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise SchemaError(f"expected a number or 'p/q' string, got {value!r}", path)
    try:
        return as_fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational {value!r}", path) from exc


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected a number, got {value!r}", path)
    return float(value)


def _parse_technique(item, path):
    if isinstance(item, str):
        if item != "none" and item not in SIMPLE_TECHNIQUES:
            raise SchemaError(f"unknown technique {item!r}", path)
        return item
    if not isinstance(item, dict):
        raise SchemaError("technique must be a string or an object", path)
    kind = _str(_require(item, "type", path), f"{path}.type")
    if kind == "bend":
        _check_keys(item, {"type", "target_semitones"}, path)
        target = _rational(_require(item, "target_semitones", path), f"{path}.target_semitones")
        return Technique("bend", target_semitones=target)
    if kind == "vibrato":
        _check_keys(item, {"type", "depth_cents", "rate_hz"}, path)
        return Technique(
            "vibrato",
            depth_cents=_number(_require(item, "depth_cents", path), f"{path}.depth_cents"),
            rate_hz=_number(_require(item, "rate_hz", path), f"{path}.rate_hz"),
        )
    if kind in SIMPLE_TECHNIQUES:
        _check_keys(item, {"type"}, path)
        return kind
    raise SchemaError(f"unknown technique {kind!r}", path)


def _parse_note(obj, path):
    _check_keys(obj, _NOTE_KEYS, path)
    values = {k: _int(_require(obj, k, path), f"{path}.{k}")
              for k in ("string", "fret", "velocity", "onset_tick", "duration_tick")}
    raw_techniques = obj.get("techniques", [])
    if not isinstance(raw_techniques, list):
        raise SchemaError("expected a list", f"{path}.techniques")
    try:
        techniques = [_parse_technique(t, f"{path}.techniques[{i}]")
                      for i, t in enumerate(raw_techniques)]
        return NoteEvent(techniques=techniques, **values)
    except InvariantError as exc:
        raise InvariantError(f"{path}: {exc}") from exc


def _parse_track(obj, path):
    _check_keys(obj, _TRACK_KEYS, path)
    name = _str(obj.get("name", ""), f"{path}.name")
    program = _int(_require(obj, "midi_program", path), f"{path}.midi_program")
    raw_tuning = _require(obj, "tuning", path)
    if not isinstance(raw_tuning, list):
        raise SchemaError("expected a list of pitches", f"{path}.tuning")
    pitches = tuple(_int(p, f"{path}.tuning[{i}]") for i, p in enumerate(raw_tuning))
    raw_notes = _require(obj, "notes", path)
    if not isinstance(raw_notes, list):
        raise SchemaError("expected a list", f"{path}.notes")
    notes = [_parse_note(n, f"{path}.notes[{i}]") for i, n in enumerate(raw_notes)]
    try:
        tuning = Tuning(pitches)
        return Track(program, tuning, resolve_overlaps(notes), name)
    except InvariantError as exc:
        raise InvariantError(f"{path}: {exc}") from exc


def from_dict(doc) -> Tablature:
    _check_keys(doc, _DOC_KEYS, "")
    schema = _require(doc, "schema", "")
    if schema != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema {schema!r}", "schema")
    tempo = _rational(_require(doc, "tempo_bpm", ""), "tempo_bpm")
    tpb = _int(_require(doc, "ticks_per_beat", ""), "ticks_per_beat")
    title = _str(doc.get("title", ""), "title")
    tempo_changes = doc.get("tempo_changes", False)
    if not isinstance(tempo_changes, bool):
        raise SchemaError("expected a boolean", "tempo_changes")
    raw_tracks = _require(doc, "tracks", "")
    if not isinstance(raw_tracks, list):
        raise SchemaError("expected a list", "tracks")
    tracks = [_parse_track(t, f"tracks[{i}]") for i, t in enumerate(raw_tracks)]
    return Tablature(tempo, tpb, tracks, title, tempo_changes)


def parse_interchange(data) -> Tablature:
    """Parse and validate an interchange document given as bytes or text."""
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"not UTF-8: {exc}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return from_dict(doc)


def _rational_out(value: Fraction):
    return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def _technique_out(t: Technique):
    if t.kind == "bend":
        return {"type": "bend", "target_semitones": _rational_out(t.target_semitones)}
    if t.kind == "vibrato":
        return {"type": "vibrato", "depth_cents": t.depth_cents, "rate_hz": t.rate_hz}
    return t.kind


def to_dict(tab: Tablature) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "title": tab.title,
        "tempo_bpm": _rational_out(tab.tempo_bpm),
        "ticks_per_beat": tab.ticks_per_beat,
        "tempo_changes": tab.tempo_changes,
        "tracks": [
            {
                "name": track.name,
                "midi_program": track.midi_program,
                "tuning": list(track.tuning.pitches),
                "notes": [
                    {
                        "string": n.string,
                        "fret": n.fret,
                        "velocity": n.velocity,
                        "onset_tick": n.onset_tick,
                        "duration_tick": n.duration_tick,
                        "techniques": [_technique_out(t) for t in sorted(n.techniques)],
                    }
                    for n in track.notes
                ],
            }
            for track in tab.tracks
        ],
    }


def serialize_interchange(tab: Tablature) -> bytes:
    """Canonical UTF-8 encoding: sorted keys, fixed indentation, trailing newline."""
    text = json.dumps(to_dict(tab), sort_keys=True, indent=1, ensure_ascii=False)
    return (text + "\n").encode("utf-8")
